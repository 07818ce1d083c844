//! Closed-form kernels: the Green's function of the domain, its holomorphic
//! derivative `k = dG/dz`, the Bergman kernel `K`, and the composite kernels
//! `tau`, `b`, `h`, `H`, `a`, `E` that drive the decomposed solver.
//!
//! Derivative kernels are closed-form only; numerical differentiation appears
//! solely in test oracles. On the disc
//!
//! ```text
//! k(z, w) = (1/pi) (wbar/(1 - z wbar) - 1/(w - z))
//!         = (|w|^2 - 1) / (pi (1 - z wbar)(w - z))
//! ```
//!
//! and `dk/dwbar = K(z, w)` pointwise away from the diagonal, so
//! `H(z, w) = |w - z|^2 K(z, w)` on every domain handled here. Conformal
//! images enter through the chain rule with `phi'`.
//!
//! Slot indices in the multi-slot kernels are 0-based; in `b_kernel(i, j, ..)`
//! the second index `j` is the active slot: `b^{i,j}` carries `h`, `H` of the
//! `j`-th slot pair and the `dwbar_j` derivative.

use crate::geometry::DomainSpec;
use crate::{Complex64, Error, Result};

const COINCIDENCE_GUARD: f64 = 1e-13;

/// A point of `Omega` with its pullback coordinate and forward-map derivative
/// cached, so kernel tables can be built without re-running the inversion.
#[derive(Debug, Clone, Copy)]
pub struct Prepared {
    /// point in Omega
    pub z: Complex64,
    /// phi(z), its disc coordinate
    pub zeta: Complex64,
    /// phi'(z)
    pub dphi: Complex64,
}

/// Prepare a domain point given its disc coordinate.
pub fn prepare_pullback(domain: &DomainSpec, zeta: Complex64) -> Prepared {
    Prepared {
        z: domain.psi(zeta),
        zeta,
        dphi: domain.phi_prime_at_pullback(zeta),
    }
}

/// Prepare a domain point given its Omega coordinate (runs the inversion).
pub fn prepare(domain: &DomainSpec, z: Complex64) -> Result<Prepared> {
    let zeta = domain.forward(z)?;
    Ok(Prepared {
        z,
        zeta,
        dphi: domain.phi_prime_at_pullback(zeta),
    })
}

#[inline]
fn mobius(z: Complex64, w: Complex64) -> Complex64 {
    (w - z) / (Complex64::new(1.0, 0.0) - z * w.conj())
}

#[inline]
pub(crate) fn k_disc(z: Complex64, w: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    (w.norm_sqr() - 1.0) / (std::f64::consts::PI * (one - z * w.conj()) * (w - z))
}

#[inline]
pub(crate) fn bergman_disc(z: Complex64, w: Complex64) -> Complex64 {
    let d = Complex64::new(1.0, 0.0) - z * w.conj();
    Complex64::new(1.0 / std::f64::consts::PI, 0.0) / (d * d)
}

/// `G(z, w)` on prepared points; negative and symmetric on the interior.
pub fn green_prepared(a: &Prepared, b: &Prepared) -> Result<f64> {
    if (a.z - b.z).norm() < COINCIDENCE_GUARD {
        return Err(Error::CoincidentPoints);
    }
    Ok(2.0 / std::f64::consts::PI * mobius(a.zeta, b.zeta).norm().ln())
}

/// `k(z, w) = dG/dz`; the chain rule contributes `phi'(z)` on conformal images.
pub fn k_prepared(a: &Prepared, b: &Prepared) -> Result<Complex64> {
    if (a.z - b.z).norm() < COINCIDENCE_GUARD {
        return Err(Error::CoincidentPoints);
    }
    Ok(a.dphi * k_disc(a.zeta, b.zeta))
}

/// Bergman kernel; Hermitian, smooth on interior x interior.
pub fn bergman_prepared(a: &Prepared, b: &Prepared) -> Complex64 {
    a.dphi * b.dphi.conj() * bergman_disc(a.zeta, b.zeta)
}

/// `dk/dw = d^2 G / dz dw` (the holomorphic second derivative, for probes).
pub fn dk_dw_prepared(a: &Prepared, b: &Prepared) -> Result<Complex64> {
    if (a.z - b.z).norm() < COINCIDENCE_GUARD {
        return Err(Error::CoincidentPoints);
    }
    let d = b.zeta - a.zeta;
    Ok(a.dphi * b.dphi / (std::f64::consts::PI * d * d))
}

/// `(h, H)` of one slot pair: `h = (w - z) k(z, w)` and
/// `H = |w - z|^2 dk/dwbar = |w - z|^2 K(z, w)`.
pub fn h_h_prepared(a: &Prepared, b: &Prepared) -> Result<(Complex64, Complex64)> {
    let d = b.z - a.z;
    if d.norm() < COINCIDENCE_GUARD {
        return Err(Error::CoincidentPoints);
    }
    let k = k_prepared(a, b)?;
    let big_k = bergman_prepared(a, b);
    Ok((d * k, big_k * d.norm_sqr()))
}

// ---- public Omega-coordinate wrappers -------------------------------------

/// Green's function `G_Omega(z, w)`.
pub fn green(domain: &DomainSpec, z: Complex64, w: Complex64) -> Result<f64> {
    green_prepared(&prepare(domain, z)?, &prepare(domain, w)?)
}

/// Derivative kernel `k(z, w) = dG_Omega/dz`.
pub fn k_kernel(domain: &DomainSpec, z: Complex64, w: Complex64) -> Result<Complex64> {
    k_prepared(&prepare(domain, z)?, &prepare(domain, w)?)
}

/// Bergman kernel `K(z, w)`.
pub fn bergman_kernel(domain: &DomainSpec, z: Complex64, w: Complex64) -> Result<Complex64> {
    Ok(bergman_prepared(&prepare(domain, z)?, &prepare(domain, w)?))
}

/// `(h, H)` for one slot pair in Omega coordinates.
pub fn h_h_kernels(domain: &DomainSpec, z: Complex64, w: Complex64) -> Result<(Complex64, Complex64)> {
    h_h_prepared(&prepare(domain, z)?, &prepare(domain, w)?)
}

/// `tau_{i,j}(z, w) = |w_i - z_i|^2 + |w_j - z_j|^2`.
pub fn tau(i: usize, j: usize, z: &[Complex64], w: &[Complex64]) -> f64 {
    (w[i] - z[i]).norm_sqr() + (w[j] - z[j]).norm_sqr()
}

fn check_slots(n: usize, idx: &[usize]) -> Result<()> {
    let mut seen = [false; 8];
    for &i in idx {
        if i >= n {
            return Err(Error::BadIndices(format!("slot {i} out of range for dimension {n}")));
        }
        if seen[i] {
            return Err(Error::BadIndices(format!("slot {i} repeated")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// `b^{i,j}(z, w) = h(z_j, w_j) |w_i - z_i|^2 / tau^2 + H(z_j, w_j) / tau`,
/// the `dwbar_j` derivative of `|w_j - z_j|^2 k(z_j, w_j) / tau_{i,j}` in
/// closed form. Active slot: `j`.
pub fn b_kernel(
    domain: &DomainSpec,
    i: usize,
    j: usize,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64> {
    check_slots(z.len().min(w.len()), &[i, j])?;
    let t = tau(i, j, z, w);
    if t < COINCIDENCE_GUARD * COINCIDENCE_GUARD {
        return Err(Error::CoincidentPoints);
    }
    let (h, big_h) = h_h_kernels(domain, z[j], w[j])?;
    let si = (w[i] - z[i]).norm_sqr();
    Ok(h * si / (t * t) + big_h / t)
}

/// `db^{j,i}/dwbar_j` in closed form: the passive-slot derivative of `b^{j,i}`.
pub fn db_dwbar(
    domain: &DomainSpec,
    j: usize,
    i: usize,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64> {
    check_slots(z.len().min(w.len()), &[i, j])?;
    let t = tau(i, j, z, w);
    if t < COINCIDENCE_GUARD * COINCIDENCE_GUARD {
        return Err(Error::CoincidentPoints);
    }
    let (h, big_h) = h_h_kernels(domain, z[i], w[i])?;
    let d = w[j] - z[j];
    let si = (w[i] - z[i]).norm_sqr();
    let sj = d.norm_sqr();
    Ok(h * d * (si - sj) / (t * t * t) - big_h * d / (t * t))
}

/// `a^{j,i} = |w_j - z_j|^2 k(z_j, w_j) db^{j,i}/dwbar_j`.
pub fn a_kernel(
    domain: &DomainSpec,
    j: usize,
    i: usize,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64> {
    let sj = (w[j] - z[j]).norm_sqr();
    let k = k_kernel(domain, z[j], w[j])?;
    Ok(k * sj * db_dwbar(domain, j, i, z, w)?)
}

/// Composite `a^{1,k,0}`-type kernel (0-based slots `(1, k, 0)`):
/// `k(z_1, w_1) |w_1 - z_1|^2 a^{k,0} (z_1 - w_1) / tau_{k,1}^2`.
pub fn a_kernel_composite(
    domain: &DomainSpec,
    k_slot: usize,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64> {
    check_slots(z.len().min(w.len()), &[0, 1, k_slot])?;
    let k1 = k_kernel(domain, z[1], w[1])?;
    let s1 = (w[1] - z[1]).norm_sqr();
    let a = a_kernel(domain, k_slot, 0, z, w)?;
    let t = tau(k_slot, 1, z, w);
    Ok(k1 * s1 * a * (z[1] - w[1]) / (t * t))
}

/// The explicit composite kernels of the two-slot decomposition:
/// `E^l = k(z_l, w_l) b^{l, other}` for `l` in `{0, 1}`.
pub fn e_kernel_n2(
    domain: &DomainSpec,
    l: usize,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64> {
    if l > 1 || z.len() < 2 || w.len() < 2 {
        return Err(Error::BadIndices(format!("e_kernel_n2 needs l in {{0,1}}, got {l}")));
    }
    let other = 1 - l;
    let k = k_kernel(domain, z[l], w[l])?;
    Ok(k * b_kernel(domain, l, other, z, w)?)
}

/// The composite kernels of the three-slot decomposition, keyed by the slot
/// `l` the outer `T` acts in and the integrated index set `i_set`
/// (`|i_set|` in `{1, 2}`), for the canonical slot ordering `(0, 1, 2)`:
///
/// - `|I| = 1`: `k(z_l, w_l) b^{l,i}`;
/// - `l = 1, I = {0, 2}`: `k(z_1, w_1) b^{1,0} b^{1,2}`;
/// - `l = 2, I = {0, 1}`: `k(z_2, w_2) b^{2,0} b^{2,1}`;
/// - `l = 0, I = {1, 2}`: the combined four-term kernel
///   `k(z_0, w_0) [b^{0,1} b^{1,2} + b^{0,2} b^{2,1} + a^{1,2}/tau_{0,1} + a^{2,1}/tau_{0,2}]`.
pub fn e_kernel_n3(
    domain: &DomainSpec,
    l: usize,
    i_set: &[usize],
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64> {
    if z.len() < 3 || w.len() < 3 {
        return Err(Error::DimensionMismatch("e_kernel_n3 needs 3-slot points".into()));
    }
    let mut idx = vec![l];
    idx.extend_from_slice(i_set);
    check_slots(3, &idx)?;
    let k = k_kernel(domain, z[l], w[l])?;
    match i_set.len() {
        1 => Ok(k * b_kernel(domain, l, i_set[0], z, w)?),
        2 => {
            let (lo, hi) = (i_set[0].min(i_set[1]), i_set[0].max(i_set[1]));
            match (l, lo, hi) {
                (1, 0, 2) => Ok(k * b_kernel(domain, 1, 0, z, w)? * b_kernel(domain, 1, 2, z, w)?),
                (2, 0, 1) => Ok(k * b_kernel(domain, 2, 0, z, w)? * b_kernel(domain, 2, 1, z, w)?),
                (0, 1, 2) => {
                    let t01 = tau(0, 1, z, w);
                    let t02 = tau(0, 2, z, w);
                    let sum = b_kernel(domain, 0, 1, z, w)? * b_kernel(domain, 1, 2, z, w)?
                        + b_kernel(domain, 0, 2, z, w)? * b_kernel(domain, 2, 1, z, w)?
                        + a_kernel(domain, 1, 2, z, w)? / t01
                        + a_kernel(domain, 2, 1, z, w)? / t02;
                    Ok(k * sum)
                }
                _ => Err(Error::BadIndices(format!(
                    "no |I|=2 composite kernel for l={l}, I={i_set:?} in the (0,1,2) ordering"
                ))),
            }
        }
        _ => Err(Error::BadIndices("i_set must have one or two entries".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const PI: f64 = std::f64::consts::PI;

    fn rand_interior(rng: &mut ChaCha8Rng, rmax: f64) -> Complex64 {
        // uniform by area on |z| <= rmax
        let r = rmax * rng.gen::<f64>().sqrt();
        let th = 2.0 * PI * rng.gen::<f64>();
        Complex64::from_polar(r, th)
    }

    #[test]
    fn green_disc_values() {
        let d = DomainSpec::UnitDisc;
        let v = green(&d, Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(v, 0.25f64.ln() / PI, epsilon = 1e-14);
        // symmetry and negativity at random pairs
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let z = rand_interior(&mut rng, 0.98);
            let w = rand_interior(&mut rng, 0.98);
            if (z - w).norm() < 1e-3 {
                continue;
            }
            let a = green(&d, z, w).unwrap();
            let b = green(&d, w, z).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
            assert!(a < 0.0);
        }
        // vanishing boundary values
        let z = Complex64::new(0.3, 0.1);
        let mut prev = green(&d, z, Complex64::new(0.9, 0.0)).unwrap().abs();
        for rr in [0.99, 0.999, 0.9999] {
            let g = green(&d, z, Complex64::new(rr, 0.0)).unwrap().abs();
            assert!(g < prev);
            prev = g;
        }
        assert!(prev < 1e-3);
        assert!(green(&d, z, z).is_err());
    }

    #[test]
    fn k_disc_value_and_forms_agree() {
        let d = DomainSpec::UnitDisc;
        let v = k_kernel(&d, Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(v.re, (0.5 - 2.0) / PI, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
        // Mobius-quotient form equals the naive two-term form
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let z = rand_interior(&mut rng, 0.95);
            let w = rand_interior(&mut rng, 0.999);
            if (z - w).norm() < 1e-6 {
                continue;
            }
            let naive = (w.conj() / (Complex64::new(1.0, 0.0) - z * w.conj())
                - Complex64::new(1.0, 0.0) / (w - z))
                / PI;
            assert!((k_disc(z, w) - naive).norm() < 1e-11 * (1.0 + naive.norm()));
        }
    }

    /// finite-difference gradient of `green` as an independent oracle for `k`
    fn k_fd(dom: &DomainSpec, z: Complex64, w: Complex64) -> Complex64 {
        let h = 1e-6;
        let gx = (green(dom, z + h, w).unwrap() - green(dom, z - h, w).unwrap()) / (2.0 * h);
        let gy = (green(dom, z + Complex64::new(0.0, h), w).unwrap()
            - green(dom, z - Complex64::new(0.0, h), w).unwrap())
            / (2.0 * h);
        Complex64::new(gx, -gy) * 0.5
    }

    #[test]
    fn k_matches_finite_differences_of_green() {
        for dom in [
            DomainSpec::UnitDisc,
            DomainSpec::quadratic(Complex64::new(0.25, 0.1)).unwrap(),
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..300 {
                let z = rand_interior(&mut rng, 0.85);
                let w = rand_interior(&mut rng, 0.85);
                if (z - w).norm() < 0.05 {
                    continue;
                }
                let zz = dom.psi(z);
                let ww = dom.psi(w);
                let exact = k_kernel(&dom, zz, ww).unwrap();
                let fd = k_fd(&dom, zz, ww);
                assert!(
                    (exact - fd).norm() <= 1e-6 * exact.norm().max(1.0),
                    "k vs FD mismatch: {exact} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn k_times_distance_bounded() {
        let d = DomainSpec::UnitDisc;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut sup: f64 = 0.0;
        for _ in 0..5000 {
            let z = rand_interior(&mut rng, 0.999);
            let w = rand_interior(&mut rng, 0.999);
            if (z - w).norm() < 1e-9 {
                continue;
            }
            sup = sup.max(k_kernel(&d, z, w).unwrap().norm() * (z - w).norm());
        }
        assert!(sup.is_finite() && sup < 1.0, "sup |k| |z-w| = {sup}");
    }

    #[test]
    fn bergman_values_and_symmetry() {
        let d = DomainSpec::UnitDisc;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let w = rand_interior(&mut rng, 0.98);
            let v = bergman_kernel(&d, Complex64::new(0.0, 0.0), w).unwrap();
            assert!((v - Complex64::new(1.0 / PI, 0.0)).norm() < 1e-14);
            let z = rand_interior(&mut rng, 0.98);
            let a = bergman_kernel(&d, z, w).unwrap();
            let b = bergman_kernel(&d, w, z).unwrap();
            assert!((a - b.conj()).norm() < 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn bergman_reproduces_monomials() {
        let d = DomainSpec::UnitDisc;
        let grid = crate::geometry::make_disc_grid(48, 192, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for m in 0..=4u32 {
            for _ in 0..5 {
                let z = rand_interior(&mut rng, 0.9);
                let mut acc = Complex64::new(0.0, 0.0);
                for (&w, &wt) in grid.nodes.iter().zip(&grid.weights) {
                    acc += bergman_kernel(&d, z, w).unwrap() * w.powu(m) * wt;
                }
                assert!((acc - z.powu(m)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn h_h_values_and_diagonal_limit() {
        let d = DomainSpec::UnitDisc;
        let (h, big_h) = h_h_kernels(&d, Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(h.re, 0.5 * (-1.5 / PI), epsilon = 1e-14);
        assert_abs_diff_eq!(big_h.re, 0.25 / PI, epsilon = 1e-14);
        // h -> -1/pi along a shrinking sequence
        let z = Complex64::new(0.3, -0.2);
        for (i, step) in [1e-2, 1e-4, 1e-6].iter().enumerate() {
            let (h, _) = h_h_kernels(&d, z, z + step).unwrap();
            assert!((h - Complex64::new(-1.0 / PI, 0.0)).norm() < 10.0_f64.powi(-(i as i32) - 1));
        }
        // |h| + |H| bounded over dense interior samples
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut sup: f64 = 0.0;
        for _ in 0..5000 {
            let z = rand_interior(&mut rng, 0.999);
            let w = rand_interior(&mut rng, 0.999);
            if (z - w).norm() < 1e-9 {
                continue;
            }
            let (h, big_h) = h_h_kernels(&d, z, w).unwrap();
            sup = sup.max(h.norm() + big_h.norm());
        }
        assert!(sup.is_finite() && sup < 2.0, "sup |h|+|H| = {sup}");
    }

    #[test]
    fn h_bergman_identity_from_finite_differences() {
        // H/|w-z|^2 = dk/dwbar: validate the closed form against central
        // differences of k in wbar, on the disc and a conformal image.
        for dom in [
            DomainSpec::UnitDisc,
            DomainSpec::quadratic(Complex64::new(0.2, -0.15)).unwrap(),
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            let h = 1e-5;
            for _ in 0..120 {
                let z = dom.psi(rand_interior(&mut rng, 0.8));
                let w = dom.psi(rand_interior(&mut rng, 0.8));
                if (z - w).norm() < 0.1 {
                    continue;
                }
                let kx = (k_kernel(&dom, z, w + h).unwrap() - k_kernel(&dom, z, w - h).unwrap())
                    / (2.0 * h);
                let ky = (k_kernel(&dom, z, w + Complex64::new(0.0, h)).unwrap()
                    - k_kernel(&dom, z, w - Complex64::new(0.0, h)).unwrap())
                    / (2.0 * h);
                let fd = (kx + Complex64::new(0.0, 1.0) * ky) * 0.5;
                let exact = bergman_kernel(&dom, z, w).unwrap();
                assert!((fd - exact).norm() < 1e-5 * (1.0 + exact.norm()));
            }
        }
    }

    fn rand_pair(rng: &mut ChaCha8Rng, n: usize, rmax: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let z: Vec<_> = (0..n).map(|_| rand_interior(rng, rmax)).collect();
        let w: Vec<_> = (0..n).map(|_| rand_interior(rng, rmax)).collect();
        (z, w)
    }

    #[test]
    fn b_kernel_bound_and_degenerate_slot() {
        let d = DomainSpec::UnitDisc;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut sup: f64 = 0.0;
        for _ in 0..5000 {
            let (z, w) = rand_pair(&mut rng, 2, 0.995);
            if (w[1] - z[1]).norm() < 1e-8 {
                continue;
            }
            let b = b_kernel(&d, 0, 1, &z, &w).unwrap();
            sup = sup.max(b.norm() * tau(0, 1, &z, &w));
        }
        assert!(sup.is_finite() && sup < 2.0, "sup tau |b| = {sup}");

        // w_i = z_i: b^{i,j} = H / tau exactly
        let (mut z, w) = rand_pair(&mut rng, 2, 0.9);
        z[0] = w[0];
        let t = tau(0, 1, &z, &w);
        let (_, big_h) = h_h_kernels(&d, z[1], w[1]).unwrap();
        let b = b_kernel(&d, 0, 1, &z, &w).unwrap();
        assert!((b - big_h / t).norm() < 1e-14);
    }

    #[test]
    fn db_dwbar_matches_finite_differences() {
        let d = DomainSpec::UnitDisc;
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = 1e-6;
        for _ in 0..200 {
            let (z, w) = rand_pair(&mut rng, 2, 0.8);
            if (w[0] - z[0]).norm() < 0.1 || (w[1] - z[1]).norm() < 0.1 {
                continue;
            }
            // b^{j,i} with j=1, i=0: differentiate in wbar_1
            let f = |w1: Complex64| {
                let ww = vec![w[0], w1];
                b_kernel(&d, 1, 0, &z, &ww).unwrap()
            };
            let dx = (f(w[1] + h) - f(w[1] - h)) / (2.0 * h);
            let dy = (f(w[1] + Complex64::new(0.0, h)) - f(w[1] - Complex64::new(0.0, h))) / (2.0 * h);
            let fd = (dx + Complex64::new(0.0, 1.0) * dy) * 0.5;
            let exact = db_dwbar(&d, 1, 0, &z, &w).unwrap();
            assert!(
                (fd - exact).norm() < 1e-5 * (1.0 + exact.norm()),
                "db/dwbar FD mismatch: {exact} vs {fd}"
            );
        }
    }

    #[test]
    fn db_dwbar_bound() {
        let d = DomainSpec::UnitDisc;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sup: f64 = 0.0;
        for _ in 0..5000 {
            let (z, w) = rand_pair(&mut rng, 2, 0.995);
            if (w[0] - z[0]).norm() < 1e-8 || (w[1] - z[1]).norm() < 1e-8 {
                continue;
            }
            let t = tau(0, 1, &z, &w);
            let v = db_dwbar(&d, 1, 0, &z, &w).unwrap();
            sup = sup.max(v.norm() * t * t / (w[1] - z[1]).norm());
        }
        assert!(sup.is_finite() && sup < 3.0, "sup tau^2 |db|/|wj-zj| = {sup}");
    }

    #[test]
    fn a_kernel_bound_and_radial_decay() {
        let d = DomainSpec::UnitDisc;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut sup: f64 = 0.0;
        for _ in 0..5000 {
            let (z, w) = rand_pair(&mut rng, 2, 0.995);
            if (w[1] - z[1]).norm() < 1e-8 {
                continue;
            }
            let a = a_kernel(&d, 1, 0, &z, &w).unwrap();
            sup = sup.max(a.norm() * tau(0, 1, &z, &w));
        }
        assert!(sup.is_finite() && sup < 3.0, "sup tau |a| = {sup}");

        // radial approach in the active slot: a^{j,i} -> 0 like
        // |w_j - z_j|^2 / tau^2 with a bounded ratio
        let z = vec![Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.4)];
        let w0 = z[0] + Complex64::from_polar(0.5, 1.3);
        let dir = Complex64::from_polar(1.0, 0.7);
        let mut prev = f64::INFINITY;
        for t in [1e-1, 1e-2, 1e-3] {
            let w = vec![w0, z[1] + dir * t];
            let a = a_kernel(&d, 1, 0, &z, &w).unwrap();
            assert!(a.norm() < prev);
            prev = a.norm();
            let sj = (w[1] - z[1]).norm_sqr();
            let tt = tau(0, 1, &z, &w);
            assert!(a.norm() / (sj / (tt * tt)) < 3.0);
        }
    }

    #[test]
    fn a_composite_bound() {
        let d = DomainSpec::UnitDisc;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut sup: f64 = 0.0;
        for _ in 0..5000 {
            let (z, w) = rand_pair(&mut rng, 3, 0.99);
            if (w[0] - z[0]).norm() < 1e-6
                || (w[1] - z[1]).norm() < 1e-6
                || (w[2] - z[2]).norm() < 1e-6
            {
                continue;
            }
            let v = a_kernel_composite(&d, 2, &z, &w).unwrap();
            sup = sup.max(v.norm() * tau(2, 0, &z, &w) * tau(2, 1, &z, &w));
        }
        assert!(sup.is_finite() && sup < 10.0, "sup tau tau |a_composite| = {sup}");
    }

    #[test]
    fn product_rule_identity_3_16() {
        // d/dwbar_j [ b^{j,i} |w_j-z_j|^2 k_j / tau_{j,k} ] = b^{j,i} b^{k,j} + a^{j,i}/tau_{j,k}
        // checked by finite differences, slots (j, i, k) = (1, 0, 2)
        let d = DomainSpec::UnitDisc;
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let h = 1e-6;
        for _ in 0..120 {
            let (z, w) = rand_pair(&mut rng, 3, 0.7);
            if (w[0] - z[0]).norm() < 0.15
                || (w[1] - z[1]).norm() < 0.15
                || (w[2] - z[2]).norm() < 0.15
            {
                continue;
            }
            let f = |w1: Complex64| {
                let ww = vec![w[0], w1, w[2]];
                let b = b_kernel(&d, 1, 0, &z, &ww).unwrap();
                let k = k_kernel(&d, z[1], w1).unwrap();
                b * (w1 - z[1]).norm_sqr() * k / tau(1, 2, &z, &ww)
            };
            let dx = (f(w[1] + h) - f(w[1] - h)) / (2.0 * h);
            let dy = (f(w[1] + Complex64::new(0.0, h)) - f(w[1] - Complex64::new(0.0, h))) / (2.0 * h);
            let fd = (dx + Complex64::new(0.0, 1.0) * dy) * 0.5;
            let rhs = b_kernel(&d, 1, 0, &z, &w).unwrap() * b_kernel(&d, 2, 1, &z, &w).unwrap()
                + a_kernel(&d, 1, 0, &z, &w).unwrap() / tau(1, 2, &z, &w);
            assert!(
                (fd - rhs).norm() < 2e-4 * (1.0 + rhs.norm()),
                "(3.16) mismatch: {rhs} vs {fd}"
            );
        }
    }

    #[test]
    fn e_kernels_definition_and_bounds() {
        let d = DomainSpec::UnitDisc;
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let eps = 0.25;
        let mut sup2: f64 = 0.0;
        for _ in 0..5000 {
            let (z, w) = rand_pair(&mut rng, 2, 0.99);
            if (w[0] - z[0]).norm() < 1e-6 || (w[1] - z[1]).norm() < 1e-6 {
                continue;
            }
            // definition: E^1 (0-based l=1) = k(z_1, w_1) b^{1,0}
            let e = e_kernel_n2(&d, 1, &z, &w).unwrap();
            let prod = k_kernel(&d, z[1], w[1]).unwrap() * b_kernel(&d, 1, 0, &z, &w).unwrap();
            assert!((e - prod).norm() < 1e-13 * (1.0 + prod.norm()));
            sup2 = sup2.max(
                e.norm() * (w[1] - z[1]).norm().powf(1.0 + eps) * (w[0] - z[0]).norm().powf(2.0 - eps),
            );
        }
        assert!(sup2.is_finite() && sup2 < 2.0, "E^1_0 bound: {sup2}");

        // Young-type inequality used by the bound probes
        for _ in 0..1000 {
            let a: f64 = rng.gen::<f64>() * 3.0;
            let b: f64 = rng.gen::<f64>() * 3.0;
            assert!(a.powf(eps) * b.powf(2.0 - eps) <= a * a + b * b + 1e-12);
        }

        let mut sup3: f64 = 0.0;
        for _ in 0..5000 {
            let (z, w) = rand_pair(&mut rng, 3, 0.99);
            if [0, 1, 2].iter().any(|&s| (w[s] - z[s]).norm() < 1e-6) {
                continue;
            }
            // l=1, I={0,2}: |E| * |w_1-z_1|^{1+2eps} * prod |w_i-z_i|^{2-eps} bounded
            let e = e_kernel_n3(&d, 1, &[0, 2], &z, &w).unwrap();
            let v = e.norm()
                * (w[1] - z[1]).norm().powf(1.0 + 2.0 * eps)
                * (w[0] - z[0]).norm().powf(2.0 - eps)
                * (w[2] - z[2]).norm().powf(2.0 - eps);
            sup3 = sup3.max(v);
        }
        assert!(sup3.is_finite() && sup3 < 2.0, "E^1_{{0,2}} bound: {sup3}");

        // index clashes rejected
        assert!(e_kernel_n3(&d, 1, &[1], &[Complex64::default(); 3], &[Complex64::new(0.5, 0.0); 3]).is_err());
    }

    #[test]
    fn green_estimate_probes() {
        // Theorem-type bounds (planar case): sampled suprema all finite, on
        // the disc and on a conformal image.
        for dom in [
            DomainSpec::UnitDisc,
            DomainSpec::quadratic(Complex64::new(0.25, 0.0)).unwrap(),
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(16);
            let mut s = [0.0f64; 5];
            for _ in 0..4000 {
                let x = dom.psi(rand_interior(&mut rng, 0.999));
                let y = dom.psi(rand_interior(&mut rng, 0.999));
                if (x - y).norm() < 1e-7 {
                    continue;
                }
                let dx = dom.boundary_distance(x);
                let dy = dom.boundary_distance(y);
                let g = green(&dom, x, y).unwrap().abs();
                let grad = 2.0 * k_kernel(&dom, x, y).unwrap().norm();
                let grad2 = 2.0
                    * (dk_dw_prepared(&prepare(&dom, x).unwrap(), &prepare(&dom, y).unwrap())
                        .unwrap()
                        .norm()
                        + bergman_kernel(&dom, x, y).unwrap().norm());
                let r = (x - y).norm();
                s[0] = s[0].max(g * r / dx);
                s[1] = s[1].max(g * r * r / (dx * dy));
                s[2] = s[2].max(grad * r);
                s[3] = s[3].max(grad * r * r / dy);
                s[4] = s[4].max(grad2 * r * r);
            }
            for (i, v) in s.iter().enumerate() {
                assert!(v.is_finite() && *v < 20.0, "probe {i} unbounded: {v}");
            }
        }
    }
}
