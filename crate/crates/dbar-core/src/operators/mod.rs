//! The integral operators of the solver: the canonical solution operator
//! `T[f](z) = int k(z,w) f(w) dA(w)`, the Bergman projection
//! `P[f](z) = int K(z,w) f(w) dA(w)`, their slotwise product-domain variants,
//! and the composite operators built from the `b`/`a` kernels.
//!
//! `T` is singular; it is realized by singularity subtraction against the
//! exact `T[1]`:
//!
//! ```text
//! T[f](z) = int k(z,w) (f(w) - f(z)) dA(w) + f(z) T[1](z)
//! ```
//!
//! with `T[1] = zbar` on the disc and, on conformal images, `T[1]` composed
//! from the monomial oracle applied to the Jacobian polynomial. A separate
//! angular-mode-split integrator provides an independent spectrally-accurate
//! route used for validation.

pub mod composite;

use crate::fields::{CMatrix, MonomialField, ScalarField};
use crate::geometry::{DomainSpec, EvalSet, FactorGrid};
use crate::kernels::{bergman_prepared, k_prepared, prepare_pullback, Prepared};
use crate::{Complex64, Error, Result};
use rayon::prelude::*;
use rustfft::FftPlanner;

/// Precomputed kernel tables for one slot: every slot of the product domain
/// shares the same rule, so a single engine serves all slots.
pub struct SlotEngine {
    pub domain: DomainSpec,
    pub quad: FactorGrid,
    pub eval: EvalSet,
    /// quadrature nodes in Omega coordinates
    pub q_omega: Vec<Complex64>,
    /// quadrature weights on Omega (disc weight times |psi'|^2)
    pub q_w: Vec<f64>,
    /// evaluation points in Omega coordinates
    pub e_omega: Vec<Complex64>,
    /// exact T[1] at the evaluation points
    pub t1_e: Vec<Complex64>,
    /// k(z_e, w_q), Omega kernel, E x Q
    pub k_eq: CMatrix,
    /// K(z_e, w_q), E x Q
    pub kk_eq: CMatrix,
    /// h(z_e, w_q), E x Q
    pub h_eq: CMatrix,
    /// H(z_e, w_q), E x Q
    pub bigh_eq: CMatrix,
    /// |w_q - z_e|^2 in Omega coordinates, E x Q flattened
    pub rho_eq: Vec<f64>,
    /// row sums sum_q w_q k(z_e, w_q)
    pub rowsum_e: Vec<Complex64>,
    prepared_q: Vec<Prepared>,
    prepared_e: Vec<Prepared>,
}

/// `|psi'(zeta)|^2` as a polynomial in `(zeta, zetabar)`.
fn jacobian_polynomial(domain: &DomainSpec) -> MonomialField {
    match domain {
        DomainSpec::UnitDisc => MonomialField::constant(1, Complex64::new(1.0, 0.0)),
        DomainSpec::Conformal { psi } => {
            let mut dpsi = MonomialField::zero(1);
            for (k, &c) in psi.iter().enumerate() {
                let mut t = MonomialField::zero(1);
                t.add_term(vec![(k as u32, 0)], c * (k as f64 + 1.0));
                dpsi = dpsi.add(&t);
            }
            let mut dpsi_conj = MonomialField::zero(1);
            for (e, &c) in dpsi.terms() {
                dpsi_conj.add_term(vec![(e[0].1, e[0].0)], c.conj());
            }
            dpsi.mul(&dpsi_conj)
        }
    }
}

/// Exact `T[1]` at a point given by its disc coordinate: `zbar` on the disc,
/// `phi'(z) T_D[|psi'|^2](zeta)` on conformal images (monomial oracle).
pub fn t_one(domain: &DomainSpec, zeta: Complex64) -> Complex64 {
    match domain {
        DomainSpec::UnitDisc => zeta.conj(),
        DomainSpec::Conformal { .. } => {
            let jac = jacobian_polynomial(domain);
            let tj = jac.t_slot(0);
            domain.phi_prime_at_pullback(zeta) * tj.eval(&[zeta])
        }
    }
}

impl SlotEngine {
    pub fn new(domain: &DomainSpec, quad: &FactorGrid, eval: &EvalSet) -> Result<Self> {
        let prepared_q: Vec<Prepared> = quad
            .nodes
            .iter()
            .map(|&zeta| prepare_pullback(domain, zeta))
            .collect();
        let prepared_e: Vec<Prepared> = eval
            .points
            .iter()
            .map(|&zeta| prepare_pullback(domain, zeta))
            .collect();
        let q_omega: Vec<Complex64> = prepared_q.iter().map(|p| p.z).collect();
        let e_omega: Vec<Complex64> = prepared_e.iter().map(|p| p.z).collect();
        let q_w: Vec<f64> = quad
            .weights
            .iter()
            .zip(&prepared_q)
            .map(|(&w, p)| w / p.dphi.norm_sqr())
            .collect();
        let ne = eval.len();
        let nq = quad.len();
        let mut k_eq = CMatrix::zeros(ne, nq);
        let mut kk_eq = CMatrix::zeros(ne, nq);
        let mut h_eq = CMatrix::zeros(ne, nq);
        let mut bigh_eq = CMatrix::zeros(ne, nq);
        let mut rho_eq = vec![0.0f64; ne * nq];
        let rows: Vec<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, Vec<f64>)> =
            (0..ne)
                .into_par_iter()
                .map(|ie| {
                    let pe = &prepared_e[ie];
                    let mut kr = Vec::with_capacity(nq);
                    let mut kkr = Vec::with_capacity(nq);
                    let mut hr = Vec::with_capacity(nq);
                    let mut bhr = Vec::with_capacity(nq);
                    let mut rr = Vec::with_capacity(nq);
                    for pq in &prepared_q {
                        let k = k_prepared(pe, pq).expect("disjoint node sets");
                        let kk = bergman_prepared(pe, pq);
                        let d = pq.z - pe.z;
                        kr.push(k);
                        kkr.push(kk);
                        hr.push(d * k);
                        bhr.push(kk * d.norm_sqr());
                        rr.push(d.norm_sqr());
                    }
                    (kr, kkr, hr, bhr, rr)
                })
                .collect();
        for (ie, (kr, kkr, hr, bhr, rr)) in rows.into_iter().enumerate() {
            for iq in 0..nq {
                k_eq.set(ie, iq, kr[iq]);
                kk_eq.set(ie, iq, kkr[iq]);
                h_eq.set(ie, iq, hr[iq]);
                bigh_eq.set(ie, iq, bhr[iq]);
                rho_eq[ie * nq + iq] = rr[iq];
            }
        }
        let rowsum_e: Vec<Complex64> = (0..ne)
            .map(|ie| {
                k_eq.row(ie)
                    .iter()
                    .zip(&q_w)
                    .fold(Complex64::new(0.0, 0.0), |acc, (&k, &w)| acc + k * w)
            })
            .collect();
        let t1_e: Vec<Complex64> = eval.points.iter().map(|&z| t_one(domain, z)).collect();
        Ok(SlotEngine {
            domain: domain.clone(),
            quad: quad.clone(),
            eval: eval.clone(),
            q_omega,
            q_w,
            e_omega,
            t1_e,
            k_eq,
            kk_eq,
            h_eq,
            bigh_eq,
            rho_eq,
            rowsum_e,
            prepared_q,
            prepared_e,
        })
    }

    pub fn nq(&self) -> usize {
        self.quad.len()
    }

    pub fn ne(&self) -> usize {
        self.eval.len()
    }

    /// Sampling points for one slot axis: quadrature nodes then evaluation
    /// points, in Omega coordinates.
    pub fn points_qe(&self) -> Vec<Complex64> {
        let mut v = self.q_omega.clone();
        v.extend_from_slice(&self.e_omega);
        v
    }

    /// The subtracted-T slot matrix over a `Q + E` axis: target `e` row holds
    /// `w_q k(z_e, w_q)` on the quadrature block and
    /// `T[1](z_e) - sum_q w_q k(z_e, w_q)` on its own evaluation column.
    pub fn t_matrix(&self) -> CMatrix {
        let (ne, nq) = (self.ne(), self.nq());
        let mut m = CMatrix::zeros(ne, nq + ne);
        for ie in 0..ne {
            for iq in 0..nq {
                m.set(ie, iq, self.k_eq.get(ie, iq) * self.q_w[iq]);
            }
            m.set(ie, nq + ie, self.t1_e[ie] - self.rowsum_e[ie]);
        }
        m
    }

    /// The Bergman-projection slot matrix over a `Q + E` axis (evaluation
    /// columns are zero: `K` is smooth, so no subtraction is needed).
    pub fn p_matrix(&self) -> CMatrix {
        let (ne, nq) = (self.ne(), self.nq());
        let mut m = CMatrix::zeros(ne, nq + ne);
        for ie in 0..ne {
            for iq in 0..nq {
                m.set(ie, iq, self.kk_eq.get(ie, iq) * self.q_w[iq]);
            }
        }
        m
    }

    /// `T[f]` at the evaluation points from samples at quadrature nodes and
    /// evaluation points.
    pub fn t_apply_samples(&self, f_q: &[Complex64], f_e: &[Complex64]) -> Vec<Complex64> {
        (0..self.ne())
            .map(|ie| {
                let mut acc = Complex64::new(0.0, 0.0);
                for iq in 0..self.nq() {
                    acc += self.k_eq.get(ie, iq) * self.q_w[iq] * (f_q[iq] - f_e[ie]);
                }
                acc + f_e[ie] * self.t1_e[ie]
            })
            .collect()
    }

    /// `P[f]` at the evaluation points from samples at quadrature nodes.
    pub fn p_apply_samples(&self, f_q: &[Complex64]) -> Vec<Complex64> {
        (0..self.ne())
            .map(|ie| {
                let mut acc = Complex64::new(0.0, 0.0);
                for iq in 0..self.nq() {
                    acc += self.kk_eq.get(ie, iq) * self.q_w[iq] * f_q[iq];
                }
                acc
            })
            .collect()
    }

    /// `T[f]` at arbitrary prepared targets (used for full-grid targets in
    /// the orthogonality checks). `f_t` are samples at the targets.
    pub fn t_apply_at(
        &self,
        targets: &[Prepared],
        f_q: &[Complex64],
        f_t: &[Complex64],
    ) -> Vec<Complex64> {
        targets
            .par_iter()
            .enumerate()
            .map(|(it, pt)| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (iq, pq) in self.prepared_q.iter().enumerate() {
                    if (pt.z - pq.z).norm() < 1e-12 {
                        continue; // coincident node: subtracted integrand vanishes
                    }
                    let k = k_prepared(pt, pq).expect("guarded");
                    acc += k * self.q_w[iq] * (f_q[iq] - f_t[it]);
                }
                acc + f_t[it] * t_one(&self.domain, pt.zeta)
            })
            .collect()
    }

    pub fn prepared_quadrature(&self) -> &[Prepared] {
        &self.prepared_q
    }

    pub fn prepared_eval(&self) -> &[Prepared] {
        &self.prepared_e
    }
}

/// Sample a one-variable field at disc-coordinate points of a domain.
pub fn sample_slot_field(
    f: &ScalarField,
    domain: &DomainSpec,
    pts_disc: &[Complex64],
) -> Result<Vec<Complex64>> {
    match f {
        ScalarField::Monomials(m) => {
            m.require_dim(1)?;
            Ok(pts_disc.iter().map(|&z| m.eval(&[domain.psi(z)])).collect())
        }
        ScalarField::Analytic(a) => {
            if a.dim != 1 {
                return Err(Error::DimensionMismatch("slot field must be one-variable".into()));
            }
            Ok(pts_disc.iter().map(|&z| (a.f)([domain.psi(z)].as_slice())).collect())
        }
        ScalarField::Grid(_) => Err(Error::Representation(
            "grid samples cannot be resampled on quadrature nodes".into(),
        )),
    }
}

/// `T[f]` on one slot with a refinement-difference error estimate.
pub fn t_apply(
    domain: &DomainSpec,
    grid: &FactorGrid,
    eval: &EvalSet,
    f: &ScalarField,
) -> Result<(Vec<Complex64>, f64)> {
    let eng = SlotEngine::new(domain, grid, eval)?;
    let f_q = sample_slot_field(f, domain, &grid.nodes)?;
    let f_e = sample_slot_field(f, domain, &eval.points)?;
    let vals = eng.t_apply_samples(&f_q, &f_e);
    // error estimate: difference against a 3/2-refined rule
    let fine = crate::geometry::make_disc_grid(
        (grid.n_r * 3).div_ceil(2),
        (grid.n_theta * 3).div_ceil(2),
        grid.margin,
    )?;
    let eng2 = SlotEngine::new(domain, &fine, eval)?;
    let f_q2 = sample_slot_field(f, domain, &fine.nodes)?;
    let vals2 = eng2.t_apply_samples(&f_q2, &f_e);
    let est = vals
        .iter()
        .zip(&vals2)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok((vals, est))
}

/// Bergman projection on one slot with a refinement-difference estimate.
pub fn bergman_project(
    domain: &DomainSpec,
    grid: &FactorGrid,
    eval: &EvalSet,
    f: &ScalarField,
) -> Result<(Vec<Complex64>, f64)> {
    let eng = SlotEngine::new(domain, grid, eval)?;
    let f_q = sample_slot_field(f, domain, &grid.nodes)?;
    let vals = eng.p_apply_samples(&f_q);
    let fine = crate::geometry::make_disc_grid(
        (grid.n_r * 3).div_ceil(2),
        (grid.n_theta * 3).div_ceil(2),
        grid.margin,
    )?;
    let eng2 = SlotEngine::new(domain, &fine, eval)?;
    let f_q2 = sample_slot_field(f, domain, &fine.nodes)?;
    let vals2 = eng2.p_apply_samples(&f_q2);
    let est = vals
        .iter()
        .zip(&vals2)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok((vals, est))
}

/// Independent orthonormal-basis route for the projection: expand against
/// `sqrt((k+1)/pi) phi^k phi'` up to `degree` with quadrature moments.
pub fn bergman_project_basis(
    domain: &DomainSpec,
    grid: &FactorGrid,
    f: &ScalarField,
    targets_disc: &[Complex64],
    degree: usize,
) -> Result<Vec<Complex64>> {
    let f_q = sample_slot_field(f, domain, &grid.nodes)?;
    // moments c_k = (k+1)/pi int f(w) conj(phi(w))^k conj(phi'(w)) dA(w)
    let mut moments = vec![Complex64::new(0.0, 0.0); degree + 1];
    for (iq, &zeta) in grid.nodes.iter().enumerate() {
        let dphi = domain.phi_prime_at_pullback(zeta);
        let w_omega = grid.weights[iq] / dphi.norm_sqr();
        let base = f_q[iq] * dphi.conj() * w_omega;
        let mut pow = Complex64::new(1.0, 0.0);
        for m in moments.iter_mut() {
            *m += base * pow;
            pow *= zeta.conj();
        }
    }
    for (k, m) in moments.iter_mut().enumerate() {
        *m *= (k as f64 + 1.0) / std::f64::consts::PI;
    }
    Ok(targets_disc
        .iter()
        .map(|&zeta| {
            let dphi = domain.phi_prime_at_pullback(zeta);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut pow = Complex64::new(1.0, 0.0);
            for &m in &moments {
                acc += m * pow;
                pow *= zeta;
            }
            acc * dphi
        })
        .collect())
}

/// Spectrally accurate realization of `T[f]` on the polar rule, used as an
/// independent validation route: the kernel splits into a smooth part and
/// the Cauchy kernel, the Cauchy part is resolved per angular Fourier mode
/// into radial integrals of the interpolated mode profiles over `[0, rho]`
/// and `[rho, 1]`.
pub fn t_apply_modesplit(
    domain: &DomainSpec,
    grid: &FactorGrid,
    f: &ScalarField,
    targets_disc: &[Complex64],
) -> Result<Vec<Complex64>> {
    let nr = grid.n_r;
    let nt = grid.n_theta;
    // g = (f o psi) |psi'|^2 sampled on the disc rule
    let g: Vec<Complex64> = {
        let f_omega = sample_slot_field(f, domain, &grid.nodes)?;
        grid.nodes
            .iter()
            .zip(&f_omega)
            .map(|(&zeta, &v)| v * domain.psi_prime(zeta).norm_sqr())
            .collect()
    };
    // angular FFT per radius
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(nt);
    let mut modes = vec![Complex64::new(0.0, 0.0); nr * nt];
    for ir in 0..nr {
        let mut buf: Vec<Complex64> = (0..nt).map(|it| g[ir * nt + it]).collect();
        fft.process(&mut buf);
        for (it, v) in buf.into_iter().enumerate() {
            modes[ir * nt + it] = v / nt as f64;
        }
    }
    // barycentric weights over the radial nodes
    let radii = &grid.radii;
    let mut bary = vec![1.0f64; nr];
    for j in 0..nr {
        for k in 0..nr {
            if k != j {
                bary[j] /= radii[j] - radii[k];
            }
        }
    }
    let (gl_x, gl_w) = crate::geometry::gauss_legendre(nr.max(24));
    let interp_row = |s: f64| -> Vec<f64> {
        // barycentric interpolation weights from radial nodes to s
        let mut row = vec![0.0f64; nr];
        for j in 0..nr {
            if (s - radii[j]).abs() < 1e-15 {
                row[j] = 1.0;
                return row;
            }
        }
        let mut den = 0.0;
        for j in 0..nr {
            let c = bary[j] / (s - radii[j]);
            row[j] = c;
            den += c;
        }
        for r in row.iter_mut() {
            *r /= den;
        }
        row
    };

    // smooth part (1/pi) int wbar g(w)/(1 - z wbar) dA by the geometric-series
    // modes: 2 sum_k z^k int_0^1 g_{k+1}(s) s^{k+2} ds -- plain radial sums,
    // exact on polynomial modes and well-conditioned up to the boundary
    let smooth_coef: Vec<Complex64> = (0..nt / 2)
        .map(|k| {
            let mm = k + 1;
            let mut acc = Complex64::new(0.0, 0.0);
            for ir in 0..nr {
                acc += grid.radial_weights[ir]
                    * modes[ir * nt + mm]
                    * grid.radii[ir].powi(mm as i32);
            }
            acc * 2.0
        })
        .collect();

    let out: Vec<Complex64> = targets_disc
        .par_iter()
        .map(|&zt| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut zp = Complex64::new(1.0, 0.0);
            for c in &smooth_coef {
                acc += c * zp;
                zp *= zt;
            }
            let rho = zt.norm();
            if rho < 1e-14 {
                // only the m=1 mode contributes to the Cauchy part at 0
                let mut inner = Complex64::new(0.0, 0.0);
                for (idx, &x) in gl_x.iter().enumerate() {
                    let s = 0.5 * (x + 1.0);
                    let row = interp_row(s);
                    let mut fm = Complex64::new(0.0, 0.0);
                    for j in 0..nr {
                        fm += row[j] * modes[j * nt + 1];
                    }
                    inner += fm * (0.5 * gl_w[idx]);
                }
                return acc - 2.0 * inner;
            }
            let alpha = zt / rho;
            // Gauss nodes on [0, rho] and [rho, 1] with interpolation rows
            let mut cauchy = Complex64::new(0.0, 0.0);
            let mut fm_in = vec![Complex64::new(0.0, 0.0); nt];
            let mut fm_out = vec![Complex64::new(0.0, 0.0); nt];
            for (idx, &x) in gl_x.iter().enumerate() {
                let si = 0.5 * (x + 1.0) * rho;
                let so = rho + 0.5 * (x + 1.0) * (1.0 - rho);
                let wi = 0.5 * gl_w[idx] * rho;
                let wo = 0.5 * gl_w[idx] * (1.0 - rho);
                let row_i = interp_row(si);
                let row_o = interp_row(so);
                for mm in 0..nt {
                    let m_signed = if mm <= nt / 2 { mm as i64 } else { mm as i64 - nt as i64 };
                    let mut vi = Complex64::new(0.0, 0.0);
                    let mut vo = Complex64::new(0.0, 0.0);
                    for j in 0..nr {
                        vi += row_i[j] * modes[j * nt + mm];
                        vo += row_o[j] * modes[j * nt + mm];
                    }
                    if m_signed <= 0 {
                        fm_in[mm] += vi * wi * (si / rho).powi((1 - m_signed) as i32);
                    } else {
                        fm_out[mm] += vo * wo * (rho / so).powi((m_signed - 1) as i32);
                    }
                }
            }
            for mm in 0..nt {
                let m_signed = if mm <= nt / 2 { mm as i64 } else { mm as i64 - nt as i64 };
                let ap = |p: i64| -> Complex64 {
                    if p >= 0 {
                        alpha.powi(p as i32)
                    } else {
                        alpha.conj().powi((-p) as i32)
                    }
                };
                if m_signed <= 0 {
                    cauchy += 2.0 * ap(m_signed - 1) * fm_in[mm];
                } else {
                    cauchy -= 2.0 * ap(m_signed - 1) * fm_out[mm];
                }
            }
            acc + cauchy
        })
        .collect();
    // conformal images carry the phi'(z) factor outside the disc primitive
    if domain.is_disc() {
        Ok(out)
    } else {
        Ok(out
            .into_iter()
            .zip(targets_disc)
            .map(|(v, &zeta)| v * domain.phi_prime_at_pullback(zeta))
            .collect())
    }
}

/// Orthogonality defect of `T[f]` against the holomorphic monomial basis of
/// the domain (`phi^m phi'` up to `max_degree`): computed with the spectral
/// mode-split route at the quadrature nodes, so the defect reflects the
/// operator and not the quadrature noise of the subtraction path.
pub fn t_orthogonality_defect(
    domain: &DomainSpec,
    grid: &FactorGrid,
    f: &ScalarField,
    max_degree: u32,
) -> Result<f64> {
    let tf = t_apply_modesplit(domain, grid, f, &grid.nodes)?;
    let mut worst: f64 = 0.0;
    for m in 0..=max_degree {
        let mut ip = Complex64::new(0.0, 0.0);
        for (iq, &zeta) in grid.nodes.iter().enumerate() {
            let dphi = domain.phi_prime_at_pullback(zeta);
            let w_omega = grid.weights[iq] / dphi.norm_sqr();
            ip += tf[iq] * (zeta.powu(m) * dphi).conj() * w_omega;
        }
        worst = worst.max(ip.norm());
    }
    Ok(worst)
}
