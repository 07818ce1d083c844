//! Finite monomial expansions `sum c * prod_k z_k^{a_k} zbar_k^{b_k}` with
//! exact arithmetic on the exponent lattice. These are the interchange format
//! for test fields and the substrate of the exact solve oracle: the slot
//! actions of the Bergman projection and of the solution operator T on a
//! monomial have closed forms derived from the Bergman series,
//!
//! ```text
//! P[z^a zbar^b] = (a-b+1)/(a+1) z^{a-b}          if a >= b, else 0
//! T[z^a zbar^b] = z^a zbar^{b+1}/(b+1)
//!                 - (a-b)/((a+1)(b+1)) z^{a-b-1}  if a >= b+1
//! ```
//!
//! both validated against direct kernel quadrature in the operator tests.

use crate::{Complex64, Error, Result};
use std::collections::BTreeMap;

/// Per-slot exponents `(a, b)` of `z^a zbar^b`.
pub type Exps = Vec<(u32, u32)>;

#[derive(Debug, Clone, PartialEq)]
pub struct MonomialField {
    dim: usize,
    terms: BTreeMap<Exps, Complex64>,
}

const COEFF_EPS: f64 = 1e-300;

impl MonomialField {
    pub fn zero(dim: usize) -> Self {
        MonomialField {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut f = Self::zero(dim);
        f.add_term(vec![(0, 0); dim], c);
        f
    }

    /// The coordinate monomial `z_slot` (or `zbar_slot` when `conj` is set).
    pub fn coordinate(dim: usize, slot: usize, conj: bool) -> Self {
        let mut e = vec![(0, 0); dim];
        e[slot] = if conj { (0, 1) } else { (1, 0) };
        let mut f = Self::zero(dim);
        f.add_term(e, Complex64::new(1.0, 0.0));
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree (sum of all exponents) of the highest-order term.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&(a, b)| a + b).sum())
            .max()
            .unwrap_or(0)
    }

    /// Merge a term into the canonical form, dropping cancelled coefficients.
    pub fn add_term(&mut self, exps: Exps, c: Complex64) {
        assert_eq!(exps.len(), self.dim, "exponent tuple arity mismatch");
        if c.norm() <= COEFF_EPS {
            return;
        }
        let entry = self.terms.entry(exps.clone()).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if entry.norm() <= COEFF_EPS {
            self.terms.remove(&exps);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (e, &c) in other.terms.iter() {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, &v) in self.terms.iter() {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zero(self.dim);
        for (ea, &ca) in self.terms.iter() {
            for (eb, &cb) in other.terms.iter() {
                let e: Exps = ea
                    .iter()
                    .zip(eb)
                    .map(|(&(a1, b1), &(a2, b2))| (a1 + a2, b1 + b2))
                    .collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(self.dim, Complex64::new(1.0, 0.0));
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, &c) in self.terms.iter() {
            let mut t = c;
            for (k, &(a, b)) in e.iter().enumerate() {
                if a > 0 {
                    t *= z[k].powu(a);
                }
                if b > 0 {
                    t *= z[k].conj().powu(b);
                }
            }
            acc += t;
        }
        acc
    }

    /// `d/dzbar_slot`, exact term by term.
    pub fn dbar(&self, slot: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, &c) in self.terms.iter() {
            let (a, b) = e[slot];
            if b > 0 {
                let mut e2 = e.clone();
                e2[slot] = (a, b - 1);
                out.add_term(e2, c * b as f64);
            }
        }
        out
    }

    /// `d/dz_slot`, exact term by term.
    pub fn dz(&self, slot: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, &c) in self.terms.iter() {
            let (a, b) = e[slot];
            if a > 0 {
                let mut e2 = e.clone();
                e2[slot] = (a - 1, b);
                out.add_term(e2, c * a as f64);
            }
        }
        out
    }

    /// Dilation `f(z) -> f(r z)` for real `r`.
    pub fn dilate(&self, r: f64) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, &c) in self.terms.iter() {
            let total: u32 = e.iter().map(|&(a, b)| a + b).sum();
            out.add_term(e.clone(), c * r.powi(total as i32));
        }
        out
    }

    /// Oracle action of the slotwise Bergman projection.
    pub fn p_slot(&self, slot: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, &c) in self.terms.iter() {
            let (a, b) = e[slot];
            if a >= b {
                let mut e2 = e.clone();
                e2[slot] = (a - b, 0);
                out.add_term(e2, c * (a - b + 1) as f64 / (a + 1) as f64);
            }
        }
        out
    }

    /// Oracle action of the slotwise canonical solution operator T.
    pub fn t_slot(&self, slot: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, &c) in self.terms.iter() {
            let (a, b) = e[slot];
            let mut e1 = e.clone();
            e1[slot] = (a, b + 1);
            out.add_term(e1, c / (b + 1) as f64);
            if a >= b + 1 {
                let mut e2 = e.clone();
                e2[slot] = (a - b - 1, 0);
                out.add_term(
                    e2,
                    -c * (a - b) as f64 / ((a + 1) as f64 * (b + 1) as f64),
                );
            }
        }
        out
    }

    /// Exact `L^2(D^n)` inner product `<self, other>` via
    /// `<z^a zbar^b, z^c zbar^d> = delta_{a+d, b+c} pi / (a + d + 1)` per slot.
    pub fn inner_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for (ea, &ca) in self.terms.iter() {
            'outer: for (eb, &cb) in other.terms.iter() {
                let mut factor = 1.0;
                for (&(a, b), &(c, d)) in ea.iter().zip(eb) {
                    if a + d != b + c {
                        continue 'outer;
                    }
                    factor *= std::f64::consts::PI / (a + d + 1) as f64;
                }
                acc += ca * cb.conj() * factor;
            }
        }
        acc
    }

    /// Squared `L^2(D^n)` norm.
    pub fn l2_norm_sq(&self) -> f64 {
        self.inner_product(self).re
    }

    /// Sup of `|f|` over a deterministic dense sample of the closed polydisc
    /// (includes boundary radii, where polynomial sups concentrate).
    pub fn sup_closed_polydisc(&self, samples_r: usize, samples_t: usize) -> f64 {
        let mut pts_1d = Vec::with_capacity(samples_r * samples_t);
        for ir in 1..=samples_r {
            let r = ir as f64 / samples_r as f64;
            for it in 0..samples_t {
                let th = 2.0 * std::f64::consts::PI * it as f64 / samples_t as f64;
                pts_1d.push(Complex64::from_polar(r, th));
            }
        }
        let mut sup = self.eval(&vec![Complex64::new(0.0, 0.0); self.dim]).norm();
        let total = pts_1d.len().pow(self.dim as u32);
        let mut z = vec![Complex64::new(0.0, 0.0); self.dim];
        for flat in 0..total {
            let mut ix = flat;
            for zk in z.iter_mut() {
                *zk = pts_1d[ix % pts_1d.len()];
                ix /= pts_1d.len();
            }
            sup = sup.max(self.eval(&z).norm());
        }
        sup
    }

    /// Parse error helper for non-polynomial operations.
    pub fn require_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch(format!(
                "field has dimension {}, expected {dim}",
                self.dim
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn merge_and_cancel() {
        let mut f = MonomialField::zero(2);
        f.add_term(vec![(1, 0), (0, 0)], c(1.0, 0.0));
        f.add_term(vec![(1, 0), (0, 0)], c(2.0, 0.0));
        assert_eq!(f.num_terms(), 1);
        f.add_term(vec![(1, 0), (0, 0)], c(-3.0, 0.0));
        assert!(f.is_zero());
    }

    #[test]
    fn p_oracle_values() {
        // P[|z|^2] = 1/2
        let mut f = MonomialField::zero(1);
        f.add_term(vec![(1, 1)], c(1.0, 0.0));
        let p = f.p_slot(0);
        assert_eq!(p.num_terms(), 1);
        assert_abs_diff_eq!(p.eval(&[c(0.7, 0.2)]).re, 0.5, epsilon = 1e-15);
        // P[zbar] = 0, P[1] = 1, P[zbar z^m] = m/(m+1) z^{m-1}
        let zb = MonomialField::coordinate(1, 0, true);
        assert!(zb.p_slot(0).is_zero());
        let one = MonomialField::constant(1, c(1.0, 0.0));
        assert_eq!(one.p_slot(0), one);
        for m in 1..=4u32 {
            let mut f = MonomialField::zero(1);
            f.add_term(vec![(m, 1)], c(1.0, 0.0));
            let p = f.p_slot(0);
            let z0 = c(0.3, -0.4);
            let expect = z0.powu(m - 1) * (m as f64 / (m + 1) as f64);
            assert!((p.eval(&[z0]) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn t_oracle_values() {
        // T[1] = zbar; T[z] = z zbar - 1/2; T[zbar] = zbar^2/2
        let one = MonomialField::constant(1, c(1.0, 0.0));
        let z0 = c(0.25, 0.55);
        assert!((one.t_slot(0).eval(&[z0]) - z0.conj()).norm() < 1e-15);

        let z = MonomialField::coordinate(1, 0, false);
        let tz = z.t_slot(0);
        assert!((tz.eval(&[z0]) - (z0 * z0.conj() - 0.5)).norm() < 1e-15);
        // canonical: dbar(T[z]) = z and <T[z], 1> = 0
        assert_eq!(tz.dbar(0), z);
        assert!(tz.inner_product(&one).norm() < 1e-15);

        let zb = MonomialField::coordinate(1, 0, true);
        let tzb = zb.t_slot(0);
        assert!((tzb.eval(&[z0]) - z0.conj() * z0.conj() * 0.5).norm() < 1e-15);
    }

    #[test]
    fn t_oracle_is_canonical_on_monomials() {
        // for every monomial input: dbar(T[f]) = f and T[f] orthogonal to z^m
        for a in 0..=4u32 {
            for b in 0..=4u32 {
                let mut f = MonomialField::zero(1);
                f.add_term(vec![(a, b)], c(1.3, -0.7));
                let t = f.t_slot(0);
                assert_eq!(t.dbar(0), f, "dbar T != id on ({a},{b})");
                for m in 0..=6u32 {
                    let mut zm = MonomialField::zero(1);
                    zm.add_term(vec![(m, 0)], c(1.0, 0.0));
                    assert!(
                        t.inner_product(&zm).norm() < 1e-13,
                        "T[z^{a} zbar^{b}] not orthogonal to z^{m}"
                    );
                }
            }
        }
    }

    #[test]
    fn dbar_product_rule_examples() {
        // u = zbar1 zbar2: dbar -> (zbar2, zbar1)
        let u = MonomialField::coordinate(2, 0, true).mul(&MonomialField::coordinate(2, 1, true));
        let d0 = u.dbar(0);
        let d1 = u.dbar(1);
        assert_eq!(d0, MonomialField::coordinate(2, 1, true));
        assert_eq!(d1, MonomialField::coordinate(2, 0, true));
        // u = z1^3 is holomorphic
        let h = MonomialField::coordinate(2, 0, false).pow(3);
        assert!(h.dbar(0).is_zero() && h.dbar(1).is_zero());
    }

    #[test]
    fn inner_product_closed_form() {
        // <zbar z^m, z^{m-1}> = pi/(m+1)
        for m in 1..=4u32 {
            let mut f = MonomialField::zero(1);
            f.add_term(vec![(m, 1)], c(1.0, 0.0));
            let mut g = MonomialField::zero(1);
            g.add_term(vec![(m - 1, 0)], c(1.0, 0.0));
            let ip = f.inner_product(&g);
            assert_abs_diff_eq!(ip.re, std::f64::consts::PI / (m + 1) as f64, epsilon = 1e-14);
            assert_abs_diff_eq!(ip.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn linearity_of_dbar() {
        let f = MonomialField::coordinate(2, 0, true).mul(&MonomialField::coordinate(2, 1, false));
        let g = MonomialField::coordinate(2, 1, true).pow(2);
        let a = c(2.0, 1.0);
        let b = c(-0.5, 3.0);
        let lhs = f.scale(a).add(&g.scale(b)).dbar(1);
        let rhs = f.dbar(1).scale(a).add(&g.dbar(1).scale(b));
        assert_eq!(lhs, rhs);
    }
}
