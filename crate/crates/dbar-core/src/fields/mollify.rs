//! Dilation plus mollification: `f -> f(r .) * chi_eps`, the smoothing used
//! to approximate rough closed forms by forms smooth up to the closed
//! polydisc. The mollifier is a tensor product of one radially symmetric
//! bump per slot with unit mass, realized as a fixed polar node set whose
//! weights are normalized to sum to one; radial symmetry kills all odd
//! moments, so constants and degree-one terms are reproduced exactly.
//!
//! Both representations share the same discrete mollifier: monomial
//! expansions are convolved exactly through its radial moments, analytic
//! fields by direct summation over the node set, so the two paths agree on
//! polynomials to rounding.

use super::monomial::MonomialField;
use super::{AnalyticField, OneForm, ScalarField};
use crate::{Complex64, Error, Result};
use std::sync::{Arc, OnceLock};

/// Bump profile `exp(-1/(1-t^2))` on `[0, 1)`.
fn bump(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

pub struct Mollifier {
    /// unit-scale nodes on the unit disc
    pub nodes: Vec<Complex64>,
    /// weights, normalized to sum exactly to 1
    pub weights: Vec<f64>,
    /// radial moments m_s = sum w_q |y_q|^{2s}
    pub moments: Vec<f64>,
}

const MOLLIFIER_NR: usize = 4;
const MOLLIFIER_NT: usize = 8;
const MAX_MOMENT: usize = 24;

fn unit_mollifier() -> &'static Mollifier {
    static CELL: OnceLock<Mollifier> = OnceLock::new();
    CELL.get_or_init(|| {
        let (x, wx) = crate::geometry::gauss_legendre(MOLLIFIER_NR);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (i, &xi) in x.iter().enumerate() {
            let r = 0.5 * (xi + 1.0);
            let wr = 0.5 * wx[i] * r * bump(r);
            for it in 0..MOLLIFIER_NT {
                let th = 2.0 * std::f64::consts::PI * it as f64 / MOLLIFIER_NT as f64;
                nodes.push(Complex64::from_polar(r, th));
                weights.push(wr);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let moments = (0..=MAX_MOMENT)
            .map(|s| {
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(y, &w)| w * y.norm_sqr().powi(s as i32))
                    .sum()
            })
            .collect();
        Mollifier {
            nodes,
            weights,
            moments,
        }
    })
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Exact mollification of a monomial expansion at scale `eps`:
/// `z^a zbar^b -> sum_s C(a,s) C(b,s) m_s eps^{2s} z^{a-s} zbar^{b-s}`.
fn mollify_monomials(f: &MonomialField, eps: f64) -> MonomialField {
    let mol = unit_mollifier();
    let mut out = MonomialField::zero(f.dim());
    for (e, &c) in f.terms() {
        // per-slot binomial convolution; iterate the tensor product of
        // drop-counts s_k <= min(a_k, b_k)
        let caps: Vec<u32> = e.iter().map(|&(a, b)| a.min(b)).collect();
        let mut s = vec![0u32; e.len()];
        loop {
            let mut coeff = c;
            let mut e2 = e.clone();
            for (k, &(a, b)) in e.iter().enumerate() {
                let sk = s[k];
                coeff *= binomial(a, sk)
                    * binomial(b, sk)
                    * mol.moments[sk as usize]
                    * eps.powi(2 * sk as i32);
                e2[k] = (a - sk, b - sk);
            }
            out.add_term(e2, coeff);
            // odometer over s
            let mut k = 0;
            loop {
                if k == s.len() {
                    break;
                }
                if s[k] < caps[k] {
                    s[k] += 1;
                    break;
                }
                s[k] = 0;
                k += 1;
            }
            if k == s.len() {
                break;
            }
        }
    }
    out
}

/// `dilate_mollify(f, r, eps)`: the dilation `f_r(z) = f(r z)` convolved
/// componentwise with the tensor mollifier at scale `eps`. Requires
/// `0 < r < 1` and `0 < eps <= (1-r)/2` (the default choice is the upper
/// bound), so the output is smooth up to the closed polydisc.
pub fn dilate_mollify(f: &OneForm, r: f64, eps: f64) -> Result<OneForm> {
    if !(0.0 < r && r < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "dilation factor must lie in (0,1), got {r}"
        )));
    }
    let cap = (1.0 - r) / 2.0;
    if !(eps > 0.0 && eps <= cap + 1e-15) {
        return Err(Error::InvalidParameter(format!(
            "mollification scale must lie in (0, (1-r)/2] = (0, {cap}], got {eps}"
        )));
    }
    let dim = f.dim;
    let comps = f
        .comps
        .iter()
        .map(|c| match c {
            ScalarField::Monomials(m) => {
                Ok(ScalarField::Monomials(mollify_monomials(&m.dilate(r), eps)))
            }
            ScalarField::Analytic(a) => {
                let inner = a.f.clone();
                let mol = unit_mollifier();
                let nodes: Vec<Complex64> = mol.nodes.iter().map(|&y| y * eps).collect();
                let weights = mol.weights.clone();
                let rr = r;
                Ok(ScalarField::Analytic(AnalyticField {
                    dim,
                    f: Arc::new(move |z: &[Complex64]| {
                        // tensor-product convolution: sum over one mollifier
                        // node per slot
                        let n = z.len();
                        let m = nodes.len();
                        let total = m.pow(n as u32);
                        let mut acc = Complex64::new(0.0, 0.0);
                        let mut shifted = vec![Complex64::new(0.0, 0.0); n];
                        for flat in 0..total {
                            let mut rest = flat;
                            let mut w = 1.0;
                            for k in 0..n {
                                let q = rest % m;
                                rest /= m;
                                shifted[k] = (z[k] - nodes[q]) * rr;
                                w *= weights[q];
                            }
                            acc += inner(&shifted) * w;
                        }
                        acc
                    }),
                }))
            }
            ScalarField::Grid(_) => Err(Error::Representation(
                "dilate_mollify needs monomial or analytic components".into(),
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    OneForm::new(comps)
}
