//! Composite slot operators built from the `b` and `a` kernels: the
//! partially-integrated `B_{j,i}` and `A^k_{j,i}` and the full composed terms
//! `T_j B_{j,i}[g]`, `T_j B_{j,i} B_{j,k}[g]`, `T_i B_{i,j} B_{j,k}[g]`,
//! `T_i A^i_{j,k}[g]` that assemble the decomposed solution.
//!
//! Every composed term is evaluated with exact-moment subtraction:
//!
//! - `b^{j,i}` has zero mean over its active slot (`k` vanishes on the
//!   boundary, so the Stokes term dies), which makes the inner subtraction
//!   `g - g(z_i, .)` exact;
//! - `b^{j,i}` at `w_j = z_j` collapses to the Bergman kernel `K(z_i, w_i)`,
//!   so the outer integrand has a smooth diagonal limit and the usual
//!   `T[1]`-subtraction applies;
//! - `da/dwbar`-type kernels keep zero mean in their own active slot, and the
//!   one non-vanishing moment that survives in the `A`-terms is itself a
//!   subtracted Cauchy quadrature.
//!
//! Inputs are rank-one slot factors (monomial data is a sum of those), so
//! each term costs `O(|Q|^2)` per evaluation point.

use super::SlotEngine;
use crate::fields::MonomialField;
use crate::Complex64;

/// One slot factor of a rank-one term: samples at the quadrature nodes plus
/// the value at the slot's evaluation point.
#[derive(Debug, Clone)]
pub struct Rank1Slot {
    pub at_q: Vec<Complex64>,
    pub at_e: Complex64,
}

impl Rank1Slot {
    /// Sample the factor `z^a zbar^b` (in Omega coordinates) for one slot.
    pub fn monomial(eng: &SlotEngine, a: u32, b: u32, eval_idx: usize) -> Self {
        let f = |z: Complex64| z.powu(a) * z.conj().powu(b);
        Rank1Slot {
            at_q: eng.q_omega.iter().map(|&z| f(z)).collect(),
            at_e: f(eng.e_omega[eval_idx]),
        }
    }

    /// Sample the exact `dwbar`-derivative `b z^a zbar^{b-1}` of the factor.
    pub fn monomial_dbar(eng: &SlotEngine, a: u32, b: u32, eval_idx: usize) -> Self {
        if b == 0 {
            let n = eng.nq();
            return Rank1Slot {
                at_q: vec![Complex64::new(0.0, 0.0); n],
                at_e: Complex64::new(0.0, 0.0),
            };
        }
        let f = |z: Complex64| z.powu(a) * z.conj().powu(b - 1) * b as f64;
        Rank1Slot {
            at_q: eng.q_omega.iter().map(|&z| f(z)).collect(),
            at_e: f(eng.e_omega[eval_idx]),
        }
    }
}

/// Split an n-variate monomial field into rank-one terms: coefficient plus
/// per-slot exponent pairs.
pub fn rank1_terms(f: &MonomialField) -> Vec<(Complex64, Vec<(u32, u32)>)> {
    f.terms().map(|(e, &c)| (c, e.clone())).collect()
}

#[inline]
fn b_value(h: Complex64, big_h: Complex64, rho: f64, s: f64) -> Complex64 {
    // b = h * s / tau^2 + H / tau with tau = rho + s; at s = 0 this is
    // H / rho = K, the smooth diagonal limit
    let tau = rho + s;
    (h * s / tau + big_h) / tau
}

/// Inner integral `A(s) = int b^{.,i}(rho_i, s) (g_i(w_i) - g_i(z_i)) dA(w_i)`
/// over the active slot `i`, as a function of the squared distance `s` in the
/// passive slot. `A(0)` is the smooth diagonal value (Bergman-kernel limit).
fn inner_b_profile<'a>(
    eng: &'a SlotEngine,
    ei: usize,
    gi: &'a Rank1Slot,
) -> impl Fn(f64) -> Complex64 + 'a {
    let nq = eng.nq();
    move |s: f64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for iq in 0..nq {
            let rho = eng.rho_eq[ei * nq + iq];
            let b = b_value(eng.h_eq.get(ei, iq), eng.bigh_eq.get(ei, iq), rho, s);
            acc += b * eng.q_w[iq] * (gi.at_q[iq] - gi.at_e);
        }
        acc
    }
}

/// `B_{j,i}[g]` at the mixed point `(w_j = q-th quadrature node, z)` for a
/// rank-one `g = g_i(w_i) g_j(w_j)` (the `g_j` factor rides along unweighted:
/// the caller multiplies). Reference form of Eq.-style partial integration;
/// the composed terms below inline it.
pub fn b_slot_partial(
    eng: &SlotEngine,
    ej: usize,
    ei: usize,
    gi: &Rank1Slot,
    qj: usize,
) -> Complex64 {
    let s = eng.rho_eq[ej * eng.nq() + qj];
    inner_b_profile(eng, ei, gi)(s)
}

/// `T_j B_{j,i}[g](z)` for rank-one `g = g_i g_j`; two-level subtraction.
pub fn tb_term(
    eng: &SlotEngine,
    ej: usize,
    ei: usize,
    gj: &Rank1Slot,
    gi: &Rank1Slot,
) -> Complex64 {
    let nq = eng.nq();
    let profile = inner_b_profile(eng, ei, gi);
    let diag = profile(0.0) * gj.at_e;
    let mut acc = Complex64::new(0.0, 0.0);
    for qj in 0..nq {
        let s = eng.rho_eq[ej * nq + qj];
        let iwj = profile(s) * gj.at_q[qj];
        acc += eng.k_eq.get(ej, qj) * eng.q_w[qj] * (iwj - diag);
    }
    acc + diag * eng.t1_e[ej]
}

/// `T_j B_{j,i} B_{j,k}[g](z)` for rank-one `g = g_i g_j g_k` (shared hub
/// slot `j`); tensor zero-mean subtraction in both active slots.
pub fn tbb_term(
    eng: &SlotEngine,
    ej: usize,
    ei: usize,
    ek: usize,
    gj: &Rank1Slot,
    gi: &Rank1Slot,
    gk: &Rank1Slot,
) -> Complex64 {
    let nq = eng.nq();
    let prof_i = inner_b_profile(eng, ei, gi);
    let prof_k = inner_b_profile(eng, ek, gk);
    let diag = prof_i(0.0) * prof_k(0.0) * gj.at_e;
    let mut acc = Complex64::new(0.0, 0.0);
    for qj in 0..nq {
        let s = eng.rho_eq[ej * nq + qj];
        let j_val = prof_i(s) * prof_k(s) * gj.at_q[qj];
        acc += eng.k_eq.get(ej, qj) * eng.q_w[qj] * (j_val - diag);
    }
    acc + diag * eng.t1_e[ej]
}

/// `T_l B_{l,m} B_{m,k}[g](z)` for rank-one `g = g_l g_m g_k`: chain coupling
/// `w_l - w_m - w_k` with hub `m`. The `w_k` integral uses the zero-mean
/// subtraction; the `w_l` integral is Cauchy-type and is subtracted against
/// its smooth diagonal limit `K(z_m, w_m) g_l(z_l)` with the exact `T[1]`.
pub fn tchain_term(
    eng: &SlotEngine,
    el: usize,
    em: usize,
    ek: usize,
    gl: &Rank1Slot,
    gm: &Rank1Slot,
    gk: &Rank1Slot,
) -> Complex64 {
    let nq = eng.nq();
    let prof_k = inner_b_profile(eng, ek, gk);
    let mut acc = Complex64::new(0.0, 0.0);
    for qm in 0..nq {
        let s_m = eng.rho_eq[em * nq + qm];
        let h_m = eng.h_eq.get(em, qm);
        let bigh_m = eng.bigh_eq.get(em, qm);
        let kk_m = eng.kk_eq.get(em, qm);
        // inner over w_l: sum_q w k(z_l, w_l) [ b^{l,m} g_l - K_m g_l(z_l) ]
        //               + K_m g_l(z_l) T[1](z_l)
        // b^{l,m} is active in slot m: h_m rho_l / tau^2 + H_m / tau
        let mut d = Complex64::new(0.0, 0.0);
        for ql in 0..nq {
            let rho_l = eng.rho_eq[el * nq + ql];
            let b_lm = b_value(h_m, bigh_m, s_m, rho_l);
            d += eng.k_eq.get(el, ql)
                * eng.q_w[ql]
                * (b_lm * gl.at_q[ql] - kk_m * gl.at_e);
        }
        d += kk_m * gl.at_e * eng.t1_e[el];
        acc += eng.q_w[qm] * gm.at_q[qm] * d * prof_k(s_m);
    }
    acc
}

/// `T_i A^i_{j,k}[g](z)` for rank-one `g = g_i g_j g_k`: triple integral of
/// `k(z_i, w_i) a^{j,k} / tau_{j,i}` with hub `j`. The `w_k` factor of
/// `da^{j,k}` keeps zero mean; the `w_i` Cauchy integral is split into a
/// subtracted part plus its exact constant moment, itself a subtracted
/// quadrature of `k_i / (rho_i + s_j)`.
pub fn ta_term(
    eng: &SlotEngine,
    ei: usize,
    ej: usize,
    ek: usize,
    gi: &Rank1Slot,
    gj: &Rank1Slot,
    gk: &Rank1Slot,
) -> Complex64 {
    let nq = eng.nq();
    let mut acc = Complex64::new(0.0, 0.0);
    for qj in 0..nq {
        let s_j = eng.rho_eq[ej * nq + qj];
        if s_j < 1e-26 {
            continue;
        }
        let dj = eng.q_omega[qj] - eng.e_omega[ej];
        // w_k inner: sum_q w (db^{j,k}/dwbar_j) (g_k - g_k(z_k)); from the
        // closed form the common factor (w_j - z_j) is pulled out here
        let mut d3 = Complex64::new(0.0, 0.0);
        for qk in 0..nq {
            let rho_k = eng.rho_eq[ek * nq + qk];
            let tau = rho_k + s_j;
            let db = (eng.h_eq.get(ek, qk) * (rho_k - s_j) / tau - eng.bigh_eq.get(ek, qk))
                / (tau * tau);
            d3 += db * eng.q_w[qk] * (gk.at_q[qk] - gk.at_e);
        }
        d3 *= dj;
        // w_i inner: subtracted part + g_i(z_i) times the exact moment of
        // k_i/(rho_i + s_j)
        let mut q1 = Complex64::new(0.0, 0.0);
        let mut q1c = Complex64::new(0.0, 0.0);
        for qi in 0..nq {
            let rho_i = eng.rho_eq[ei * nq + qi];
            let ki = eng.k_eq.get(ei, qi) * eng.q_w[qi];
            q1 += ki * (gi.at_q[qi] - gi.at_e) / (rho_i + s_j);
            q1c += ki * (1.0 / (rho_i + s_j) - 1.0 / s_j);
        }
        q1c += eng.t1_e[ei] / s_j;
        let inner_i = q1 + gi.at_e * q1c;
        // a^{j,k} = |w_j - z_j|^2 k_j db = h_j conj(w_j - z_j) db
        let m2 = eng.h_eq.get(ej, qj) * dj.conj();
        acc += eng.q_w[qj] * m2 * gj.at_q[qj] * d3 * inner_i;
    }
    acc
}

/// The combined pair `T_i B_{i,j} B_{j,k}[g] + T_i A^i_{j,k}[g]` for
/// rank-one `g = g_i g_j g_k`. The two terms are large and nearly cancel
/// (their kernel sum is the `wbar_j`-derivative of
/// `b^{j,k} |w_j - z_j|^2 k_j / tau_{j,i}`, which integrates to zero against
/// constants since `k` vanishes on the boundary), so they are evaluated
/// jointly after integrating by parts in `wbar_j`:
///
/// ```text
/// pair = - int k(z_i, w_i) g_i (dg_j/dwbar_j) g_k
///              b^{j,k} |w_j - z_j|^2 k(z_j, w_j) / tau_{j,i}  dv
/// ```
///
/// `gj_dbar` carries the exact `wbar_j`-derivative of the hub factor.
pub fn tchain_a_pair(
    eng: &SlotEngine,
    ei: usize,
    ej: usize,
    ek: usize,
    gi: &Rank1Slot,
    gj_dbar: &Rank1Slot,
    gk: &Rank1Slot,
) -> Complex64 {
    let nq = eng.nq();
    // the g_k(z_k) part of the w_k integral dies by the zero mean of b, so
    // the subtracted profile IS the full integral
    let prof_k = inner_b_profile(eng, ek, gk);
    let mut acc = Complex64::new(0.0, 0.0);
    for qj in 0..nq {
        if gj_dbar.at_q[qj].norm() == 0.0 && gj_dbar.at_e.norm() == 0.0 {
            continue;
        }
        let s_j = eng.rho_eq[ej * nq + qj];
        if s_j < 1e-26 {
            continue;
        }
        let dj = eng.q_omega[qj] - eng.e_omega[ej];
        // |w_j - z_j|^2 k_j = h_j conj(w_j - z_j), bounded
        let m2 = eng.h_eq.get(ej, qj) * dj.conj();
        let ck = prof_k(s_j);
        // w_i integral of k_i g_i / tau_{j,i}: subtracted part plus the
        // exact moment against the constant g_i(z_i)
        let mut q1 = Complex64::new(0.0, 0.0);
        let mut q1c = Complex64::new(0.0, 0.0);
        for qi in 0..nq {
            let rho_i = eng.rho_eq[ei * nq + qi];
            let ki = eng.k_eq.get(ei, qi) * eng.q_w[qi];
            q1 += ki * (gi.at_q[qi] - gi.at_e) / (rho_i + s_j);
            q1c += ki * (1.0 / (rho_i + s_j) - 1.0 / s_j);
        }
        q1c += eng.t1_e[ei] / s_j;
        let inner_i = q1 + gi.at_e * q1c;
        acc += eng.q_w[qj] * gj_dbar.at_q[qj] * m2 * ck * inner_i;
    }
    -acc
}

/// `A^k_{j,i}[g]` at the mixed point `(z, w_k)`: the double partial
/// integration of `a^{j,i} / tau_{j,k}` against a rank-one `g = g_i g_j`,
/// with the third-slot coupling entering through `s_k = |w_k - z_k|^2`.
/// Plain reference quadrature, used in tests; the composed solver goes
/// through [`ta_term`].
pub fn a_slot_partial(
    eng: &SlotEngine,
    ej: usize,
    ei: usize,
    gj: &Rank1Slot,
    gi: &Rank1Slot,
    s_k: f64,
) -> Complex64 {
    let nq = eng.nq();
    let mut acc = Complex64::new(0.0, 0.0);
    for qj in 0..nq {
        let s_j = eng.rho_eq[ej * nq + qj];
        if s_j < 1e-26 {
            continue;
        }
        let dj = eng.q_omega[qj] - eng.e_omega[ej];
        let m2 = eng.h_eq.get(ej, qj) * dj.conj();
        let tau_jk = s_j + s_k;
        let mut inner = Complex64::new(0.0, 0.0);
        for qi in 0..nq {
            let rho_i = eng.rho_eq[ei * nq + qi];
            let tau = rho_i + s_j;
            let db = (eng.h_eq.get(ei, qi) * (rho_i - s_j) / tau - eng.bigh_eq.get(ei, qi)) * dj
                / (tau * tau);
            inner += eng.q_w[qi] * db * gi.at_q[qi];
        }
        acc += eng.q_w[qj] * m2 * gj.at_q[qj] * inner / tau_jk;
    }
    acc
}
