//! Experiments that measure the solver's norm constants empirically: sup-norm
//! ratios of the canonical solve, `L^p` ratios and the single-slot growth as
//! `p` drops to 2, weighted ratios with boundary-distance weights, and the
//! stability of the solve under dilation-mollification of rough data.
//!
//! Constants are reported, never asserted against fixed values: acceptance
//! pins only refinement stability. Sup-norms are maxima over evaluation sets
//! (margin-interior proxy); when a member has a monomial representation an
//! exact-oracle ratio over a dense closed-polydisc sample is reported
//! alongside. Families are seeded and reproduce bit-for-bit.

use crate::fields::{dilate_mollify, MonomialField, OneForm, ScalarField};
use crate::geometry::{DomainSpec, GridParams};
use crate::solver::{SolveMethod, SolverContext, Tolerances};
use crate::{Complex64, Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SupRatio,
    LpRatio,
    Weighted,
    Stability,
}

/// Named test-form families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `f = dbar(random polynomial potential)`: exactly closed by
    /// construction.
    RandomClosed { degree: u32 },
    /// Kerzman-type holomorphic-coefficient forms `(z2^m, z1^m)`.
    Kerzman { m: u32 },
    /// Closed forms whose potentials concentrate mass near the boundary
    /// (high-degree monomials).
    NearBoundary { degree: u32 },
    /// One-slot singular profile `(1 - |w|)^{-exponent}` for the T-growth
    /// probe.
    SingularLp { exponent: f64 },
    /// Components scaled like `max(d, delta)^{-alpha}` in their own slot with
    /// holomorphic cross-slot factors (dimension 2).
    WeightedSingular { degree: u32 },
    /// `f = (0, sign(Re z_2) q(z_1))`: bounded, closed, discontinuous.
    RoughJump { degree: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub family: FamilySpec,
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default = "default_alpha_list")]
    pub alpha_list: Vec<f64>,
    /// regularization floor for the weighted families
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// quadrature scales of the refinement trace
    #[serde(default = "default_scales")]
    pub grid_scales: Vec<f64>,
    /// dilation schedule of the stability chain
    #[serde(default = "default_schedule")]
    pub r_schedule: Vec<f64>,
}

fn default_p_list() -> Vec<f64> {
    vec![2.25, 2.5, 3.0, 4.0]
}

fn default_alpha_list() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}

fn default_delta() -> f64 {
    1e-3
}

fn default_scales() -> Vec<f64> {
    vec![1.0, 2.0]
}

fn default_schedule() -> Vec<f64> {
    vec![0.5, 0.65, 0.8, 0.9, 0.95]
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count < 1 {
            return Err(Error::InvalidParameter("family count must be >= 1".into()));
        }
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidParameter("dimension must be 1, 2 or 3".into()));
        }
        if matches!(self.kind, ExperimentKind::LpRatio) && self.p_list.iter().any(|&p| p <= 2.0) {
            return Err(Error::InvalidParameter(
                "sup-norm experiments need p > 2".into(),
            ));
        }
        if self.alpha_list.iter().any(|&a| !(0.0..1.0).contains(&a)) {
            return Err(Error::InvalidParameter("alpha must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// One measured row of an experiment: a member at a refinement level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub member: usize,
    pub label: String,
    pub level: usize,
    pub grid_scale: f64,
    pub values: Vec<(String, f64)>,
}

impl TraceRow {
    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == key).map(|&(_, v)| v)
    }
}

/// Measured-constant report with its refinement trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantReport {
    pub experiment: String,
    pub family: String,
    pub dim: usize,
    pub sup_norm_convention: String,
    pub rows: Vec<TraceRow>,
    pub summary: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl ConstantReport {
    /// Running max of a per-member key at one level.
    pub fn running_max(&self, key: &str, level: usize) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.level == level)
            .filter_map(|r| r.value(key))
            .fold(0.0, f64::max)
    }
}

fn rand_coeff(rng: &mut ChaCha8Rng) -> Complex64 {
    // Box-Muller keeps the stream portable across rand versions
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    Complex64::new(
        r * (2.0 * std::f64::consts::PI * u2).cos(),
        r * (2.0 * std::f64::consts::PI * u2).sin(),
    )
}

fn random_potential(dim: usize, degree: u32, rng: &mut ChaCha8Rng) -> MonomialField {
    let mut phi = MonomialField::zero(dim);
    let nterms = 8;
    let mut placed = 0;
    while placed < nterms {
        let exps: Vec<(u32, u32)> = (0..dim)
            .map(|_| (rng.gen_range(0..=degree), rng.gen_range(0..=degree)))
            .collect();
        let total: u32 = exps.iter().map(|&(a, b)| a + b).sum();
        if total > degree || exps.iter().all(|&(_, b)| b == 0) {
            continue; // keep the potential non-holomorphic so f != 0
        }
        phi.add_term(exps, rand_coeff(rng));
        placed += 1;
    }
    phi
}

fn random_holomorphic(dim: usize, slot: usize, degree: u32, rng: &mut ChaCha8Rng) -> MonomialField {
    let mut h = MonomialField::zero(dim);
    for k in 0..=degree {
        let mut e = vec![(0u32, 0u32); dim];
        e[slot] = (k, 0);
        h.add_term(e, rand_coeff(rng) * 0.5);
    }
    h
}

/// A generated member: a label plus the form.
pub struct FamilyMember {
    pub label: String,
    pub form: OneForm,
}

/// Generate the family deterministically from the seed. The weighted family
/// takes its exponent from `alpha` (0 turns the weights off).
pub fn generate_family(
    spec: &ExperimentSpec,
    alpha: f64,
    delta: f64,
) -> Result<Vec<FamilyMember>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dim = spec.dim;
    let mut out = Vec::with_capacity(spec.count);
    for idx in 0..spec.count {
        let member = match &spec.family {
            FamilySpec::RandomClosed { degree } => {
                let phi = random_potential(dim, *degree, &mut rng);
                let comps = (0..dim).map(|j| phi.dbar(j)).collect();
                FamilyMember {
                    label: format!("random_closed_deg{degree}_{idx}"),
                    form: OneForm::from_monomials(comps)?,
                }
            }
            FamilySpec::Kerzman { m } => {
                if dim != 2 {
                    return Err(Error::DimensionMismatch(
                        "the Kerzman preset is two-dimensional".into(),
                    ));
                }
                let mm = m + idx as u32;
                let mut f1 = MonomialField::zero(2);
                f1.add_term(vec![(0, 0), (mm, 0)], Complex64::new(1.0, 0.0));
                let mut f2 = MonomialField::zero(2);
                f2.add_term(vec![(mm, 0), (0, 0)], Complex64::new(1.0, 0.0));
                FamilyMember {
                    label: format!("kerzman_m{mm}"),
                    form: OneForm::from_monomials(vec![f1, f2])?,
                }
            }
            FamilySpec::NearBoundary { degree } => {
                let base = (*degree).max(6);
                let mut phi = MonomialField::zero(dim);
                for _ in 0..6 {
                    let exps: Vec<(u32, u32)> = (0..dim)
                        .map(|_| (rng.gen_range(2..=base), rng.gen_range(1..=2u32)))
                        .collect();
                    phi.add_term(exps, rand_coeff(&mut rng));
                }
                let comps = (0..dim).map(|j| phi.dbar(j)).collect();
                FamilyMember {
                    label: format!("near_boundary_{idx}"),
                    form: OneForm::from_monomials(comps)?,
                }
            }
            FamilySpec::SingularLp { exponent } => {
                if dim != 1 {
                    return Err(Error::DimensionMismatch(
                        "the singular L^p preset is one-dimensional".into(),
                    ));
                }
                let a = *exponent;
                let f = ScalarField::from_fn(1, move |z| {
                    Complex64::new((1.0 - z[0].norm()).max(1e-12).powf(-a), 0.0)
                });
                FamilyMember {
                    label: format!("singular_lp_{idx}"),
                    form: OneForm::new(vec![f])?,
                }
            }
            FamilySpec::WeightedSingular { degree } => {
                if dim != 2 {
                    return Err(Error::DimensionMismatch(
                        "the weighted singular preset is two-dimensional".into(),
                    ));
                }
                let h1 = random_holomorphic(2, 1, *degree, &mut rng);
                let h2 = random_holomorphic(2, 0, *degree, &mut rng);
                if alpha == 0.0 {
                    FamilyMember {
                        label: format!("weighted_a0_{idx}"),
                        form: OneForm::from_monomials(vec![h1, h2])?,
                    }
                } else {
                    let (a, d) = (alpha, delta);
                    let w = move |z: Complex64| (1.0 - z.norm()).max(d).powf(-a);
                    let h1c = h1.clone();
                    let h2c = h2.clone();
                    let f1 = ScalarField::from_fn(2, move |z| h1c.eval(z) * w(z[0]));
                    let f2 = ScalarField::from_fn(2, move |z| h2c.eval(z) * w(z[1]));
                    FamilyMember {
                        label: format!("weighted_a{alpha}_{idx}"),
                        form: OneForm::new(vec![f1, f2])?,
                    }
                }
            }
            FamilySpec::RoughJump { degree } => {
                if dim != 2 {
                    return Err(Error::DimensionMismatch(
                        "the rough-jump preset is two-dimensional".into(),
                    ));
                }
                let q = random_holomorphic(2, 0, *degree, &mut rng);
                let f1 = ScalarField::from_fn(2, |_| Complex64::new(0.0, 0.0));
                let f2 = ScalarField::from_fn(2, move |z| {
                    let s = if z[1].re >= 0.0 { 1.0 } else { -1.0 };
                    q.eval(z) * s
                });
                FamilyMember {
                    label: format!("rough_jump_{idx}"),
                    form: OneForm::new(vec![f1, f2])?,
                }
            }
        };
        out.push(member);
    }
    Ok(out)
}

/// Sup of one component over the evaluation lattice, with an optional
/// pointwise weight.
fn comp_sup_eval(
    comp: &ScalarField,
    ctx: &SolverContext,
    weight: Option<&dyn Fn(&[Complex64]) -> f64>,
) -> Result<f64> {
    let grid = &ctx.grid;
    let m = grid.eval.len();
    let total = m.pow(ctx.dim as u32);
    let mut worst: f64 = 0.0;
    let mut z = vec![Complex64::new(0.0, 0.0); ctx.dim];
    for flat in 0..total {
        let mut rest = flat;
        for ax in (0..ctx.dim).rev() {
            z[ax] = ctx.domain.psi(grid.eval.points[rest % m]);
            rest /= m;
        }
        let mut v = comp.eval(&z)?.norm();
        if let Some(w) = weight {
            v *= w(&z);
        }
        worst = worst.max(v);
    }
    Ok(worst)
}

/// Form sup norm: sum over components of component sups (matches the
/// weighted-estimate convention at alpha = 0).
fn form_sup_eval(f: &OneForm, ctx: &SolverContext) -> Result<f64> {
    let mut acc = 0.0;
    for c in &f.comps {
        acc += comp_sup_eval(c, ctx, None)?;
    }
    Ok(acc)
}

fn context_at_scale(
    domain: &DomainSpec,
    dim: usize,
    base: GridParams,
    scale: f64,
    tol: Tolerances,
) -> Result<SolverContext> {
    let params = GridParams {
        n_r: ((base.n_r as f64 * scale).round() as usize).max(4),
        n_theta: ((base.n_theta as f64 * scale).round() as usize).max(8),
        ..base
    };
    SolverContext::new(domain, dim, params, None, tol)
}

/// Solve a member by the ordered quadrature route.
fn solve_member(ctx: &SolverContext, f: &OneForm) -> Result<crate::solver::SolveOutcome> {
    ctx.canonical_solve(f, SolveMethod::Forward)
}

/// Sup-norm constant experiment: running max of
/// `||S[f]||_inf / sum_k ||f_k||_inf` over the family, traced across grid
/// refinement levels.
pub fn sup_ratio_experiment(
    domain: &DomainSpec,
    spec: &ExperimentSpec,
    base: GridParams,
    tol: Tolerances,
) -> Result<ConstantReport> {
    spec.validate()?;
    let family = generate_family(spec, 0.0, spec.delta)?;
    let mut rows = Vec::new();
    for (level, &scale) in spec.grid_scales.iter().enumerate() {
        let ctx = context_at_scale(domain, spec.dim, base, scale, tol)?;
        for (idx, member) in family.iter().enumerate() {
            let out = solve_member(&ctx, &member.form)?;
            let num = out.field.tensor.sup_norm();
            let den = form_sup_eval(&member.form, &ctx)?.max(1e-12);
            let mut values = vec![
                ("ratio_quad".to_string(), num / den),
                ("num_sup_eval".to_string(), num),
                ("den_sup_eval".to_string(), den),
            ];
            if let Ok(u) = ctx.oracle_solve(&member.form) {
                let num_o = u.sup_closed_polydisc(8, 12);
                let den_o: f64 = member
                    .form
                    .monomials()
                    .map(|cs| cs.iter().map(|c| c.sup_closed_polydisc(8, 12)).sum())
                    .unwrap_or(den);
                values.push(("ratio_oracle".to_string(), num_o / den_o.max(1e-12)));
            }
            rows.push(TraceRow {
                member: idx,
                label: member.label.clone(),
                level,
                grid_scale: scale,
                values,
            });
        }
    }
    let mut summary = Vec::new();
    for (level, &scale) in spec.grid_scales.iter().enumerate() {
        let rm = rows
            .iter()
            .filter(|r| r.level == level)
            .filter_map(|r| r.value("ratio_quad"))
            .fold(0.0, f64::max);
        summary.push((format!("running_max_scale_{scale}"), rm));
    }
    Ok(ConstantReport {
        experiment: "sup_ratio".to_string(),
        family: format!("{:?}", spec.family),
        dim: spec.dim,
        sup_norm_convention:
            "maxima over the margin-interior evaluation lattice; oracle ratios use a dense \
             closed-polydisc sample"
                .to_string(),
        rows,
        summary,
        notes: vec![],
    })
}

/// `L^p` ratio experiment: composed ratios per `p`, and the single-slot
/// `T`-growth ratio against `(p-1)/(p-2)` on a singular profile.
pub fn lp_ratio_experiment(
    domain: &DomainSpec,
    spec: &ExperimentSpec,
    base: GridParams,
    tol: Tolerances,
) -> Result<ConstantReport> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut notes = vec![];
    match spec.family {
        FamilySpec::SingularLp { .. } => {
            // single-slot growth probe
            let family = generate_family(spec, 0.0, spec.delta)?;
            for (level, &scale) in spec.grid_scales.iter().enumerate() {
                let ctx = context_at_scale(domain, 1, base, scale, tol)?;
                for (idx, member) in family.iter().enumerate() {
                    let (tvals, _) = crate::operators::t_apply(
                        domain,
                        &ctx.grid.quad,
                        &ctx.grid.eval,
                        &member.form.comps[0],
                    )?;
                    let tsup = tvals.iter().map(|v| v.norm()).fold(0.0, f64::max);
                    let mut values = vec![("t_sup".to_string(), tsup)];
                    for &p in &spec.p_list {
                        let mut acc = 0.0;
                        for (iq, &zeta) in ctx.grid.quad.nodes.iter().enumerate() {
                            let z = ctx.domain.psi(zeta);
                            let v = member.form.comps[0].eval(&[z])?.norm();
                            acc += ctx.grid.quad.weights[iq] * v.powf(p);
                        }
                        let fp = acc.powf(1.0 / p);
                        let growth = (p - 1.0) / (p - 2.0);
                        values.push((format!("ratio_p{p}"), tsup / fp));
                        values.push((format!("normalized_p{p}"), tsup / (fp * growth)));
                    }
                    rows.push(TraceRow {
                        member: idx,
                        label: member.label.clone(),
                        level,
                        grid_scale: scale,
                        values,
                    });
                }
            }
            notes.push(
                "single-slot probe: ratio_p = ||T[f]||_inf / ||f||_p, normalized_p divides \
                 out the (p-1)/(p-2) growth factor"
                    .to_string(),
            );
        }
        _ => {
            let family = generate_family(spec, 0.0, spec.delta)?;
            for (level, &scale) in spec.grid_scales.iter().enumerate() {
                let ctx = context_at_scale(domain, spec.dim, base, scale, tol)?;
                let axis_w: Vec<Vec<f64>> = vec![ctx.grid.eval.weights.clone(); spec.dim];
                for (idx, member) in family.iter().enumerate() {
                    let out = solve_member(&ctx, &member.form)?;
                    let mut values = Vec::new();
                    for &p in &spec.p_list {
                        let up = out.field.tensor.lp_norm(p, &axis_w);
                        // form L^p norm: (sum_k ||f_k||_p^p)^{1/p} on the
                        // evaluation lattice proxy
                        let mut fp_acc = 0.0;
                        for comp in &member.form.comps {
                            let g = crate::fields::sample_on_eval(comp, &ctx.grid)?;
                            fp_acc += g.tensor.lp_norm(p, &axis_w).powf(p);
                        }
                        let fp = fp_acc.powf(1.0 / p).max(1e-12);
                        values.push((format!("ratio_p{p}"), up / fp));
                    }
                    rows.push(TraceRow {
                        member: idx,
                        label: member.label.clone(),
                        level,
                        grid_scale: scale,
                        values,
                    });
                }
            }
            notes.push("composed ratios computed on the interior evaluation proxy".to_string());
        }
    }
    Ok(ConstantReport {
        experiment: "lp_ratio".to_string(),
        family: format!("{:?}", spec.family),
        dim: spec.dim,
        sup_norm_convention: "interior evaluation lattice".to_string(),
        rows,
        summary: vec![],
        notes,
    })
}

/// Weighted sup-norm experiment: per `alpha`, the ratio
/// `||S[f]||_inf / sum_k || d(z_k)^alpha f_k ||_inf` on the regularized
/// singular family, with the `(1-alpha)^{-n}` shape divided out.
pub fn weighted_bound_experiment(
    domain: &DomainSpec,
    spec: &ExperimentSpec,
    base: GridParams,
    tol: Tolerances,
) -> Result<ConstantReport> {
    spec.validate()?;
    let mut rows = Vec::new();
    let ctx = context_at_scale(domain, spec.dim, base, 1.0, tol)?;
    for (level, &alpha) in spec.alpha_list.iter().enumerate() {
        let family = generate_family(spec, alpha, spec.delta)?;
        for (idx, member) in family.iter().enumerate() {
            let out = solve_member(&ctx, &member.form)?;
            let num = out.field.tensor.sup_norm();
            let mut den = 0.0;
            for (k, comp) in member.form.comps.iter().enumerate() {
                let dom = ctx.domain.clone();
                let w = move |z: &[Complex64]| dom.boundary_distance(z[k]).max(0.0).powf(alpha);
                den += comp_sup_eval(comp, &ctx, Some(&w))?;
            }
            let den = den.max(1e-12);
            let ratio = num / den;
            let shape = (1.0 - alpha).powi(spec.dim as i32);
            rows.push(TraceRow {
                member: idx,
                label: member.label.clone(),
                level,
                grid_scale: alpha,
                values: vec![
                    ("alpha".to_string(), alpha),
                    ("ratio".to_string(), ratio),
                    ("ratio_times_shape".to_string(), ratio * shape),
                ],
            });
        }
    }
    Ok(ConstantReport {
        experiment: "weighted_bound".to_string(),
        family: format!("{:?}", spec.family),
        dim: spec.dim,
        sup_norm_convention: "interior evaluation lattice".to_string(),
        rows,
        summary: vec![],
        notes: vec![format!(
            "weights regularized with floor delta = {:e}; level indexes the alpha list",
            spec.delta
        )],
    })
}

/// Stability chain: `||S[dilate_mollify(f, r_m, eps_m)] - S[f]||_p` along the
/// schedule `r_m` with `eps_m = (1 - r_m)/2`.
pub fn stability_experiment(
    domain: &DomainSpec,
    spec: &ExperimentSpec,
    base: GridParams,
    tol: Tolerances,
) -> Result<ConstantReport> {
    spec.validate()?;
    let family = generate_family(spec, 0.0, spec.delta)?;
    let ctx = context_at_scale(domain, spec.dim, base, 1.0, tol)?;
    let axis_w: Vec<Vec<f64>> = vec![ctx.grid.eval.weights.clone(); spec.dim];
    let p_list = if spec.p_list.is_empty() {
        vec![2.0, 4.0]
    } else {
        spec.p_list.clone()
    };
    let mut rows = Vec::new();
    for (idx, member) in family.iter().enumerate() {
        let reference = solve_member(&ctx, &member.form)?;
        for (level, &r) in spec.r_schedule.iter().enumerate() {
            let eps = (1.0 - r) / 2.0;
            let smooth = dilate_mollify(&member.form, r, eps)?;
            let out = solve_member(&ctx, &smooth)?;
            let diff = out.field.tensor.sub(&reference.field.tensor);
            let mut values = vec![("r".to_string(), r), ("eps".to_string(), eps)];
            for &p in &p_list {
                values.push((format!("diff_p{p}"), diff.lp_norm(p, &axis_w)));
            }
            rows.push(TraceRow {
                member: idx,
                label: member.label.clone(),
                level,
                grid_scale: r,
                values,
            });
        }
    }
    Ok(ConstantReport {
        experiment: "stability".to_string(),
        family: format!("{:?}", spec.family),
        dim: spec.dim,
        sup_norm_convention: "interior evaluation lattice".to_string(),
        rows,
        summary: vec![],
        notes: vec!["level indexes the dilation schedule".to_string()],
    })
}

/// Dispatch an experiment by kind.
pub fn run_experiment(
    domain: &DomainSpec,
    spec: &ExperimentSpec,
    base: GridParams,
    tol: Tolerances,
) -> Result<ConstantReport> {
    match spec.kind {
        ExperimentKind::SupRatio => sup_ratio_experiment(domain, spec, base, tol),
        ExperimentKind::LpRatio => lp_ratio_experiment(domain, spec, base, tol),
        ExperimentKind::Weighted => weighted_bound_experiment(domain, spec, base, tol),
        ExperimentKind::Stability => stability_experiment(domain, spec, base, tol),
    }
}


/// One sampled kernel-bound probe: the sup of a bound quantity over `samples`
/// random interior pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeResult {
    pub name: String,
    pub samples: usize,
    pub sup: f64,
}

fn rand_interior(rng: &mut ChaCha8Rng, rmax: f64) -> Complex64 {
    let r = rmax * rng.gen::<f64>().sqrt();
    let th = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    Complex64::from_polar(r, th)
}

/// Deterministic corner scan shared by every sample count: the suprema of
/// several bound combinations are attained in the degenerate corner where
/// both arguments approach the boundary together, which random sampling
/// reaches only slowly. Scanning radius pairs and angular separations on
/// log-spaced ladders pins the sup baseline; the random stream then explores
/// the bulk.
fn corner_scan() -> Vec<(Vec<Complex64>, Vec<Complex64>)> {
    let radii = [0.3, 0.7, 0.9, 0.99, 0.999, 0.9999];
    let seps = [1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.5, 3.0];
    let mut out = Vec::new();
    for (iz, &rz) in radii.iter().enumerate() {
        for (iw, &rw) in radii.iter().enumerate() {
            for (is, &dth) in seps.iter().enumerate() {
                // slot-dependent rotations decorrelate the three slots
                let z: Vec<Complex64> = (0..3)
                    .map(|k| Complex64::from_polar(rz, 2.1 * k as f64 + 0.1 * iz as f64))
                    .collect();
                let w: Vec<Complex64> = (0..3)
                    .map(|k| {
                        Complex64::from_polar(
                            rw,
                            2.1 * k as f64 + 0.1 * iz as f64 + dth * (1.0 + 0.03 * iw as f64)
                                + 0.01 * is as f64,
                        )
                    })
                    .collect();
                out.push((z, w));
            }
        }
    }
    // relative-scale ladder: the multi-slot combinations peak at specific
    // ratios of per-slot distances, so scan those independently
    let ladder = [1e-3, 1e-2, 0.1, 0.3, 1.0];
    for &rb in &[0.0, 0.5, 0.9] {
        for &d0 in &ladder {
            for &d1 in &ladder {
                for &d2 in &ladder {
                    let z: Vec<Complex64> = (0..3)
                        .map(|k| Complex64::from_polar(rb, 2.1 * k as f64))
                        .collect();
                    let deltas = [d0, d1, d2];
                    let w: Vec<Complex64> = (0..3)
                        .map(|k| {
                            let cand = z[k]
                                + Complex64::from_polar(deltas[k], 2.1 * k as f64 + 0.7);
                            if cand.norm() >= 0.9999 {
                                cand / cand.norm() * 0.9999
                            } else {
                                cand
                            }
                        })
                        .collect();
                    out.push((z, w));
                }
            }
        }
    }
    out
}

/// Kernel-bound probes: sampled suprema of the bounded combinations
/// `|k| |z-w|`, `tau |b|`, `tau^2 |db/dwbar| / |w_j-z_j|`, `tau |a|`, the
/// composite `E`-bounds at `eps`, and the Green's-function estimates.
/// Each quantity is reported at every count in `sample_counts`; counts share
/// one seeded stream (smaller counts are prefixes) on top of the
/// deterministic corner scan, so suprema are monotone across counts by
/// construction and drift measures genuine tail growth.
pub fn kernel_probes(
    domain: &DomainSpec,
    sample_counts: &[usize],
    seed: u64,
    eps: f64,
) -> Result<Vec<ProbeResult>> {
    use crate::kernels::*;
    let names = [
        "k_times_dist",
        "tau_b",
        "tau2_db_over_dist",
        "tau_a",
        "e2_bound",
        "e3_bound",
        "green_i",
        "green_ii",
        "grad_green_iii",
        "grad_green_iv",
        "grad2_green_v",
    ];
    const NQ: usize = 11;
    // battery: the 11 bound quantities at one (z, w) configuration, in disc
    // pullback coordinates
    let battery = |zc: &[Complex64], wc: &[Complex64]| -> Result<[f64; NQ]> {
        let mut v = [0.0f64; NQ];
        if zc.iter().chain(wc).any(|p| p.norm() >= 1.0) {
            return Ok(v);
        }
        let z: Vec<Complex64> = zc.iter().map(|&p| domain.psi(p)).collect();
        let w: Vec<Complex64> = wc.iter().map(|&p| domain.psi(p)).collect();
        if z.iter().zip(&w).any(|(a, b)| (a - b).norm() < 1e-7) {
            return Ok(v);
        }
        let d0 = (w[0] - z[0]).norm();
        let d1 = (w[1] - z[1]).norm();
        let d2 = (w[2] - z[2]).norm();
        let t01 = tau(0, 1, &z, &w);
        let k0 = k_kernel(domain, z[0], w[0])?;
        v[0] = k0.norm() * d0;
        v[1] = b_kernel(domain, 0, 1, &z, &w)?.norm() * t01;
        v[2] = db_dwbar(domain, 1, 0, &z, &w)?.norm() * t01 * t01 / d1;
        v[3] = a_kernel(domain, 1, 0, &z, &w)?.norm() * t01;
        v[4] = e_kernel_n2(domain, 1, &z, &w)?.norm() * d1.powf(1.0 + eps) * d0.powf(2.0 - eps);
        v[5] = e_kernel_n3(domain, 1, &[0, 2], &z, &w)?.norm()
            * d1.powf(1.0 + 2.0 * eps)
            * d0.powf(2.0 - eps)
            * d2.powf(2.0 - eps);
        let dx = domain.boundary_distance(z[0]);
        let dy = domain.boundary_distance(w[0]);
        let g = green(domain, z[0], w[0])?.abs();
        v[6] = g * d0 / dx;
        v[7] = g * d0 * d0 / (dx * dy);
        let grad = 2.0 * k0.norm();
        v[8] = grad * d0;
        v[9] = grad * d0 * d0 / dy;
        let pz = prepare(domain, z[0])?;
        let pw = prepare(domain, w[0])?;
        let grad2 =
            2.0 * (dk_dw_prepared(&pz, &pw)?.norm() + bergman_kernel(domain, z[0], w[0])?.norm());
        v[10] = grad2 * d0 * d0;
        Ok(v)
    };

    // deterministic scan, tracking each quantity's best configuration
    let mut running = vec![0.0f64; NQ];
    let mut best: Vec<(Vec<Complex64>, Vec<Complex64>)> =
        vec![(vec![Complex64::new(0.0, 0.0); 3], vec![Complex64::new(0.5, 0.0); 3]); NQ];
    for (zc, wc) in corner_scan() {
        let vals = battery(&zc, &wc)?;
        for q in 0..NQ {
            if vals[q] > running[q] {
                running[q] = vals[q];
                best[q] = (zc.clone(), wc.clone());
            }
        }
    }
    // count-independent polish: hill-climb each quantity from its scan
    // argmax plus deterministic multistarts, all on a fixed internal stream,
    // so the baseline does not depend on the sample counts or the user seed
    let jitter = |p: Complex64, rng: &mut ChaCha8Rng, s: f64| -> Complex64 {
        let q = p + Complex64::new(s * (rng.gen::<f64>() - 0.5), s * (rng.gen::<f64>() - 0.5));
        if q.norm() >= 0.99999 {
            q / q.norm() * 0.99999
        } else {
            q
        }
    };
    let mut polish_rng = ChaCha8Rng::seed_from_u64(0xD15C);
    for q in 0..NQ {
        let mut starts: Vec<(Vec<Complex64>, Vec<Complex64>)> = vec![best[q].clone()];
        for _ in 0..23 {
            let zc: Vec<Complex64> =
                (0..3).map(|_| rand_interior(&mut polish_rng, 0.9999)).collect();
            let wc: Vec<Complex64> =
                (0..3).map(|_| rand_interior(&mut polish_rng, 0.9999)).collect();
            starts.push((zc, wc));
        }
        let mut overall = running[q];
        for (mut bz, mut bw) in starts {
            let mut bv = battery(&bz, &bw)?[q];
            let mut sigma = 0.25f64;
            for step in 0..700 {
                if step % 70 == 69 {
                    sigma *= 0.5;
                }
                let zc: Vec<Complex64> =
                    bz.iter().map(|&p| jitter(p, &mut polish_rng, sigma)).collect();
                let wc: Vec<Complex64> =
                    bw.iter().map(|&p| jitter(p, &mut polish_rng, sigma)).collect();
                let vals = battery(&zc, &wc)?;
                if vals[q] > bv {
                    bv = vals[q];
                    bz = zc;
                    bw = wc;
                }
            }
            overall = overall.max(bv);
        }
        running[q] = overall;
    }

    let max_count = *sample_counts.iter().max().unwrap_or(&0);
    let mut sups = vec![vec![0.0f64; NQ]; sample_counts.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0usize;
    for (ci, &count) in sample_counts.iter().enumerate() {
        while done < count.min(max_count) {
            done += 1;
            let zc: Vec<Complex64> = (0..3).map(|_| rand_interior(&mut rng, 0.999)).collect();
            let wc: Vec<Complex64> = (0..3).map(|_| rand_interior(&mut rng, 0.999)).collect();
            let vals = battery(&zc, &wc)?;
            for q in 0..NQ {
                running[q] = running[q].max(vals[q]);
            }
        }
        sups[ci].copy_from_slice(&running);
    }
    let mut out = Vec::new();
    for (ci, &count) in sample_counts.iter().enumerate() {
        for (ni, name) in names.iter().enumerate() {
            out.push(ProbeResult {
                name: name.to_string(),
                samples: count,
                sup: sups[ci][ni],
            });
        }
    }
    Ok(out)
}
