//! Shared run orchestration for the CLI and the C ABI: one subcommand in,
//! deterministic artifacts out. Returns whether all tolerance gates passed.

use crate::config::RunConfig;
use crate::fields::{parse_expression, sample_on_eval, ScalarField};
use crate::geometry::GridParams;
use crate::lab::{kernel_probes, run_experiment};
use crate::operators::{t_apply, t_apply_modesplit};
use crate::report::{
    self, convergence_csv, field_csv, probes_csv, trace_csv, ConvergenceRow, CrossvalResults,
    RunReport, SolveResults,
};
use crate::solver::{cross_validate, SolveMethod, SolverContext};
use crate::{Error, Result};
use std::path::Path;

fn context(cfg: &RunConfig) -> Result<SolverContext> {
    SolverContext::new(
        &cfg.domain.to_domain()?,
        cfg.dim,
        cfg.grid,
        cfg.s3_grid,
        cfg.tolerances,
    )
}

pub fn run_solve(cfg: &RunConfig, out_dir: &Path, check: bool) -> Result<bool> {
    let ctx = context(cfg)?;
    let f = cfg.build_form()?;
    let domain = cfg.domain.to_domain()?;
    let mut methods = Vec::new();
    let mut files = Vec::new();
    let mut timings = Vec::new();
    let mut ok = true;
    for &m in &cfg.methods {
        let outcome = ctx.canonical_solve_opts(&f, m, cfg.error_estimate)?;
        let fname = format!("field_{}.csv", m.name());
        std::fs::write(out_dir.join(&fname), field_csv(&outcome.field, &domain))?;
        timings.push((m.name().to_string(), outcome.seconds));
        if let Some(r) = outcome.report.dbar_residual_sup {
            let bound = match m {
                SolveMethod::MonomialOracle => ctx.tol.oracle,
                _ => ctx.tol.composed,
            };
            if r > bound {
                ok = false;
            }
        }
        methods.push(outcome.report);
        files.push(fname);
    }
    report::write_json(
        &out_dir.join("report.json"),
        &RunReport {
            tool: "dbar",
            subcommand: "solve",
            config: cfg,
            results: SolveResults {
                methods,
                field_files: files,
            },
        },
    )?;
    report::write_timings(&out_dir.join("timings.json"), timings)?;
    Ok(ok || !check)
}

pub fn run_crossval(cfg: &RunConfig, out_dir: &Path, check: bool) -> Result<bool> {
    let ctx = context(cfg)?;
    let f = cfg.build_form()?;
    let domain = cfg.domain.to_domain()?;
    let (rep, outcomes) = cross_validate(&ctx, &f, &cfg.methods)?;
    let mut files = Vec::new();
    let mut timings = Vec::new();
    for o in &outcomes {
        let fname = format!("field_{}.csv", o.method.name());
        std::fs::write(out_dir.join(&fname), field_csv(&o.field, &domain))?;
        timings.push((o.method.name().to_string(), o.seconds));
        files.push(fname);
    }
    let ok = rep
        .pairwise
        .iter()
        .all(|p| p.sup_rel_diff <= ctx.tol.composed);
    report::write_json(
        &out_dir.join("report.json"),
        &RunReport {
            tool: "dbar",
            subcommand: "crossval",
            config: cfg,
            results: CrossvalResults {
                report: rep,
                field_files: files,
            },
        },
    )?;
    report::write_timings(&out_dir.join("timings.json"), timings)?;
    Ok(ok || !check)
}

pub fn run_probe(cfg: &RunConfig, out_dir: &Path, check: bool) -> Result<bool> {
    let domain = cfg.domain.to_domain()?;
    let pc = cfg.probe.clone().unwrap_or_default();
    let probes = kernel_probes(
        &domain,
        &[pc.samples, pc.refined_samples],
        cfg.seed,
        pc.eps,
    )?;
    std::fs::write(out_dir.join("probes.csv"), probes_csv(&probes))?;
    report::write_json(
        &out_dir.join("report.json"),
        &RunReport {
            tool: "dbar",
            subcommand: "probe",
            config: cfg,
            results: &probes,
        },
    )?;
    // refinement drift gate
    let mut ok = true;
    for p in probes.iter().filter(|p| p.samples == pc.samples) {
        let refined = probes
            .iter()
            .find(|q| q.name == p.name && q.samples == pc.refined_samples)
            .expect("paired probe");
        if !p.sup.is_finite() || refined.sup > p.sup * 1.05 {
            ok = false;
        }
    }
    Ok(ok || !check)
}

pub fn run_experiment_cmd(cfg: &RunConfig, out_dir: &Path) -> Result<bool> {
    let domain = cfg.domain.to_domain()?;
    let spec = cfg
        .experiment
        .as_ref()
        .ok_or_else(|| Error::Config("experiment subcommand needs an experiment section".into()))?;
    let t0 = std::time::Instant::now();
    let rep = run_experiment(&domain, spec, cfg.grid, cfg.tolerances)?;
    std::fs::write(out_dir.join("trace.csv"), trace_csv(&rep))?;
    report::write_json(
        &out_dir.join("report.json"),
        &RunReport {
            tool: "dbar",
            subcommand: "experiment",
            config: cfg,
            results: &rep,
        },
    )?;
    report::write_timings(
        &out_dir.join("timings.json"),
        vec![(rep.experiment.clone(), t0.elapsed().as_secs_f64())],
    )?;
    Ok(true)
}

pub fn run_convergence(cfg: &RunConfig, out_dir: &Path) -> Result<bool> {
    let domain = cfg.domain.to_domain()?;
    let cc = cfg.convergence.clone().unwrap_or_default();
    // fixed probe battery for the single-slot study
    let battery = ["1", "z1", "z1^2", "conj(z1)", "z1*conj(z1)"];
    // composed study: configured field, else a closed quadratic default
    let form = if cfg.field.is_some() {
        cfg.build_form()?
    } else {
        let phi = parse_expression("z1*conj(z1)*z2 + 0.5*conj(z2)*z1", 2)?;
        crate::fields::OneForm::from_monomials((0..2).map(|j| phi.dbar(j)).collect())?
    };
    let mut rows = Vec::new();
    for &scale in &cc.scales {
        let params = GridParams {
            n_r: ((cfg.grid.n_r as f64 * scale).round() as usize).max(4),
            n_theta: ((cfg.grid.n_theta as f64 * scale).round() as usize).max(8),
            ..cfg.grid
        };
        let ctx = SolverContext::new(&domain, form.dim, params, None, cfg.tolerances)?;
        // single-slot error over the battery
        let mut t_err: f64 = 0.0;
        for expr in battery {
            let m = parse_expression(expr, 1)?;
            let (vals, _) = t_apply(
                &domain,
                &ctx.grid.quad,
                &ctx.grid.eval,
                &ScalarField::Monomials(m.clone()),
            )?;
            if domain.is_disc() {
                let ex = m.t_slot(0);
                for (v, &zeta) in vals.iter().zip(&ctx.grid.eval.points) {
                    t_err = t_err.max((v - ex.eval(&[zeta])).norm());
                }
            } else {
                // no closed oracle off the disc: compare against the
                // spectral route instead
                let reference = t_apply_modesplit(
                    &domain,
                    &ctx.grid.quad,
                    &ScalarField::Monomials(m.clone()),
                    &ctx.grid.eval.points,
                )?;
                for (v, r) in vals.iter().zip(&reference) {
                    t_err = t_err.max((v - r).norm());
                }
            }
        }
        // composed error against the oracle (disc) or refinement (conformal)
        let solve_err = if domain.is_disc() {
            let out = ctx.canonical_solve(&form, SolveMethod::Forward)?;
            let oracle = ctx.oracle_solve(&form)?;
            let exact = sample_on_eval(&ScalarField::Monomials(oracle), &ctx.grid)?;
            out.field.tensor.sub(&exact.tensor).sup_norm()
        } else {
            let out = ctx.canonical_solve_opts(&form, SolveMethod::Forward, true)?;
            out.report.quad_error_estimate.unwrap_or(f64::NAN)
        };
        rows.push(ConvergenceRow {
            scale,
            n_r: params.n_r,
            n_theta: params.n_theta,
            t_sup_err: t_err,
            solve_sup_err: solve_err,
        });
    }
    std::fs::write(out_dir.join("convergence.csv"), convergence_csv(&rows))?;
    report::write_json(
        &out_dir.join("report.json"),
        &RunReport {
            tool: "dbar",
            subcommand: "convergence",
            config: cfg,
            results: &rows,
        },
    )?;
    Ok(true)
}


/// Dispatch by subcommand name; creates the output directory.
pub fn run_subcommand(cfg: &RunConfig, subcommand: &str, out_dir: &Path, check: bool) -> Result<bool> {
    std::fs::create_dir_all(out_dir)?;
    match subcommand {
        "solve" => run_solve(cfg, out_dir, check),
        "crossval" => run_crossval(cfg, out_dir, check),
        "probe" => run_probe(cfg, out_dir, check),
        "experiment" => run_experiment_cmd(cfg, out_dir),
        "convergence" => run_convergence(cfg, out_dir),
        other => Err(Error::Config(format!("unknown subcommand '{other}'"))),
    }
}
