//! Deterministic artifact emission: JSON reports and flat CSV dumps.
//!
//! Identical configuration must produce byte-identical artifacts, so float
//! formatting uses the shortest round-trip form, map-like data is kept in
//! sorted orders, and wall-clock timings go to a separate `timings.json`
//! that is excluded from the determinism contract.

use crate::config::RunConfig;
use crate::fields::GridSamplesField;
use crate::geometry::DomainSpec;
use crate::lab::{ConstantReport, ProbeResult};
use crate::solver::{CrossvalReport, MethodReport};
use crate::{Complex64, Result};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Top-level report for solve/crossval runs: resolved config plus results.
#[derive(Debug, Serialize)]
pub struct RunReport<'a, T: Serialize> {
    pub tool: &'static str,
    pub subcommand: &'a str,
    pub config: &'a RunConfig,
    pub results: T,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::Error::Config(format!("serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Timings {
    pub note: &'static str,
    pub entries: Vec<(String, f64)>,
}

pub fn write_timings(path: &Path, entries: Vec<(String, f64)>) -> Result<()> {
    write_json(
        path,
        &Timings {
            note: "wall-clock seconds; excluded from the determinism contract",
            entries,
        },
    )
}

fn fmt_f64(v: f64) -> String {
    if v == 0.0 && v.is_sign_negative() {
        "0".to_string() // normalize -0 for byte-stable output
    } else {
        format!("{v}")
    }
}

/// Field dump: one row per evaluation point, with per-slot indices, the
/// point in disc and Omega coordinates, and the field value.
pub fn field_csv(field: &GridSamplesField, domain: &DomainSpec) -> String {
    let dim = field.dim;
    let mut s = String::new();
    for k in 0..dim {
        let _ = write!(s, "i{k},");
    }
    for k in 0..dim {
        let _ = write!(s, "re_zeta{k},im_zeta{k},re_z{k},im_z{k},");
    }
    s.push_str("re_u,im_u\n");
    let m = field.axes.points.len();
    for (flat, v) in field.tensor.data.iter().enumerate() {
        let mut rest = flat;
        let mut idx = vec![0usize; dim];
        for ax in (0..dim).rev() {
            idx[ax] = rest % m;
            rest /= m;
        }
        for &i in &idx {
            let _ = write!(s, "{i},");
        }
        for &i in &idx {
            let zeta = field.axes.points[i];
            let z = domain.psi(zeta);
            let _ = write!(
                s,
                "{},{},{},{},",
                fmt_f64(zeta.re),
                fmt_f64(zeta.im),
                fmt_f64(z.re),
                fmt_f64(z.im)
            );
        }
        let _ = writeln!(s, "{},{}", fmt_f64(v.re), fmt_f64(v.im));
    }
    s
}

/// Experiment trace: one row per (member, level), with the union of value
/// keys as sorted columns.
pub fn trace_csv(report: &ConstantReport) -> String {
    let mut keys: Vec<String> = Vec::new();
    for row in &report.rows {
        for (k, _) in &row.values {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    keys.sort();
    let mut s = String::from("member,label,level,grid_scale");
    for k in &keys {
        let _ = write!(s, ",{k}");
    }
    s.push('\n');
    for row in &report.rows {
        let _ = write!(
            s,
            "{},{},{},{}",
            row.member,
            row.label,
            row.level,
            fmt_f64(row.grid_scale)
        );
        for k in &keys {
            match row.value(k) {
                Some(v) => {
                    let _ = write!(s, ",{}", fmt_f64(v));
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

pub fn probes_csv(probes: &[ProbeResult]) -> String {
    let mut s = String::from("name,samples,sup\n");
    for p in probes {
        let _ = writeln!(s, "{},{},{}", p.name, p.samples, fmt_f64(p.sup));
    }
    s
}

/// Results section of a solve run.
#[derive(Debug, Serialize)]
pub struct SolveResults {
    pub methods: Vec<MethodReport>,
    pub field_files: Vec<String>,
}

/// Results section of a crossval run.
#[derive(Debug, Serialize)]
pub struct CrossvalResults {
    #[serde(flatten)]
    pub report: CrossvalReport,
    pub field_files: Vec<String>,
}

/// One row of a convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub scale: f64,
    pub n_r: usize,
    pub n_theta: usize,
    /// sup error of single-slot T against the oracle over the probe battery
    pub t_sup_err: f64,
    /// sup error of the composed forward solve against the oracle
    pub solve_sup_err: f64,
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("scale,n_r,n_theta,t_sup_err,solve_sup_err\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_f64(r.scale),
            r.n_r,
            r.n_theta,
            fmt_f64(r.t_sup_err),
            fmt_f64(r.solve_sup_err)
        );
    }
    s
}

/// Complex value as a `[re, im]` pair for JSON dumps.
pub fn c_pair(v: Complex64) -> (f64, f64) {
    (v.re, v.im)
}
