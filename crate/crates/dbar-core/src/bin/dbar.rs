//! Batch CLI: canonical solves, cross-validation, kernel probes, norm
//! experiments and convergence studies, driven by a JSON config. Artifacts
//! are deterministic for a fixed config and seed; wall-clock timings go to a
//! separate non-deterministic file. Thread count follows `RAYON_NUM_THREADS`.

use clap::{Parser, Subcommand};
use dbar_core::config::RunConfig;
use dbar_core::{Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dbar",
    about = "Canonical solutions of the Cauchy-Riemann equation on product domains",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports and CSV dumps
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Scale quadrature sizes (n_r, n_theta) by this factor
    #[arg(long, global = true)]
    grid_scale: Option<f64>,
    /// Fail with exit status 3 when reported tolerances are exceeded
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one form with the configured methods and dump the fields
    Solve,
    /// Run all applicable methods and report pairwise differences
    Crossval,
    /// Sampled kernel-bound probes with a refinement column
    Probe,
    /// Norm-constant experiments (sup-ratio, lp-ratio, weighted, stability)
    Experiment,
    /// Grid-refinement study of T and the composed solve against the oracle
    Convergence,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(RunConfig::from_json(&text)?.with_overrides(cli.seed, cli.grid_scale))
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    let name = match cli.command {
        Command::Solve => "solve",
        Command::Crossval => "crossval",
        Command::Probe => "probe",
        Command::Experiment => "experiment",
        Command::Convergence => "convergence",
    };
    dbar_core::runner::run_subcommand(&cfg, name, &cli.out, cli.check)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("tolerance check failed (see report.json)");
            ExitCode::from(3)
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
