//! `memres run <experiment>`: reproducible experiments on memory-kernel
//! resolvents and mild solutions.
//!
//! Every experiment reads an optional `--config` file (JSON, or TOML when the
//! extension is `.toml`) whose keys mirror the flags; flags win. The resolved
//! config is written to `<out>/config.json` and its SHA-256 is stamped into
//! every artifact. Exit codes: 0 success, 2 config error, 3 numerical
//! accuracy failure, 4 blow-up under `--fail-on-blowup`. Errors are also
//! printed to stderr as one JSON object.
//!
//! `MEMRES_WORKERS` caps the worker pool.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::Outcome;
use crate::config::{load_file, overlay, resolve};
use crate::error::{CliError, EXIT_CONFIG};
use crate::output::RunDir;

pub const WORKERS_ENV: &str = "MEMRES_WORKERS";

#[derive(Parser)]
#[command(name = "memres", version, about = "Resolvent and mild-solution experiments for equations with memory")]
struct Cli {
    #[command(subcommand)]
    command: Top,
}

#[derive(Subcommand)]
enum Top {
    /// Run one experiment.
    Run {
        #[command(subcommand)]
        experiment: Experiment,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Sector data and hypothesis verdicts of a kernel.
    KernelCheck(KernelCheckArgs),
    /// Scalar resolvent table with a contour-inversion cross-check.
    ResolventProbe(ProbeArgs),
    /// Log-log slope of the smoothing norm against its predicted rate.
    SmoothingFit(SmoothingArgs),
    /// Reaction-diffusion run with c0 |u|^(rho-1) u.
    RdRun(RunArgs),
    /// Reaction-diffusion runs over a (rho, amplitude, q) grid.
    RdSweep(SweepArgs),
    /// Hamilton-Jacobi run with c0 |grad u|^rho.
    HjRun(RunArgs),
    /// Admissibility and eps window of an application.
    Exponents(ExponentsArgs),
}

#[derive(Args, Default)]
struct Common {
    /// JSON or TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: memres-out/<experiment>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite a directory holding results for a different config.
    #[arg(long)]
    force: bool,
    /// Exit with code 4 when blow-up is detected.
    #[arg(long)]
    fail_on_blowup: bool,
}

#[derive(Args, Serialize)]
struct OperatorArgs {
    /// 1 (interval) or 2 (square).
    #[arg(long = "dim")]
    #[serde(rename = "operator.dimension")]
    dimension: Option<usize>,
    #[arg(long)]
    #[serde(rename = "operator.length")]
    length: Option<f64>,
    /// Modes per axis, a power of two.
    #[arg(long = "modes")]
    #[serde(rename = "operator.n_modes")]
    n_modes: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(rename = "operator.delta")]
    delta: Option<f64>,
}

#[derive(Args, Serialize)]
struct KernelCheckArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Kernel literal, e.g. `power:alpha=0.5`.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    psi0: Option<f64>,
}

#[derive(Args, Serialize)]
struct ProbeArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    kernel: Option<String>,
    /// One or more eigenvalues, comma separated.
    #[arg(long, value_delimiter = ',')]
    mu: Option<Vec<f64>>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    horizon: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    check_points: Option<usize>,
    #[arg(long)]
    agreement_tol: Option<f64>,
}

#[derive(Args, Serialize)]
struct SmoothingArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    operator: OperatorArgs,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Serialize)]
struct RunArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    operator: OperatorArgs,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    c0: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    amplitude: Option<f64>,
    /// Flat index of the excited mode.
    #[arg(long)]
    mode: Option<usize>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    horizon: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Escape level of the X_{1+eps} norm.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    small_t: Option<bool>,
    /// `auto` or `volterra`.
    #[arg(long)]
    tables: Option<String>,
    /// Also write the coefficient history.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    dump: Option<bool>,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    operator: OperatorArgs,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    c0: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    /// L^q norms of the initial datum.
    #[arg(long, value_delimiter = ',')]
    amplitude: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    #[arg(long)]
    mode: Option<usize>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    horizon: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    tables: Option<String>,
}

#[derive(Args, Serialize)]
struct ExponentsArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// `rd`, `ns` or `hj`.
    #[arg(long)]
    app: Option<String>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n: Option<usize>,
    #[arg(long)]
    zeta: Option<f64>,
    /// Supplies zeta_g when --zeta is absent.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(format!("{WORKERS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("worker pool: {e}")))
}

fn launch<A, C>(
    name: &str,
    common: &Common,
    flags: &A,
    body: fn(&C, &RunDir) -> Result<Outcome, CliError>,
) -> Result<(), CliError>
where
    A: Serialize,
    C: DeserializeOwned + Serialize,
{
    let mut merged = match &common.config {
        Some(path) => load_file(path)?,
        None => json!({}),
    };
    let file_out = match merged.as_object_mut().and_then(|m| m.remove("out")) {
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => return Err(CliError::config(format!("out must be a path string, got {other}"))),
        None => None,
    };
    overlay(&mut merged, flags)?;
    let resolved = resolve::<C>(name, merged)?;
    let out = common
        .out
        .clone()
        .or(file_out)
        .unwrap_or_else(|| PathBuf::from("memres-out").join(name));
    let dir = RunDir::claim(&out, &resolved.canonical, &resolved.hash, common.force)?;
    let outcome = body(&resolved.config, &dir)?;
    println!(
        "{}",
        json!({ "experiment": name, "out": out.display().to_string(), "config_hash": resolved.hash, "blowup": outcome.blowup })
    );
    if let Some(err) = outcome.failure {
        return Err(err);
    }
    if outcome.blowup && common.fail_on_blowup {
        return Err(CliError::blowup(format!("blow-up detected; results are in {}", out.display())));
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    configure_workers()?;
    let Top::Run { experiment } = cli.command;
    match experiment {
        Experiment::KernelCheck(a) => launch("kernel-check", &a.common, &a, commands::kernel_check),
        Experiment::ResolventProbe(a) => launch("resolvent-probe", &a.common, &a, commands::resolvent_probe),
        Experiment::SmoothingFit(a) => launch("smoothing-fit", &a.common, &a, commands::smoothing_fit),
        Experiment::RdRun(a) => launch("rd-run", &a.common, &a, commands::rd_run),
        Experiment::RdSweep(a) => launch("rd-sweep", &a.common, &a, commands::rd_sweep),
        Experiment::HjRun(a) => launch("hj-run", &a.common, &a, commands::hj_run),
        Experiment::Exponents(a) => launch("exponents", &a.common, &a, commands::exponents),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            let err = CliError::config(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.code)
        }
    }
}
