use std::fmt::Write as _;
use std::sync::Arc;

use memres_core::exponents::{hj_wellposed_params, ns_wellposed_params, rd_wellposed_params};
use memres_core::mild::{write_coefficient_dump, write_solution_csv, TableSource};
use memres_core::resolvent::{fit_smoothing_rate, scalar_resolvent_talbot_many, write_tables_csv};
use memres_core::spectral::weighted_norm;
use memres_core::{
    check_hypotheses, scalar_resolvent_volterra, solve_mild, MaterialKernel, MildProblem, MildSolution,
    NonlinearitySpec, ScaleVector, SolveStatus, SpectralOperator, TalbotOptions,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{
    parse_kernel, App, ExponentsConfig, KernelCheckConfig, ProbeConfig, RunConfig, SmoothingConfig, SweepConfig,
    Tables,
};
use crate::error::CliError;
use crate::output::RunDir;

/// What the caller should do about the exit code once artifacts are on disk.
#[derive(Debug, Default)]
pub struct Outcome {
    pub blowup: bool,
    pub failure: Option<CliError>,
}

pub fn kernel_check(cfg: &KernelCheckConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let kernel = parse_kernel(&cfg.kernel)?;
    let report = check_hypotheses(&kernel, cfg.psi0)?;
    let mut value = serde_json::to_value(&report).map_err(|e| CliError::config(e.to_string()))?;
    value["kernel"] = json!(kernel.to_string());
    value["warn_degenerate"] = json!(report.warn_degenerate());
    dir.write_json("report.json", value)?;
    Ok(Outcome::default())
}

pub fn resolvent_probe(cfg: &ProbeConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let kernel = parse_kernel(&cfg.kernel)?;
    if cfg.mu.is_empty() {
        return Err(CliError::config("mu needs at least one value"));
    }
    if cfg.check_points == 0 {
        return Err(CliError::config("check_points must be positive"));
    }
    let opts = TalbotOptions::default();
    let mut tables = Vec::with_capacity(cfg.mu.len());
    let mut reports = Vec::with_capacity(cfg.mu.len());
    let mut agree = true;
    for &mu in &cfg.mu {
        let table = scalar_resolvent_volterra(&kernel, mu, cfg.h, cfg.horizon)?;
        let steps = table.steps();
        let nodes: Vec<usize> = (1..=cfg.check_points)
            .map(|k| (k * steps).div_ceil(cfg.check_points))
            .collect();
        let times: Vec<f64> = nodes.iter().map(|&j| table.time(j)).collect();
        let inverted = scalar_resolvent_talbot_many(&kernel, mu, &times, &opts);
        let mut max_diff: f64 = 0.0;
        let mut failures = 0;
        let points: Vec<Value> = nodes
            .iter()
            .zip(&times)
            .zip(inverted)
            .map(|((&j, &t), tal)| match tal {
                Ok(v) => {
                    let d = (v - table.values[j]).abs();
                    max_diff = max_diff.max(d);
                    json!({ "t": t, "volterra": table.values[j], "talbot": v, "abs_diff": d })
                }
                Err(e) => {
                    failures += 1;
                    json!({ "t": t, "volterra": table.values[j], "talbot": null, "talbot_error": e.to_string() })
                }
            })
            .collect();
        let ok = failures == 0 && max_diff <= cfg.agreement_tol;
        agree &= ok;
        reports.push(json!({
            "mu": mu,
            "volterra_error_estimate": table.error_estimate,
            "max_abs_diff": max_diff,
            "talbot_failures": failures,
            "agree": ok,
            "points": points,
        }));
        tables.push(table);
    }
    let mut csv = Vec::new();
    write_tables_csv(&tables, &mut csv).map_err(|e| CliError::io("formatting table", e))?;
    dir.write_csv("table.csv", &csv)?;
    dir.write_json(
        "agreement.json",
        json!({
            "kernel": kernel.to_string(),
            "agreement_tol": cfg.agreement_tol,
            "agree": agree,
            "per_mu": reports,
        }),
    )?;
    let failure = (!agree).then(|| {
        CliError::accuracy(format!("contour inversion and time stepping differ by more than {}", cfg.agreement_tol))
    });
    Ok(Outcome { blowup: false, failure })
}

pub fn smoothing_fit(cfg: &SmoothingConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let kernel = parse_kernel(&cfg.kernel)?;
    let op = cfg.operator.build()?;
    let fit = fit_smoothing_rate(&op, &kernel, cfg.gamma, cfg.theta, cfg.t_min, cfg.t_max, cfg.samples)?;
    let mut csv = String::from("# schema=1\nt,norm\n");
    for (t, n) in fit.times.iter().zip(&fit.norms) {
        let _ = writeln!(csv, "{t:e},{n:e}");
    }
    dir.write_csv("norms.csv", csv.as_bytes())?;
    dir.write_json(
        "fit.json",
        json!({
            "kernel": kernel.to_string(),
            "zeta_g": kernel.zeta_g(),
            "slope": fit.slope,
            "intercept": fit.intercept,
            "residual": fit.residual,
            "target": fit.target,
            "slope_minus_target": fit.slope - fit.target,
            "log_lipschitz_max": fit.log_lipschitz_max,
        }),
    )?;
    Ok(Outcome::default())
}

fn table_source(t: Tables) -> TableSource {
    match t {
        Tables::Auto => TableSource::Auto,
        Tables::Volterra => TableSource::Volterra,
    }
}

fn mode_datum(op: &Arc<SpectralOperator>, mode: usize, amplitude: f64) -> Result<ScaleVector, CliError> {
    if mode >= op.len() {
        return Err(CliError::config(format!("mode {mode} is out of range for {} modes", op.len())));
    }
    Ok(ScaleVector::mode(op.clone(), mode, amplitude))
}

fn status_json(sol: &MildSolution) -> Value {
    let last = sol.times.len() - 1;
    json!({
        "status": sol.status,
        "steps": last,
        "final_time": sol.times[last],
        "final_norm_x1": sol.norms_x1[last],
        "final_norm_x1pe": sol.norms_x1pe[last],
        "eps": sol.eps,
        "zeta_g": sol.zeta_g,
        "h": sol.h,
        "critical": sol.critical,
    })
}

fn run_mild(cfg: &RunConfig, dir: &RunDir, nonlinearity: NonlinearitySpec) -> Result<Outcome, CliError> {
    let kernel = parse_kernel(&cfg.kernel)?;
    let op = cfg.operator.build()?;
    let u0 = mode_datum(&op, cfg.mode, cfg.amplitude)?;
    let problem = MildProblem::new(kernel, u0, nonlinearity, cfg.horizon, cfg.h)?
        .with_eps(cfg.eps)
        .with_threshold(cfg.threshold)
        .with_small_t(cfg.small_t)
        .with_table_source(table_source(cfg.tables));
    problem.validate()?;
    let sol = solve_mild(&problem)?;

    let mut csv = Vec::new();
    write_solution_csv(&sol, &mut csv).map_err(|e| CliError::io("formatting solution", e))?;
    dir.write_csv("solution.csv", &csv)?;
    if let Some(diag) = &sol.small_t {
        let mut text = String::from("# schema=1\nt,norm_X1\n");
        for (t, u) in diag.times.iter().zip(&diag.states) {
            let _ = writeln!(text, "{t:e},{:e}", weighted_norm(op.eigenvalues(), u, 2.0 * (1.0 - op.delta())));
        }
        dir.write_csv("small_t.csv", text.as_bytes())?;
    }
    if cfg.dump {
        write_coefficient_dump(&sol, &dir.path("coefficients.bin"))?;
    }
    dir.write_json("status.json", status_json(&sol))?;

    let failure = match sol.status {
        SolveStatus::InnerDivergence { step, t } => {
            Some(CliError::accuracy(format!("fixed-point iteration diverged at step {step} (t = {t})")))
        }
        SolveStatus::Overflow { step, t } => Some(CliError::accuracy(format!("solution overflowed at step {step} (t = {t})"))),
        _ => None,
    };
    Ok(Outcome { blowup: matches!(sol.status, SolveStatus::Blowup { .. }), failure })
}

pub fn rd_run(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    run_mild(cfg, dir, NonlinearitySpec::power(cfg.c0, cfg.rho))
}

pub fn hj_run(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    run_mild(cfg, dir, NonlinearitySpec::gradient(cfg.c0, cfg.rho))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SweepPoint {
    index: usize,
    rho: f64,
    amplitude: f64,
    q: f64,
    admissible: bool,
    status: String,
    tau_estimate: Option<f64>,
    final_time: f64,
    config_hash: String,
}

fn point_name(index: usize) -> String {
    format!("points/{index:06}.json")
}

fn load_point(dir: &RunDir, index: usize) -> Option<SweepPoint> {
    let text = std::fs::read_to_string(dir.path(&point_name(index))).ok()?;
    let point: SweepPoint = serde_json::from_str(&text).ok()?;
    (point.config_hash == dir.hash() && point.index == index).then_some(point)
}

fn sweep_point(
    cfg: &SweepConfig,
    kernel: &MaterialKernel,
    op: &Arc<SpectralOperator>,
    index: usize,
    (rho, amplitude, q): (f64, f64, f64),
    hash: &str,
) -> Result<SweepPoint, CliError> {
    let admissible = rd_wellposed_params(op.dimension(), q, rho, kernel.zeta_g()).is_ok_and(|p| p.admissible);
    let unit = mode_datum(op, cfg.mode, 1.0)?;
    let lq = op.physical_lq_norm(unit.coeffs(), q)?;
    let u0 = mode_datum(op, cfg.mode, amplitude / lq)?;
    let problem = MildProblem::new(kernel.clone(), u0, NonlinearitySpec::power(cfg.c0, rho), cfg.horizon, cfg.h)?
        .with_eps(cfg.eps)
        .with_threshold(cfg.threshold)
        .with_table_source(table_source(cfg.tables));
    let sol = solve_mild(&problem)?;
    Ok(SweepPoint {
        index,
        rho,
        amplitude,
        q,
        admissible,
        status: sol.status.label().to_string(),
        tau_estimate: sol.status.tau_estimate(),
        final_time: sol.last_time(),
        config_hash: hash.to_string(),
    })
}

pub fn rd_sweep(cfg: &SweepConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let kernel = parse_kernel(&cfg.kernel)?;
    let op = cfg.operator.build()?;
    if cfg.rho.is_empty() || cfg.amplitude.is_empty() || cfg.q.is_empty() {
        return Err(CliError::config("rho, amplitude and q each need at least one value"));
    }
    if let Some(q) = cfg.q.iter().find(|q| q.is_nan() || **q < 1.0) {
        return Err(CliError::config(format!("q must be at least 1, got {q}")));
    }
    let grid: Vec<(f64, f64, f64)> = cfg
        .rho
        .iter()
        .flat_map(|&r| cfg.amplitude.iter().flat_map(move |&a| cfg.q.iter().map(move |&q| (r, a, q))))
        .collect();
    let points: Vec<SweepPoint> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &key)| {
            if let Some(p) = load_point(dir, i) {
                return Ok(p);
            }
            let p = sweep_point(cfg, &kernel, &op, i, key, dir.hash())?;
            let text = serde_json::to_string_pretty(&p).map_err(|e| CliError::config(e.to_string()))?;
            dir.write_bytes(&point_name(i), text.as_bytes())?;
            Ok(p)
        })
        .collect::<Result<_, CliError>>()?;

    let mut csv = String::from("# schema=1\nindex,rho,amplitude,q,admissible,status,tau_estimate,final_time\n");
    for p in &points {
        let tau = p.tau_estimate.map(|t| format!("{t:e}")).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{tau},{:e}",
            p.index, p.rho, p.amplitude, p.q, p.admissible, p.status, p.final_time
        );
    }
    dir.write_csv("sweep.csv", csv.as_bytes())?;
    Ok(Outcome { blowup: points.iter().any(|p| p.status == "blowup"), failure: None })
}

pub fn exponents(cfg: &ExponentsConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let zeta = match (cfg.zeta, &cfg.kernel) {
        (Some(z), _) => z,
        (None, Some(k)) => parse_kernel(k)?.zeta_g(),
        (None, None) => return Err(CliError::config("exponents needs zeta or kernel")),
    };
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| CliError::config(format!("app {:?} needs {name}", cfg.app)));
    let params = match cfg.app {
        App::Rd => rd_wellposed_params(cfg.n, need(cfg.q, "q")?, need(cfg.rho, "rho")?, zeta)?,
        App::Ns => ns_wellposed_params(cfg.n, need(cfg.q, "q")?, zeta)?,
        App::Hj => hj_wellposed_params(cfg.n, need(cfg.p, "p")?, need(cfg.s, "s")?, need(cfg.rho, "rho")?, zeta)?,
    };
    dir.write_json("exponents.json", params.report())?;
    Ok(Outcome::default())
}
