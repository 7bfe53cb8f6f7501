use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::problem::{MildProblem, TableSource};
use crate::error::{Error, Result};
use crate::resolvent::{
    grid_steps, resolvent_integral_talbot, scalar_resolvent_talbot, scalar_resolvent_talbot_many, TalbotOptions, VolterraWeights,
};
use crate::spectral::{weighted_norm, ScaleVector, SpectralOperator};

/// Steps of monotone growth required before an escape counts as blow-up.
const MONOTONE_STEPS: usize = 5;
const SMALL_T_PER_DECADE: f64 = 12.0;
const MAX_REFINEMENTS: usize = 6;
const REFINE_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SolveStatus {
    Completed,
    Blowup { tau_estimate: f64 },
    InnerDivergence { step: usize, t: f64 },
    Overflow { step: usize, t: f64 },
}

impl SolveStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Completed => "completed",
            SolveStatus::Blowup { .. } => "blowup",
            SolveStatus::InnerDivergence { .. } => "inner-divergence",
            SolveStatus::Overflow { .. } => "overflow",
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, SolveStatus::Completed)
    }

    pub fn tau_estimate(&self) -> Option<f64> {
        match self {
            SolveStatus::Blowup { tau_estimate } => Some(*tau_estimate),
            _ => None,
        }
    }
}

/// States on the geometric sub-grid below the first step, from the
/// one-term expansion u(t) ≈ S(t)u₀ + (∫₀ᵗ S) f(0, u₀).
#[derive(Debug, Clone)]
pub struct SmallTimeDiagnostics {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct MildSolution {
    /// Accepted nodes t_j = j h.
    pub times: Vec<f64>,
    /// Sine coefficients per accepted node.
    pub states: Vec<Vec<f64>>,
    pub status: SolveStatus,
    pub norms_x1: Vec<f64>,
    pub norms_x1pe: Vec<f64>,
    pub eps: f64,
    pub zeta_g: f64,
    pub h: f64,
    pub critical: bool,
    pub small_t: Option<SmallTimeDiagnostics>,
    operator: Arc<SpectralOperator>,
    f_history: Vec<Vec<f64>>,
}

impl MildSolution {
    pub fn operator(&self) -> &Arc<SpectralOperator> {
        &self.operator
    }

    pub fn state(&self, j: usize) -> Result<ScaleVector> {
        ScaleVector::new(self.operator.clone(), self.states[j].clone())
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// ‖u(t_j)‖_α at every accepted node.
    pub fn norm_history(&self, alpha: f64) -> Vec<f64> {
        let p = 2.0 * (alpha - self.operator.delta());
        self.states.iter().map(|u| weighted_norm(self.operator.eigenvalues(), u, p)).collect()
    }

    /// t^{ζ_g ε} ‖u(t)‖_{X_{1+ε}} on the accepted nodes.
    pub fn weighted_profile(&self) -> Vec<f64> {
        let w = self.zeta_g * self.eps;
        self.times.iter().zip(&self.norms_x1pe).map(|(t, n)| if w == 0.0 { *n } else { t.powf(w) * n }).collect()
    }
}

/// Solve u(t) = S(t)u₀ + ∫₀ᵗ S(t−r) f(r, u(r)) dr on the uniform grid.
pub fn solve_mild(problem: &MildProblem) -> Result<MildSolution> {
    problem.validate()?;
    let steps = grid_steps(problem.step, problem.horizon)?;
    let columns = mode_resolvents(problem, steps)?;
    let op = problem.operator.clone();
    let u0 = problem.u0.coeffs().to_vec();
    let f0 = problem.nonlinearity.eval(&op, 0.0, &u0)?;
    let mut sol = MildSolution {
        times: vec![0.0],
        states: vec![u0.clone()],
        status: SolveStatus::Completed,
        norms_x1: vec![norm_at(&op, &u0, 1.0)],
        norms_x1pe: vec![norm_at(&op, &u0, 1.0 + problem.eps)],
        eps: problem.eps,
        zeta_g: problem.kernel.zeta_g(),
        h: problem.step,
        critical: problem.is_critical(),
        small_t: None,
        operator: op,
        f_history: vec![f0],
    };
    if problem.small_t || sol.critical {
        sol.small_t = Some(small_time_diagnostics(problem)?);
    }
    let outcome = march(problem, &columns, &mut sol, steps)?;
    sol.status = settle(problem, outcome)?;
    Ok(sol)
}

/// Extend a completed solution to the horizon `t2`, reusing the whole
/// convolution history. Values on the original grid are left untouched.
pub fn continue_mild(sol: &MildSolution, problem: &MildProblem, t2: f64) -> Result<MildSolution> {
    if !sol.status.is_completed() {
        return Err(Error::Precondition(format!("cannot continue a solution with status {}", sol.status.label())));
    }
    if sol.h != problem.step || sol.states.first().map(|u| u.as_slice()) != Some(problem.u0.coeffs()) {
        return Err(Error::Precondition("problem does not match the solution being continued".into()));
    }
    if !(t2 > sol.last_time()) {
        return Err(Error::Precondition(format!("new horizon {t2} must exceed {}", sol.last_time())));
    }
    let extended = problem.clone().with_horizon(t2);
    extended.validate()?;
    let steps = grid_steps(problem.step, t2)?;
    let columns = mode_resolvents(&extended, steps)?;
    let mut out = sol.clone();
    let outcome = march(&extended, &columns, &mut out, steps)?;
    out.status = settle(&extended, outcome)?;
    Ok(out)
}

fn norm_at(op: &SpectralOperator, u: &[f64], alpha: f64) -> f64 {
    weighted_norm(op.eigenvalues(), u, 2.0 * (alpha - op.delta()))
}

/// s_{μ_m}(t_j) for j = 0..=steps, one column per mode, shared between
/// modes with equal μ.
pub fn mode_resolvents(problem: &MildProblem, steps: usize) -> Result<Vec<Arc<Vec<f64>>>> {
    let eigs = problem.operator.eigenvalues();
    let mut unique: Vec<f64> = eigs.to_vec();
    unique.sort_by(f64::total_cmp);
    unique.dedup();
    let weights = VolterraWeights::new(&problem.kernel, problem.step, steps)?;
    let opts = TalbotOptions::default();
    let h = problem.step;
    let cols: Vec<Arc<Vec<f64>>> = unique
        .par_iter()
        .map(|&mu| match problem.table_source {
            TableSource::Volterra => weights.solve(mu).map(Arc::new),
            TableSource::Auto => {
                let mut fallback: Option<Vec<f64>> = None;
                let mut col = vec![1.0; steps + 1];
                let times: Vec<f64> = (1..=steps).map(|j| j as f64 * h).collect();
                let inverted = scalar_resolvent_talbot_many(&problem.kernel, mu, &times, &opts);
                for (j, (v, r)) in col.iter_mut().skip(1).zip(inverted).enumerate() {
                    let j = j + 1;
                    *v = match r {
                        Ok(x) => x,
                        Err(_) => {
                            if fallback.is_none() {
                                fallback = Some(weights.solve(mu)?);
                            }
                            fallback.as_ref().map_or(f64::NAN, |vs| vs[j])
                        }
                    };
                }
                Ok(Arc::new(col))
            }
        })
        .collect::<Result<_>>()?;
    let index: HashMap<u64, usize> = unique.iter().enumerate().map(|(i, mu)| (mu.to_bits(), i)).collect();
    Ok(eigs.iter().map(|mu| cols[index[&mu.to_bits()]].clone()).collect())
}

enum Outcome {
    Completed,
    Escape { step: usize, prev_norm: f64, norm: f64, monotone: bool },
    Diverged { step: usize },
    NonFinite { step: usize },
}

/// Advance `sol` from its last node to node `steps`.
fn march(problem: &MildProblem, columns: &[Arc<Vec<f64>>], sol: &mut MildSolution, steps: usize) -> Result<Outcome> {
    let op = problem.operator.clone();
    let h = problem.step;
    let n = op.len();
    let u0 = problem.u0.coeffs();
    let threshold = problem.blowup_threshold;
    let alpha_e = 1.0 + problem.eps;
    let start = sol.states.len();
    for j in start..=steps {
        let t = j as f64 * h;
        let hist = &sol.f_history;
        let base: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|m| {
                let s = &columns[m];
                let mut acc = 0.5 * s[j] * hist[0][m];
                for (i, f) in hist.iter().enumerate().skip(1) {
                    acc += s[j - i] * f[m];
                }
                s[j] * u0[m] + h * acc
            })
            .collect();
        let mut f = hist[j - 1].clone();
        let mut converged = false;
        let mut u = Vec::new();
        for _ in 0..problem.max_inner {
            let next: Vec<f64> = base.iter().zip(&f).map(|(b, fv)| b + 0.5 * h * fv).collect();
            let escape = norm_at(&op, &next, alpha_e);
            if !(escape <= threshold) {
                return Ok(escape_or_overflow(sol, j, escape));
            }
            let diff: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
            let done = !u.is_empty() && norm_at(&op, &diff, 1.0) <= problem.inner_tol * (1.0 + norm_at(&op, &next, 1.0));
            u = next;
            f = problem.nonlinearity.eval(&op, t, &u)?;
            if f.iter().any(|v| !v.is_finite()) {
                return Ok(Outcome::NonFinite { step: j });
            }
            if done {
                converged = true;
                break;
            }
        }
        if !converged {
            return Ok(Outcome::Diverged { step: j });
        }
        sol.norms_x1.push(norm_at(&op, &u, 1.0));
        sol.norms_x1pe.push(norm_at(&op, &u, alpha_e));
        sol.times.push(t);
        sol.states.push(u);
        sol.f_history.push(f);
    }
    Ok(Outcome::Completed)
}

/// The accepted norms over the last steps and the escaping candidate must rise monotonically.
fn escape_or_overflow(sol: &MildSolution, step: usize, norm: f64) -> Outcome {
    let norms = &sol.norms_x1pe;
    let prev_norm = *norms.last().unwrap_or(&f64::NAN);
    let monotone = norms.len() >= MONOTONE_STEPS
        && norms[norms.len() - MONOTONE_STEPS..].windows(2).all(|w| w[0] < w[1])
        && norm > prev_norm;
    Outcome::Escape { step, prev_norm, norm, monotone }
}

fn settle(problem: &MildProblem, outcome: Outcome) -> Result<SolveStatus> {
    let h = problem.step;
    match outcome {
        Outcome::Completed => Ok(SolveStatus::Completed),
        Outcome::Diverged { step } => Ok(SolveStatus::InnerDivergence { step, t: step as f64 * h }),
        Outcome::NonFinite { step } => Ok(SolveStatus::Overflow { step, t: step as f64 * h }),
        Outcome::Escape { step, prev_norm, norm, monotone } => {
            let t = step as f64 * h;
            if !monotone {
                return Ok(SolveStatus::Overflow { step, t });
            }
            let mut tau = crossing_time(problem, step, prev_norm, norm);
            if problem.refine_blowup {
                let mut hk = h;
                for _ in 0..MAX_REFINEMENTS {
                    hk /= 2.0;
                    match escape_time(problem, hk, 1.5 * tau)? {
                        Some(next) => {
                            let settled = (next - tau).abs() <= REFINE_TOL * next;
                            tau = next;
                            if settled {
                                break;
                            }
                        }
                        None => break,
                    }
                }
            }
            Ok(SolveStatus::Blowup { tau_estimate: tau })
        }
    }
}

fn crossing_time(problem: &MildProblem, step: usize, prev_norm: f64, norm: f64) -> f64 {
    let h = problem.step;
    let t1 = step as f64 * h;
    if !(norm.is_finite() && prev_norm > 0.0 && norm > prev_norm) {
        return t1;
    }
    let w = (problem.blowup_threshold.ln() - prev_norm.ln()) / (norm.ln() - prev_norm.ln());
    t1 - h + w.clamp(0.0, 1.0) * h
}

/// Escape time of a run with step `h`, or None when the run does not blow up.
fn escape_time(problem: &MildProblem, h: f64, horizon: f64) -> Result<Option<f64>> {
    let steps = (horizon / h).ceil().max(1.0);
    let mut p = problem.clone().with_step(h).with_horizon(steps * h).with_refinement(false).with_small_t(false);
    p.gamma_index = None;
    let sol = solve_mild(&p)?;
    Ok(sol.status.tau_estimate())
}

fn small_time_diagnostics(problem: &MildProblem) -> Result<SmallTimeDiagnostics> {
    let op = &problem.operator;
    let t_lo = problem.small_t_floor * problem.horizon;
    let decades = (problem.step / t_lo).log10();
    let count = (decades * SMALL_T_PER_DECADE).ceil() as usize;
    let times: Vec<f64> = (0..count)
        .map(|k| t_lo * 10f64.powf(k as f64 / SMALL_T_PER_DECADE))
        .filter(|&t| t < problem.step)
        .collect();
    let u0 = problem.u0.coeffs();
    let f0 = problem.nonlinearity.eval(op, 0.0, u0)?;
    let opts = TalbotOptions::default();
    let kernel = &problem.kernel;
    let states = times
        .iter()
        .map(|&t| {
            op.eigenvalues()
                .par_iter()
                .enumerate()
                .map(|(m, &mu)| {
                    let mut v = 0.0;
                    if u0[m] != 0.0 {
                        v += scalar_resolvent_talbot(kernel, mu, t, &opts)? * u0[m];
                    }
                    if f0[m] != 0.0 {
                        v += resolvent_integral_talbot(kernel, mu, t, &opts)? * f0[m];
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SmallTimeDiagnostics { times, states })
}
