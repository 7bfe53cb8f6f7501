use serde::Serialize;

use super::solver::MildSolution;
use crate::error::{Error, Result};
use crate::spectral::weighted_norm;

/// Required decay of the weighted profile between t = 0.1 T and the
/// smallest sample.
pub const DECAY_RATIO: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct EpsProfile {
    pub eps: f64,
    pub zeta_g: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Profile at the smallest sample over its value nearest t = 0.1 T.
    pub decay: f64,
    pub pass: bool,
}

/// t ↦ t^{ζ_g ε} ‖u(t)‖_{X_{1+ε}} over the small-time sub-grid followed by
/// the accepted nodes t > 0.
pub fn eps_regular_profile(sol: &MildSolution, eps: f64, zeta_g: f64) -> Result<EpsProfile> {
    let small = sol
        .small_t
        .as_ref()
        .ok_or_else(|| Error::Sampling("solution carries no small-time sub-grid; enable small_t".into()))?;
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("eps must be non-negative, got {eps}")));
    }
    let op = sol.operator();
    let p = 2.0 * (1.0 + eps - op.delta());
    let weight = |t: f64| if eps == 0.0 { 1.0 } else { t.powf(zeta_g * eps) };
    let mut times = Vec::new();
    let mut values = Vec::new();
    let pairs = small.times.iter().zip(&small.states).chain(sol.times.iter().zip(&sol.states).skip(1));
    for (&t, u) in pairs {
        times.push(t);
        values.push(weight(t) * weighted_norm(op.eigenvalues(), u, p));
    }
    if times.is_empty() {
        return Err(Error::Sampling("profile has no samples".into()));
    }
    let reference_t = 0.1 * sol.last_time();
    let reference = times
        .iter()
        .zip(&values)
        .min_by(|a, b| (a.0 - reference_t).abs().total_cmp(&(b.0 - reference_t).abs()))
        .map(|(_, v)| *v)
        .unwrap_or(f64::NAN);
    let decay = values[0] / reference;
    Ok(EpsProfile { eps, zeta_g, times, values, decay, pass: decay <= DECAY_RATIO })
}
