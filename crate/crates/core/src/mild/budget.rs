use serde::{Deserialize, Serialize};

use super::problem::MildProblem;
use super::solver::{solve_mild, MildSolution};
use crate::error::{Error, Result};
use crate::spectral::{weighted_norm, ScaleVector};
use crate::specfun::beta;

/// Constants of the subcritical fixed-point argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellPosednessBudget {
    /// Resolvent bound M ≥ 1.
    pub m: f64,
    /// Lipschitz constant c of f.
    pub c: f64,
    pub rho: f64,
    pub gamma0: f64,
    pub zeta_g: f64,
    /// ‖x₀‖_{X₁}
    pub x0_norm: f64,
    /// Smallness parameter in (0, 1].
    pub mu: f64,
    /// Largest τ with ‖S(t)x₀ − x₀‖_{X₁} ≤ μ/4 on (0, τ]; infinite when unconstrained.
    pub tau_probe: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedWindow {
    pub tau: f64,
    pub r: f64,
    /// R = max{2(‖x₀‖ + μ)^{ρ−1} + 1, (‖x₀‖ + 1)^ρ + 1}.
    pub big_r: f64,
    /// τ from the smallness condition alone.
    pub tau_formula: f64,
    pub tau_probe: f64,
}

/// Existence time and radius from M R c B(1, e) τ^e ≤ μ/4 with
/// e = 1 − ζ_g(1 − γ₀), and r = μ/(2M).
pub fn certified_existence_time(budget: &WellPosednessBudget) -> Result<CertifiedWindow> {
    let b = budget;
    if !(b.zeta_g > 1.0) {
        return Err(Error::Domain(format!("zeta_g must exceed 1, got {}", b.zeta_g)));
    }
    let threshold = 1.0 - 1.0 / b.zeta_g;
    if !(b.gamma0 > threshold) {
        return Err(Error::Regime(format!(
            "gamma0 = {} is not above 1 - 1/zeta_g = {threshold}; use the critical theory",
            b.gamma0
        )));
    }
    if !(b.gamma0 < 1.0) {
        return Err(Error::Domain(format!("gamma0 must be below 1, got {}", b.gamma0)));
    }
    if !(b.mu > 0.0 && b.mu <= 1.0) {
        return Err(Error::Domain(format!("mu must lie in (0, 1], got {}", b.mu)));
    }
    if !(b.m >= 1.0 && b.c > 0.0 && b.rho > 1.0 && b.x0_norm >= 0.0 && b.tau_probe > 0.0) {
        return Err(Error::Domain("need M >= 1, c > 0, rho > 1, ||x0|| >= 0 and tau_probe > 0".into()));
    }
    let e = 1.0 - b.zeta_g * (1.0 - b.gamma0);
    let big_r = (2.0 * (b.x0_norm + b.mu).powf(b.rho - 1.0) + 1.0).max((b.x0_norm + 1.0).powf(b.rho) + 1.0);
    let tau_formula = (b.mu / (4.0 * b.m * big_r * b.c * beta(1.0, e)?)).powf(1.0 / e);
    Ok(CertifiedWindow {
        tau: tau_formula.min(b.tau_probe),
        r: b.mu / (2.0 * b.m),
        big_r,
        tau_formula,
        tau_probe: b.tau_probe,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub ratio_max: f64,
    /// θ lies outside [0, γ − 1 + 1/ζ_g), where no bound is asserted.
    pub outside_window: bool,
}

/// max_j t_j^{ζ_g θ} ‖u(t_j; u₀) − u(t_j; u₁)‖_{X_{1+θ}} / ‖u₀ − u₁‖_{X₁}.
pub fn lipschitz_dependence(
    problem: &MildProblem,
    u0: &ScaleVector,
    u1: &ScaleVector,
    theta: f64,
    zeta_g: f64,
) -> Result<LipschitzReport> {
    let d0: Vec<f64> = u0.coeffs().iter().zip(u1.coeffs()).map(|(a, b)| a - b).collect();
    let op = problem.operator.clone();
    let p1 = 2.0 * (1.0 - op.delta());
    let denom = weighted_norm(op.eigenvalues(), &d0, p1);
    if denom == 0.0 {
        return Err(Error::Precondition("the two data coincide".into()));
    }
    let base = problem.clone().with_small_t(false).with_refinement(false);
    let a = solve_mild(&base.clone().with_u0(u0.clone()))?;
    let b = solve_mild(&base.with_u0(u1.clone()))?;
    for s in [&a, &b] {
        if !s.status.is_completed() {
            return Err(Error::Precondition(format!("run ended with status {}", s.status.label())));
        }
    }
    let ratio_max = weighted_difference(&a, &b, theta, zeta_g) / denom;
    let outside_window = match problem.gamma_index {
        Some(g) => !(theta >= 0.0 && theta < g - 1.0 + 1.0 / zeta_g),
        None => theta < 0.0,
    };
    Ok(LipschitzReport { ratio_max, outside_window })
}

fn weighted_difference(a: &MildSolution, b: &MildSolution, theta: f64, zeta_g: f64) -> f64 {
    let op = a.operator();
    let p = 2.0 * (1.0 + theta - op.delta());
    a.times
        .iter()
        .zip(a.states.iter().zip(&b.states))
        .map(|(t, (x, y))| {
            let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
            let w = if theta == 0.0 { 1.0 } else { t.powf(zeta_g * theta) };
            w * weighted_norm(op.eigenvalues(), &d, p)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> WellPosednessBudget {
        WellPosednessBudget { m: 1.0, c: 1.0, rho: 2.0, gamma0: 0.8, zeta_g: 1.5, x0_norm: 1.0, mu: 1.0, tau_probe: f64::INFINITY }
    }

    #[test]
    fn worked_budget() {
        let w = certified_existence_time(&example()).unwrap();
        assert_eq!(w.big_r, 5.0);
        assert!((w.r - 0.5).abs() < 1e-15);
        let expect = 0.035f64.powf(1.0 / 0.7);
        assert!((w.tau - expect).abs() < 1e-15 * expect);
        assert!((w.tau - 0.008_319_499_619_482_42).abs() < 1e-15);
    }

    #[test]
    fn critical_boundary_is_rejected() {
        let b = WellPosednessBudget { gamma0: 1.0 - 1.0 / 1.5, ..example() };
        assert!(matches!(certified_existence_time(&b), Err(Error::Regime(_))));
    }

    #[test]
    fn window_shrinks_with_mu() {
        let mut last = (f64::INFINITY, f64::INFINITY);
        for mu in [1.0, 0.5, 0.1, 1e-2, 1e-4] {
            let w = certified_existence_time(&WellPosednessBudget { mu, ..example() }).unwrap();
            assert!(w.tau < last.0 && w.r < last.1);
            last = (w.tau, w.r);
        }
        assert!(last.0 < 1e-6);
    }

    #[test]
    fn probe_caps_tau() {
        let w = certified_existence_time(&WellPosednessBudget { tau_probe: 1e-3, ..example() }).unwrap();
        assert_eq!(w.tau, 1e-3);
    }
}
