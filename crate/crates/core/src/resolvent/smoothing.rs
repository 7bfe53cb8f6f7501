use rayon::prelude::*;
use serde::Serialize;

use super::table::ScalarResolventTable;
use super::talbot::{scalar_resolvent_talbot, TalbotOptions};
use crate::error::{Error, Result};
use crate::kernel::MaterialKernel;
use crate::spectral::{ScaleVector, SpectralOperator};

fn check_indices(gamma: f64, theta: f64) -> Result<()> {
    if !(0.0 <= theta && theta <= gamma && gamma <= 1.0) {
        return Err(Error::Domain(format!("need 0 <= theta <= gamma <= 1, got gamma = {gamma}, theta = {theta}")));
    }
    Ok(())
}

/// sup_m (1+μ_m)^{1+θ−γ} |s_m|: the X_γ → X_{1+θ} norm of a diagonal operator
/// with entries `values`.
pub fn smoothing_norm(eigenvalues: &[f64], values: &[f64], gamma: f64, theta: f64) -> Result<f64> {
    check_indices(gamma, theta)?;
    if eigenvalues.len() != values.len() {
        return Err(Error::Shape { expected: eigenvalues.len(), got: values.len() });
    }
    let p = 1.0 + theta - gamma;
    Ok(eigenvalues
        .iter()
        .zip(values)
        .map(|(mu, s)| (1.0 + mu).powf(p) * s.abs())
        .fold(0.0, f64::max))
}

/// ‖S(t)‖ from X_γ to X_{1+θ} using one table per mode; `t` must be a grid node.
pub fn operator_smoothing_norm(
    op: &SpectralOperator,
    tables: &[ScalarResolventTable],
    t: f64,
    gamma: f64,
    theta: f64,
) -> Result<f64> {
    if tables.len() != op.len() {
        return Err(Error::Shape { expected: op.len(), got: tables.len() });
    }
    let values = tables.iter().map(|tab| tab.value_at(t)).collect::<Result<Vec<_>>>()?;
    smoothing_norm(op.eigenvalues(), &values, gamma, theta)
}

/// s_μ(t) for every μ in `eigenvalues`, by contour inversion.
pub fn resolvent_values(kernel: &MaterialKernel, eigenvalues: &[f64], t: f64, opts: &TalbotOptions) -> Result<Vec<f64>> {
    eigenvalues.par_iter().map(|&mu| scalar_resolvent_talbot(kernel, mu, t, opts)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    /// −ζ_g (1 + θ − γ).
    pub target: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Largest ‖S(t₁) − S(t₀)‖ / (ln(t₁/t₀)^{γ−θ} t₀^{−ζ_g(1+θ−γ)}) over consecutive samples.
    pub log_lipschitz_max: f64,
}

/// Least-squares slope of log ‖S(t)‖_{γ→1+θ} against log t on a geometric grid.
pub fn fit_smoothing_rate(
    op: &SpectralOperator,
    kernel: &MaterialKernel,
    gamma: f64,
    theta: f64,
    t_min: f64,
    t_max: f64,
    n_samples: usize,
) -> Result<SmoothingFit> {
    check_indices(gamma, theta)?;
    if !(t_min > 0.0 && t_min < t_max) || n_samples < 2 {
        return Err(Error::Domain(format!(
            "need 0 < t_min < t_max and at least 2 samples, got [{t_min}, {t_max}], {n_samples}"
        )));
    }
    let zeta = kernel.zeta_g();
    let p = 1.0 + theta - gamma;
    if p > 0.0 {
        let have = (1.0 + op.mu_max()).powf(p);
        let need = 10.0 * t_min.powf(-zeta * p);
        if have < need {
            return Err(Error::Resolution(format!(
                "(1 + mu_max)^{p} = {have:.3e} is below 10 t_min^(-zeta p) = {need:.3e}; add modes or raise t_min"
            )));
        }
    }
    let ratio = (t_max / t_min).ln();
    let times: Vec<f64> = (0..n_samples)
        .map(|i| t_min * (ratio * i as f64 / (n_samples - 1) as f64).exp())
        .collect();
    let opts = TalbotOptions::default();
    let values: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| resolvent_values(kernel, op.eigenvalues(), t, &opts))
        .collect::<Result<_>>()?;
    let norms: Vec<f64> = values
        .iter()
        .map(|v| smoothing_norm(op.eigenvalues(), v, gamma, theta))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let (slope, intercept, residual) = least_squares(&xs, &ys);

    let mut log_lipschitz_max: f64 = 0.0;
    for i in 0..n_samples - 1 {
        let diff: Vec<f64> = values[i + 1].iter().zip(&values[i]).map(|(a, b)| a - b).collect();
        let num = smoothing_norm(op.eigenvalues(), &diff, gamma, theta)?;
        let den = (times[i + 1] / times[i]).ln().powf(gamma - theta) * times[i].powf(-zeta * p);
        log_lipschitz_max = log_lipschitz_max.max(num / den);
    }
    Ok(SmoothingFit { slope, intercept, residual, target: -zeta * p, times, norms, log_lipschitz_max })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// For each pair t₀ < t₁, the ratio
/// ‖S(t₁) − S(t₀)‖_{γ→1+θ} / (ln(t₁/t₀)^{γ−θ} t₀^{−ζ_g(1+θ−γ)}).
pub fn log_continuity_ratios(
    op: &SpectralOperator,
    kernel: &MaterialKernel,
    gamma: f64,
    theta: f64,
    pairs: &[(f64, f64)],
) -> Result<Vec<f64>> {
    check_indices(gamma, theta)?;
    let zeta = kernel.zeta_g();
    let p = 1.0 + theta - gamma;
    let opts = TalbotOptions::default();
    pairs
        .iter()
        .map(|&(t0, t1)| {
            if !(0.0 < t0 && t0 < t1) {
                return Err(Error::Domain(format!("need 0 < t0 < t1, got ({t0}, {t1})")));
            }
            let s0 = resolvent_values(kernel, op.eigenvalues(), t0, &opts)?;
            let s1 = resolvent_values(kernel, op.eigenvalues(), t1, &opts)?;
            let diff: Vec<f64> = s1.iter().zip(&s0).map(|(a, b)| a - b).collect();
            let num = smoothing_norm(op.eigenvalues(), &diff, gamma, theta)?;
            Ok(num / ((t1 / t0).ln().powf(gamma - theta) * t0.powf(-zeta * p)))
        })
        .collect()
}

/// Largest τ ≤ t_max such that ‖S(t)x₀ − x₀‖_{X₁} ≤ μ/4 at every sampled
/// t ∈ (0, τ]; the crossing is refined by bisection. Returns t_max when the
/// bound holds on the whole sampled range.
pub fn probe_departure_time(kernel: &MaterialKernel, x0: &ScaleVector, mu_small: f64, t_max: f64, samples: usize) -> Result<f64> {
    if !(mu_small > 0.0 && t_max > 0.0) || samples < 2 {
        return Err(Error::Domain("probe needs mu > 0, t_max > 0 and two samples".into()));
    }
    let op = x0.operator();
    let active: Vec<(f64, f64)> = op
        .eigenvalues()
        .iter()
        .zip(x0.coeffs())
        .filter(|(_, c)| **c != 0.0)
        .map(|(&mu, &c)| (mu, c))
        .collect();
    let delta = op.delta();
    let opts = TalbotOptions::default();
    let departure = |t: f64| -> Result<f64> {
        let mut sum = 0.0;
        for &(mu, c) in &active {
            let s = scalar_resolvent_talbot(kernel, mu, t, &opts)?;
            sum += (1.0 + mu).powf(2.0 * (1.0 - delta)) * ((s - 1.0) * c).powi(2);
        }
        Ok(sum.sqrt())
    };
    let bound = mu_small / 4.0;
    let t_lo = t_max * 1e-6;
    let ratio = (t_max / t_lo).ln();
    let mut good = 0.0;
    for i in 0..samples {
        let t = t_lo * (ratio * i as f64 / (samples - 1) as f64).exp();
        if departure(t)? > bound {
            let mut lo = good;
            let mut hi = t;
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if departure(mid)? > bound {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(lo);
        }
        good = t;
    }
    Ok(t_max)
}

/// Empirical growth constants: M = max(1, sup |s(t)| e^{−ωt}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventConstants {
    pub m: f64,
    pub omega: f64,
    pub zeta_g: f64,
    pub t_min: f64,
    pub t_max: f64,
}

pub fn fit_resolvent_constants(tables: &[ScalarResolventTable], omega: f64, zeta_g: f64) -> ResolventConstants {
    let mut m: f64 = 1.0;
    let mut t_max: f64 = 0.0;
    for tab in tables {
        for (j, v) in tab.values.iter().enumerate() {
            m = m.max(v.abs() * (-omega * tab.time(j)).exp());
        }
        t_max = t_max.max(tab.horizon());
    }
    ResolventConstants { m, omega, zeta_g, t_min: 0.0, t_max }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolvent::scalar_resolvent_volterra;
    use crate::spectral::{build_operator, OperatorConfig};
    use std::f64::consts::PI;

    #[test]
    fn two_mode_toy() {
        let eigs = [1.0, 4.0];
        let s = [(PI / 2.0).cos(), PI.cos()];
        assert!((smoothing_norm(&eigs, &s, 0.0, 0.0).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(smoothing_norm(&eigs, &[1.0, 1.0], 1.0, 0.0).unwrap(), 1.0);
        assert!(smoothing_norm(&eigs, &s, 0.2, 0.5).is_err());
        assert!(smoothing_norm(&eigs, &s[..1], 0.0, 0.0).is_err());
    }

    #[test]
    fn operator_norm_at_zero_is_largest_weight() {
        let op = build_operator(OperatorConfig::line(1.0, 4, 1.0)).unwrap();
        let k = crate::kernel::MaterialKernel::hookean();
        let tables: Vec<_> = op.eigenvalues().iter().map(|&mu| scalar_resolvent_volterra(&k, mu, 0.01, 0.1).unwrap()).collect();
        let n0 = operator_smoothing_norm(&op, &tables, 0.0, 0.5, 0.25).unwrap();
        assert!((n0 - (1.0 + op.mu_max()).powf(0.75)).abs() < 1e-9 * n0);
        let sup = operator_smoothing_norm(&op, &tables, 0.05, 1.0, 0.0).unwrap();
        let direct = tables.iter().map(|t| t.values[5].abs()).fold(0.0, f64::max);
        assert_eq!(sup, direct);
        assert!(matches!(operator_smoothing_norm(&op, &tables, 0.055, 1.0, 0.0), Err(Error::Grid(_))));
    }

    #[test]
    fn bounded_norm_has_flat_slope() {
        let op = build_operator(OperatorConfig::line(1.0, 64, 1.0)).unwrap();
        let k = crate::kernel::MaterialKernel::power(0.5).unwrap();
        let fit = fit_smoothing_rate(&op, &k, 1.0, 0.0, 1e-4, 1e-3, 6).unwrap();
        assert_eq!(fit.target, 0.0);
        assert!(fit.slope.abs() < 0.05, "{}", fit.slope);
    }

    #[test]
    fn resolution_guard() {
        let op = build_operator(OperatorConfig::line(1.0, 8, 1.0)).unwrap();
        let k = crate::kernel::MaterialKernel::power(0.5).unwrap();
        assert!(matches!(fit_smoothing_rate(&op, &k, 0.0, 0.0, 1e-3, 1e-1, 5), Err(Error::Resolution(_))));
    }

    #[test]
    fn constants_are_at_least_one() {
        let k = crate::kernel::MaterialKernel::hookean();
        let tabs = vec![scalar_resolvent_volterra(&k, 4.0, 0.01, 1.0).unwrap()];
        let c = fit_resolvent_constants(&tabs, 0.0, 2.0);
        assert!(c.m >= 1.0 && c.m < 1.0 + 1e-12);
    }
}
