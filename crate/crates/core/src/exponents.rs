//! Admissibility and ε-window arithmetic for reaction–diffusion,
//! Navier–Stokes and Hamilton–Jacobi type nonlinearities.
//!
//! Each application yields a window of ε for which γ(ε) = slope·ε + 1 − 1/ζ_g
//! lies in (1 − 1/ζ_g, 1), the regime of the critical existence theory.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Application {
    ReactionDiffusion,
    NavierStokes,
    HamiltonJacobi,
}

impl Application {
    pub fn as_str(self) -> &'static str {
        match self {
            Application::ReactionDiffusion => "rd",
            Application::NavierStokes => "ns",
            Application::HamiltonJacobi => "hj",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Openness {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsRegularParams {
    pub application: Application,
    pub inputs: Vec<(String, f64)>,
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub openness: Openness,
    /// γ(ε) = gamma_slope·ε + gamma_intercept.
    pub gamma_slope: f64,
    pub gamma_intercept: f64,
    pub admissible: bool,
    /// Supremum of admissible ζ_g.
    pub zeta_bound: f64,
}

impl EpsRegularParams {
    pub fn gamma_of_eps(&self, eps: f64) -> f64 {
        self.gamma_slope * eps + self.gamma_intercept
    }

    pub fn window_nonempty(&self) -> bool {
        match self.openness {
            Openness::Open => self.eps_lo < self.eps_hi,
            Openness::Closed => self.eps_lo <= self.eps_hi,
        }
    }

    pub fn contains(&self, eps: f64) -> bool {
        match self.openness {
            Openness::Open => self.eps_lo < eps && eps < self.eps_hi,
            Openness::Closed => self.eps_lo <= eps && eps <= self.eps_hi,
        }
    }

    /// JSON shape `{application, inputs, admissible, eps_window: [lo, hi, openness], gamma_slope, zeta_bound}`.
    pub fn report(&self) -> serde_json::Value {
        let inputs: serde_json::Map<String, serde_json::Value> =
            self.inputs.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect();
        serde_json::json!({
            "application": self.application.as_str(),
            "inputs": inputs,
            "admissible": self.admissible,
            "eps_window": [self.eps_lo, self.eps_hi, self.openness],
            "gamma_slope": self.gamma_slope,
            "zeta_bound": self.zeta_bound,
        })
    }
}

/// Critical threshold 1 − 1/ζ_g.
pub fn subcritical_gap(zeta_g: f64) -> Result<f64> {
    if !(zeta_g > 1.0 && zeta_g.is_finite()) {
        return Err(Error::Domain(format!("zeta_g must exceed 1, got {zeta_g}")));
    }
    Ok(1.0 - 1.0 / zeta_g)
}

/// Conjugate exponent q/(q − 1); infinite for q ≤ 1.
pub fn conjugate(q: f64) -> f64 {
    if q <= 1.0 {
        f64::INFINITY
    } else {
        q / (q - 1.0)
    }
}

/// Reaction–diffusion c₀|u|^{ρ−1}u with data in L^q(Ω), Ω ⊂ ℝ^N.
pub fn rd_wellposed_params(n: usize, q: f64, rho: f64, zeta_g: f64) -> Result<EpsRegularParams> {
    let gap = subcritical_gap(zeta_g)?;
    if n == 0 || !(q > 0.0 && q.is_finite()) {
        return Err(Error::Domain(format!("need N >= 1 and q > 0, got N = {n}, q = {q}")));
    }
    let nf = n as f64;
    if !(rho > 1.0 && rho < 1.0 + 2.0 * q / nf) {
        return Err(Error::Domain(format!("rho must lie in (1, 1 + 2q/N) = (1, {}), got {rho}", 1.0 + 2.0 * q / nf)));
    }
    let qc = conjugate(q);
    let eps_lo = ((1.0 / zeta_g - nf / (2.0 * qc)) / rho).max(0.0);
    let eps_hi = (1.0 / (rho * zeta_g)).min(nf / (2.0 * q));
    let critico = nf * zeta_g * (rho - 1.0) / 2.0;
    let mut p = EpsRegularParams {
        application: Application::ReactionDiffusion,
        inputs: vec![("N".into(), nf), ("q".into(), q), ("rho".into(), rho), ("zeta_g".into(), zeta_g)],
        eps_lo,
        eps_hi,
        openness: Openness::Open,
        gamma_slope: rho,
        gamma_intercept: gap,
        admissible: false,
        zeta_bound: 2.0 * q / (nf * (rho - 1.0)),
    };
    p.admissible = q > 1.0 && 1.0 < critico && critico <= q && p.window_nonempty();
    Ok(p)
}

/// Navier–Stokes type quadratic nonlinearity, N ≥ 3, N/3 < q < N.
pub fn ns_wellposed_params(n: usize, q: f64, zeta_g: f64) -> Result<EpsRegularParams> {
    let gap = subcritical_gap(zeta_g)?;
    let nf = n as f64;
    if n < 3 || !(nf / 3.0 < q && q < nf) {
        return Err(Error::Domain(format!("need N >= 3 and N/3 < q < N, got N = {n}, q = {q}")));
    }
    // ε = 0 would put γ on the critical threshold itself.
    let eps_lo = (1.0 / zeta_g - nf / (2.0 * q)).max(0.0);
    let eps_hi = 1.0 / zeta_g - (nf + q) / (4.0 * q);
    let zeta_bound = 4.0 * q / (nf + q);
    let mut p = EpsRegularParams {
        application: Application::NavierStokes,
        inputs: vec![("N".into(), nf), ("q".into(), q), ("zeta_g".into(), zeta_g)],
        eps_lo,
        eps_hi,
        openness: Openness::Closed,
        gamma_slope: 2.0,
        gamma_intercept: gap,
        admissible: false,
        zeta_bound,
    };
    p.admissible = zeta_g < zeta_bound && p.window_nonempty() && eps_hi > 0.0;
    Ok(p)
}

/// χ(s, p, ρ) = 1 + (1 − s + N/p)(ρ − 1).
pub fn hj_chi(n: usize, p: f64, s: f64, rho: f64) -> f64 {
    1.0 + (1.0 - s + n as f64 / p) * (rho - 1.0)
}

/// Hamilton–Jacobi type c₀|∇u|^ρ with data in H^{s,p}.
pub fn hj_wellposed_params(n: usize, p: f64, s: f64, rho: f64, zeta_g: f64) -> Result<EpsRegularParams> {
    let gap = subcritical_gap(zeta_g)?;
    let nf = n as f64;
    if n == 0 || !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("need N >= 1 and 1 < p < inf, got N = {n}, p = {p}")));
    }
    if !(rho > 1.0 && rho < p.min(1.0 + p / nf)) {
        return Err(Error::Domain(format!("rho must lie in (1, min(p, 1 + p/N)), got {rho}")));
    }
    let s_min = 1.0 - (1.0 / (rho - 1.0) - nf / p);
    if !(s > s_min && s <= 1.0) {
        return Err(Error::Domain(format!("s must lie in ({s_min}, 1], got {s}")));
    }
    let chi = hj_chi(n, p, s, rho);
    let eps_lo = (1.0 - s) / 2.0;
    // γ(ε) < 1 caps the window at 1/(ρ ζ_g).
    let eps_hi = (eps_lo + (1.0 / zeta_g - chi / 2.0) / rho).min(1.0 / (rho * zeta_g));
    let zeta_bound = 2.0 / chi;
    let mut out = EpsRegularParams {
        application: Application::HamiltonJacobi,
        inputs: vec![("N".into(), nf), ("p".into(), p), ("s".into(), s), ("rho".into(), rho), ("zeta_g".into(), zeta_g)],
        eps_lo,
        eps_hi,
        openness: Openness::Open,
        gamma_slope: rho,
        gamma_intercept: gap,
        admissible: false,
        zeta_bound,
    };
    out.admissible = zeta_g < zeta_bound && out.window_nonempty();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_examples() {
        assert!((subcritical_gap(1.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(subcritical_gap(2.0).unwrap(), 0.5);
        assert!(subcritical_gap(1.0 + 1e-12).unwrap() < 1e-11);
        assert!(subcritical_gap(1.0).is_err());
    }

    #[test]
    fn rd_examples() {
        let p = rd_wellposed_params(3, 3.0, 2.0, 1.5).unwrap();
        assert!(p.admissible);
        assert_eq!(p.eps_lo, 0.0);
        assert!((p.eps_hi - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.gamma_slope, 2.0);
        assert!(!rd_wellposed_params(1, 0.74, 2.0, 1.5).unwrap().admissible);
        assert!(rd_wellposed_params(2, 1.5, 1.0 + 2.0 * 1.5 / 2.0, 1.5).is_err());
        assert!(rd_wellposed_params(2, 1.5, 1.0, 1.5).is_err());
    }

    #[test]
    fn ns_examples() {
        let p = ns_wellposed_params(3, 2.0, 1.25).unwrap();
        assert!(p.admissible);
        assert!((p.eps_lo - 0.05).abs() < 1e-15 && (p.eps_hi - 0.175).abs() < 1e-15);
        assert!((p.zeta_bound - 1.6).abs() < 1e-15);
        assert!(!ns_wellposed_params(3, 2.0, 1.7).unwrap().admissible);
        assert!(ns_wellposed_params(3, 3.0, 1.25).is_err());
        assert!(ns_wellposed_params(3, 1.0, 1.25).is_err());
    }

    #[test]
    fn hj_examples() {
        let p = hj_wellposed_params(1, 2.0, 1.0, 1.5, 1.2).unwrap();
        assert!((hj_chi(1, 2.0, 1.0, 1.5) - 1.25).abs() < 1e-15);
        assert!((p.zeta_bound - 1.6).abs() < 1e-15);
        let q = hj_wellposed_params(1, 4.0, 0.0, 1.5, 1.2).unwrap();
        assert!(q.admissible);
        // Equivalent form p > N ζ (ρ − 1) / (2 − ρ ζ) = 3.
        assert!((1.0 * 1.2 * 0.5 / (2.0 - 1.5 * 1.2) - 3.0f64).abs() < 1e-12);
        let chi = hj_chi(1, 2.0, 1.0, 1.5);
        assert!(!hj_wellposed_params(1, 2.0, 1.0, 1.5, 2.0 / chi).unwrap().admissible);
        assert!(hj_wellposed_params(1, 2.0, 1.0, 2.5, 1.2).is_err());
    }

    #[test]
    fn report_shape() {
        let r = rd_wellposed_params(3, 3.0, 2.0, 1.5).unwrap().report();
        assert_eq!(r["application"], "rd");
        assert_eq!(r["admissible"], true);
        assert_eq!(r["eps_window"][2], "open");
        assert_eq!(r["inputs"]["q"], 3.0);
    }
}
