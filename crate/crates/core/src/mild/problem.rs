use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::MaterialKernel;
use crate::resolvent::grid_steps;
use crate::spectral::{ScaleVector, SpectralOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityKind {
    /// c₀ |u|^{ρ−1} u
    Power,
    /// c₀ |∇u|^ρ
    Gradient,
    /// c₀ u
    ForcedLinear,
    Zero,
}

/// Piecewise-linear path of coefficient vectors, held constant outside its samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingPath {
    times: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl ForcingPath {
    pub fn constant(coeffs: Vec<f64>) -> Self {
        Self { times: vec![0.0], coeffs: vec![coeffs] }
    }

    pub fn sampled(times: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != coeffs.len() {
            return Err(Error::Config("forcing needs one coefficient vector per sample time".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("forcing sample times must increase strictly".into()));
        }
        let n = coeffs[0].len();
        if coeffs.iter().any(|c| c.len() != n) {
            return Err(Error::Config("forcing samples must share one length".into()));
        }
        Ok(Self { times, coeffs })
    }

    pub fn len_modes(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.coeffs[0].clone();
        }
        if k == self.times.len() {
            return self.coeffs[k - 1].clone();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        self.coeffs[k - 1].iter().zip(&self.coeffs[k]).map(|(a, b)| a + w * (b - a)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    pub kind: NonlinearityKind,
    pub c0: f64,
    pub rho: f64,
    /// Added to f for every kind.
    pub forcing: Option<ForcingPath>,
}

impl NonlinearitySpec {
    pub fn zero() -> Self {
        Self { kind: NonlinearityKind::Zero, c0: 0.0, rho: 2.0, forcing: None }
    }

    pub fn power(c0: f64, rho: f64) -> Self {
        Self { kind: NonlinearityKind::Power, c0, rho, forcing: None }
    }

    pub fn gradient(c0: f64, rho: f64) -> Self {
        Self { kind: NonlinearityKind::Gradient, c0, rho, forcing: None }
    }

    pub fn forced_linear(c0: f64, forcing: ForcingPath) -> Self {
        Self { kind: NonlinearityKind::ForcedLinear, c0, rho: 1.0, forcing: Some(forcing) }
    }

    pub fn validate(&self, n_modes: usize) -> Result<()> {
        if !self.c0.is_finite() {
            return Err(Error::Config("c0 must be finite".into()));
        }
        if matches!(self.kind, NonlinearityKind::Power | NonlinearityKind::Gradient) && !(self.rho > 1.0 && self.rho.is_finite()) {
            return Err(Error::Config(format!("rho must exceed 1, got {}", self.rho)));
        }
        if let Some(f) = &self.forcing {
            if f.len_modes() != n_modes {
                return Err(Error::Shape { expected: n_modes, got: f.len_modes() });
            }
        }
        Ok(())
    }

    /// Sine coefficients of f(t, u).
    pub fn eval(&self, op: &SpectralOperator, t: f64, u: &[f64]) -> Result<Vec<f64>> {
        let (c0, rho) = (self.c0, self.rho);
        let mut out = match self.kind {
            NonlinearityKind::Zero => vec![0.0; u.len()],
            NonlinearityKind::ForcedLinear => u.iter().map(|v| c0 * v).collect(),
            NonlinearityKind::Power => op.dealiased_map(u, |v| c0 * v.abs().powf(rho - 1.0) * v)?,
            NonlinearityKind::Gradient => {
                let mut g = op.gradient_power(u, rho)?;
                g.iter_mut().for_each(|v| *v *= c0);
                g
            }
        };
        if let Some(f) = &self.forcing {
            out.iter_mut().zip(f.at(t)).for_each(|(o, v)| *o += v);
        }
        Ok(out)
    }
}

/// Where the per-mode resolvent columns come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableSource {
    /// Product-trapezoid stepping only; accurate while μ h^{ζ_g} is small.
    Volterra,
    /// Contour inversion at every node, with the stepped value wherever the
    /// contour sum does not converge.
    Auto,
}

/// Problem data and solver controls for [`super::solve_mild`].
#[derive(Debug, Clone)]
pub struct MildProblem {
    pub operator: Arc<SpectralOperator>,
    pub kernel: MaterialKernel,
    pub u0: ScaleVector,
    pub nonlinearity: NonlinearitySpec,
    pub horizon: f64,
    pub step: f64,
    /// Picard tolerance, relative to 1 + ‖u‖_{X₁}.
    pub inner_tol: f64,
    pub max_inner: usize,
    /// Escape level for the X_{1+ε} norm.
    pub blowup_threshold: f64,
    /// Regularity gain ε tracked in the diagnostics.
    pub eps: f64,
    /// Index γ of the nonlinearity's target space, when known.
    pub gamma_index: Option<f64>,
    /// Record states on a geometric sub-grid below the first step.
    pub small_t: bool,
    /// Smallest diagnostic time as a fraction of the horizon.
    pub small_t_floor: f64,
    pub refine_blowup: bool,
    pub table_source: TableSource,
}

impl MildProblem {
    pub fn new(kernel: MaterialKernel, u0: ScaleVector, nonlinearity: NonlinearitySpec, horizon: f64, step: f64) -> Result<Self> {
        let p = Self {
            operator: u0.operator().clone(),
            kernel,
            u0,
            nonlinearity,
            horizon,
            step,
            inner_tol: 1e-10,
            max_inner: 50,
            blowup_threshold: 1e8,
            eps: 0.2,
            gamma_index: None,
            small_t: false,
            small_t_floor: 1e-9,
            refine_blowup: true,
            table_source: TableSource::Auto,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_small_t(mut self, on: bool) -> Self {
        self.small_t = on;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.blowup_threshold = threshold;
        self
    }

    pub fn with_gamma_index(mut self, gamma: f64) -> Self {
        self.gamma_index = Some(gamma);
        self
    }

    pub fn with_refinement(mut self, on: bool) -> Self {
        self.refine_blowup = on;
        self
    }

    pub fn with_table_source(mut self, source: TableSource) -> Self {
        self.table_source = source;
        self
    }

    pub fn with_u0(mut self, u0: ScaleVector) -> Self {
        self.u0 = u0;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("step must be positive, got {}", self.step)));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::Config(format!("blow-up threshold must be positive, got {}", self.blowup_threshold)));
        }
        grid_steps(self.step, self.horizon)?;
        if !Arc::ptr_eq(&self.operator, self.u0.operator()) && self.operator.config() != self.u0.operator().config() {
            return Err(Error::Config("initial datum lives on a different operator".into()));
        }
        if !self.u0.norm(1.0).is_finite() {
            return Err(Error::Domain("initial datum must have finite X_1 norm".into()));
        }
        if !(self.inner_tol > 0.0) || self.max_inner == 0 {
            return Err(Error::Config("inner tolerance and iteration cap must be positive".into()));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be non-negative, got {}", self.eps)));
        }
        if !(self.small_t_floor > 0.0 && self.small_t_floor < 1.0) {
            return Err(Error::Config(format!("small-t floor must lie in (0, 1), got {}", self.small_t_floor)));
        }
        self.nonlinearity.validate(self.operator.len())
    }

    /// True when γ ≤ 1 − 1/ζ_g.
    pub fn is_critical(&self) -> bool {
        match self.gamma_index {
            Some(g) => g <= 1.0 - 1.0 / self.kernel.zeta_g(),
            None => false,
        }
    }
}
