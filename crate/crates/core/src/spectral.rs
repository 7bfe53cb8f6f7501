//! Diagonal realization of the Dirichlet Laplacian on an interval or a
//! rectangle, and the scale of weighted coefficient norms built on it.
//!
//! Modes are the orthonormal products of √(2/L) sin(mπx/L). Coefficient arrays
//! are row-major in the mode indices (axis 0 slowest); physical arrays use
//! the same layout over the interior collocation nodes x_j = jL/(n+1).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorConfig {
    pub dimension: usize,
    pub lengths: Vec<f64>,
    pub n_modes: Vec<usize>,
    pub delta: f64,
}

impl OperatorConfig {
    pub fn line(length: f64, n_modes: usize, delta: f64) -> Self {
        Self { dimension: 1, lengths: vec![length], n_modes: vec![n_modes], delta }
    }

    pub fn rectangle(lengths: [f64; 2], n_modes: [usize; 2], delta: f64) -> Self {
        Self { dimension: 2, lengths: lengths.to_vec(), n_modes: n_modes.to_vec(), delta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

pub struct SpectralOperator {
    config: OperatorConfig,
    eigenvalues: Vec<f64>,
    plans: HashMap<usize, Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for SpectralOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOperator")
            .field("config", &self.config)
            .field("n_total", &self.eigenvalues.len())
            .finish()
    }
}

pub fn build_operator(config: OperatorConfig) -> Result<SpectralOperator> {
    SpectralOperator::new(config)
}

impl SpectralOperator {
    pub fn new(config: OperatorConfig) -> Result<Self> {
        let d = config.dimension;
        if d != 1 && d != 2 {
            return Err(Error::Config(format!("dimension must be 1 or 2, got {d}")));
        }
        if config.lengths.len() != d || config.n_modes.len() != d {
            return Err(Error::Config("lengths and n_modes need one entry per axis".into()));
        }
        for (&l, &n) in config.lengths.iter().zip(&config.n_modes) {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Config(format!("axis length must be positive, got {l}")));
            }
            if n < 4 || !n.is_power_of_two() {
                return Err(Error::Config(format!("n_modes must be a power of two >= 4, got {n}")));
            }
        }
        if !config.delta.is_finite() {
            return Err(Error::Config("delta must be finite".into()));
        }
        let axis_mu: Vec<Vec<f64>> = config
            .lengths
            .iter()
            .zip(&config.n_modes)
            .map(|(&l, &n)| (1..=n).map(|m| (m as f64 * PI / l).powi(2)).collect())
            .collect();
        let eigenvalues = if d == 1 {
            axis_mu[0].clone()
        } else {
            axis_mu[0].iter().flat_map(|a| axis_mu[1].iter().map(move |b| a + b)).collect()
        };
        let mut planner = FftPlanner::<f64>::new();
        let mut plans = HashMap::new();
        for &n in &config.n_modes {
            for len in [2 * (n + 1), 4 * (n + 1)] {
                plans.entry(len).or_insert_with(|| planner.plan_fft_forward(len));
            }
        }
        Ok(Self { config, eigenvalues, plans })
    }

    pub fn config(&self) -> &OperatorConfig {
        &self.config
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension
    }

    pub fn delta(&self) -> f64 {
        self.config.delta
    }

    /// Operator angle of −A; zero for the self-adjoint Dirichlet Laplacian.
    pub fn psi0(&self) -> f64 {
        0.0
    }

    /// Total number of modes.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues μ of −A in mode order (ascending in 1D).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut v = self.eigenvalues.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn mu_max(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(0.0, f64::max)
    }

    /// Interior collocation nodes of one axis.
    pub fn grid(&self, axis: usize) -> Vec<f64> {
        let n = self.config.n_modes[axis];
        let l = self.config.lengths[axis];
        (1..=n).map(|j| j as f64 * l / (n + 1) as f64).collect()
    }

    /// Physical cell volume of the collocation grid.
    pub fn cell_volume(&self) -> f64 {
        self.config
            .lengths
            .iter()
            .zip(&self.config.n_modes)
            .map(|(l, &n)| l / (n + 1) as f64)
            .product()
    }

    /// Mode-wise weights (1+μ)^{2(α−δ)}, so that ‖v‖²_α = Σ w v².
    pub fn scale_weights(&self, alpha: f64) -> Vec<f64> {
        let p = 2.0 * (alpha - self.config.delta);
        self.eigenvalues.iter().map(|mu| (1.0 + mu).powf(p)).collect()
    }

    pub fn transform(&self, data: &[f64], direction: Direction) -> Result<Vec<f64>> {
        match direction {
            Direction::Forward => self.forward(data),
            Direction::Inverse => self.inverse(data),
        }
    }

    /// Grid samples → sine coefficients.
    pub fn forward(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        Ok(self.apply_axes(values, &self.config.n_modes, &self.config.n_modes, |ax, line, out| {
            self.sine_analysis(ax, line, out)
        }))
    }

    /// Sine coefficients → grid samples.
    pub fn inverse(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_len(coeffs.len())?;
        let n = &self.config.n_modes;
        Ok(self.apply_axes(coeffs, n, n, |ax, line, out| self.synthesis(ax, line, out, Synth::Sine)))
    }

    /// Apply a pointwise map to the function with coefficients `coeffs`,
    /// evaluated on a refined grid (2n+1 points per axis) and projected back
    /// onto the first n modes.
    pub fn dealiased_map<F: Fn(f64) -> f64 + Sync>(&self, coeffs: &[f64], f: F) -> Result<Vec<f64>> {
        self.check_len(coeffs.len())?;
        let fine = self.fine_modes();
        let mut values = self.apply_axes(coeffs, &self.config.n_modes, &fine, |ax, line, out| self.synthesis(ax, line, out, Synth::Sine));
        values.par_iter_mut().for_each(|v| *v = f(*v));
        Ok(self.project_fine(&values))
    }

    /// Pseudo-spectral |∇u|^ρ, dealiased like [`Self::dealiased_map`].
    pub fn gradient_power(&self, coeffs: &[f64], rho: f64) -> Result<Vec<f64>> {
        self.check_len(coeffs.len())?;
        let fine = self.fine_modes();
        let dim = self.dimension();
        let mut sq = vec![0.0; fine.iter().product()];
        for deriv_axis in 0..dim {
            let part = self.apply_axes(coeffs, &self.config.n_modes, &fine, |ax, line, out| {
                let kind = if ax == deriv_axis { Synth::Cosine } else { Synth::Sine };
                self.synthesis(ax, line, out, kind)
            });
            sq.iter_mut().zip(&part).for_each(|(s, p)| *s += p * p);
        }
        sq.par_iter_mut().for_each(|v| *v = v.sqrt().powf(rho));
        Ok(self.project_fine(&sq))
    }

    /// Discrete L^q norm on the collocation grid (diagnostic only).
    pub fn physical_lq_norm(&self, coeffs: &[f64], q: f64) -> Result<f64> {
        let u = self.inverse(coeffs)?;
        let vol = self.cell_volume();
        if q.is_infinite() {
            return Ok(u.iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        Ok((u.iter().map(|v| v.abs().powf(q)).sum::<f64>() * vol).powf(1.0 / q))
    }

    fn fine_modes(&self) -> Vec<usize> {
        self.config.n_modes.iter().map(|n| 2 * n + 1).collect()
    }

    fn project_fine(&self, values: &[f64]) -> Vec<f64> {
        self.apply_axes(values, &self.fine_modes(), &self.config.n_modes, |ax, line, out| self.sine_analysis(ax, line, out))
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::Shape { expected: self.len(), got });
        }
        Ok(())
    }

    /// Apply a line operator along every axis in turn; the operator maps a
    /// line of `in_shape[axis]` entries to `out_shape[axis]` entries.
    fn apply_axes<F>(&self, data: &[f64], in_shape: &[usize], out_shape: &[usize], op: F) -> Vec<f64>
    where
        F: Fn(usize, &[f64], usize) -> Vec<f64> + Sync,
    {
        if self.dimension() == 1 {
            return op(0, data, out_shape[0]);
        }
        let (r0, c0) = (in_shape[0], in_shape[1]);
        let (r1, c1) = (out_shape[0], out_shape[1]);
        let rows: Vec<Vec<f64>> = (0..r0).into_par_iter().map(|r| op(1, &data[r * c0..(r + 1) * c0], c1)).collect();
        let cols: Vec<Vec<f64>> = (0..c1)
            .into_par_iter()
            .map(|c| {
                let col: Vec<f64> = rows.iter().map(|row| row[c]).collect();
                op(0, &col, r1)
            })
            .collect();
        let mut out = vec![0.0; r1 * c1];
        for (c, col) in cols.iter().enumerate() {
            for (r, v) in col.iter().enumerate() {
                out[r * c1 + c] = *v;
            }
        }
        out
    }

    fn plan(&self, len: usize) -> Arc<dyn Fft<f64>> {
        self.plans.get(&len).cloned().unwrap_or_else(|| FftPlanner::new().plan_fft_forward(len))
    }

    /// Synthesize the n_out grid values of Σ c_m φ_m (or of its derivative's
    /// cosine series) from `line.len()` coefficients.
    fn synthesis(&self, axis: usize, line: &[f64], n_out: usize, kind: Synth) -> Vec<f64> {
        let l = self.config.lengths[axis];
        let m_len = 2 * (n_out + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m_len];
        for (m, &c) in line.iter().enumerate() {
            let k = (m + 1) as f64 * PI / l;
            buf[m + 1].re = match kind {
                Synth::Sine => c,
                Synth::Cosine => c * k,
            };
        }
        self.plan(m_len).process(&mut buf);
        let norm = (2.0 / l).sqrt();
        (1..=n_out)
            .map(|j| match kind {
                Synth::Sine => -norm * buf[j].im,
                Synth::Cosine => norm * buf[j].re,
            })
            .collect()
    }

    /// Discrete sine analysis of `line` (samples on its own interior grid),
    /// returning the first n_out coefficients.
    fn sine_analysis(&self, axis: usize, line: &[f64], n_out: usize) -> Vec<f64> {
        let l = self.config.lengths[axis];
        let n_in = line.len();
        let m_len = 2 * (n_in + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m_len];
        for (j, &u) in line.iter().enumerate() {
            buf[j + 1].re = u;
        }
        self.plan(m_len).process(&mut buf);
        let scale = (2.0 / l).sqrt() * l / (n_in + 1) as f64;
        (1..=n_out).map(|m| -scale * buf[m].im).collect()
    }
}

#[derive(Clone, Copy)]
enum Synth {
    Sine,
    Cosine,
}

/// Coefficients of an element of the scale, tied to its operator.
#[derive(Debug, Clone)]
pub struct ScaleVector {
    op: Arc<SpectralOperator>,
    coeffs: Vec<f64>,
}

impl ScaleVector {
    pub fn new(op: Arc<SpectralOperator>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != op.len() {
            return Err(Error::Shape { expected: op.len(), got: coeffs.len() });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("scale vector entries must be finite".into()));
        }
        Ok(Self { op, coeffs })
    }

    pub fn zeros(op: Arc<SpectralOperator>) -> Self {
        let n = op.len();
        Self { op, coeffs: vec![0.0; n] }
    }

    /// `amplitude` times the mode with flat index `index`.
    pub fn mode(op: Arc<SpectralOperator>, index: usize, amplitude: f64) -> Self {
        let mut v = Self::zeros(op);
        v.coeffs[index] = amplitude;
        v
    }

    /// Build coefficients from (flat index, eigenvalue).
    pub fn from_fn<F: Fn(usize, f64) -> f64>(op: Arc<SpectralOperator>, f: F) -> Result<Self> {
        let coeffs = op.eigenvalues().iter().enumerate().map(|(i, &mu)| f(i, mu)).collect();
        Self::new(op, coeffs)
    }

    pub fn operator(&self) -> &Arc<SpectralOperator> {
        &self.op
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// ‖v‖_α = (Σ (1+μ)^{2(α−δ)} v²)^{1/2}.
    pub fn norm(&self, alpha: f64) -> f64 {
        weighted_norm(self.op.eigenvalues(), &self.coeffs, 2.0 * (alpha - self.op.delta()))
    }

    pub fn axpy(&self, a: f64, other: &ScaleVector) -> Result<ScaleVector> {
        if other.coeffs.len() != self.coeffs.len() {
            return Err(Error::Shape { expected: self.coeffs.len(), got: other.coeffs.len() });
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + a * y).collect();
        Ok(ScaleVector { op: self.op.clone(), coeffs })
    }
}

/// Weighted ℓ² norm with weights (1+μ)^p.
pub fn weighted_norm(eigenvalues: &[f64], coeffs: &[f64], p: f64) -> f64 {
    eigenvalues
        .iter()
        .zip(coeffs)
        .map(|(mu, c)| (1.0 + mu).powf(p) * c * c)
        .sum::<f64>()
        .sqrt()
}

/// X_α norm of a scale vector.
pub fn scale_norm(vec: &ScaleVector, alpha: f64) -> f64 {
    vec.norm(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(l: f64, n: usize) -> Arc<SpectralOperator> {
        Arc::new(build_operator(OperatorConfig::line(l, n, 1.0)).unwrap())
    }

    #[test]
    fn eigenvalue_examples() {
        let op = line(1.0, 4);
        let pi2 = PI * PI;
        for (m, mu) in op.eigenvalues().iter().enumerate() {
            assert!((mu - ((m + 1) * (m + 1)) as f64 * pi2).abs() < 1e-12);
        }
        assert!((line(2.0, 4).eigenvalues()[0] - pi2 / 4.0).abs() < 1e-14);
        let sq = build_operator(OperatorConfig::rectangle([1.0, 1.0], [4, 4], 1.0)).unwrap();
        assert!((sq.sorted_eigenvalues()[0] - 2.0 * pi2).abs() < 1e-12);
        assert_eq!(sq.psi0(), 0.0);
    }

    #[test]
    fn config_errors() {
        assert!(build_operator(OperatorConfig::line(1.0, 6, 1.0)).is_err());
        assert!(build_operator(OperatorConfig::line(0.0, 8, 1.0)).is_err());
        assert!(build_operator(OperatorConfig::line(1.0, 2, 1.0)).is_err());
        assert!(build_operator(OperatorConfig { dimension: 3, lengths: vec![1.0; 3], n_modes: vec![4; 3], delta: 0.0 }).is_err());
    }

    #[test]
    fn basis_function_transforms_to_unit_vector() {
        let op = line(1.0, 8);
        let vals: Vec<f64> = op.grid(0).iter().map(|x| 2f64.sqrt() * (PI * x).sin()).collect();
        let c = op.forward(&vals).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-14);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-14));
        assert!(op.forward(&[0.0; 8]).unwrap().iter().all(|v| *v == 0.0));
        assert!(op.forward(&[0.0; 7]).is_err());
    }

    #[test]
    fn scale_norm_examples() {
        let op = line(1.0, 4);
        let e1 = ScaleVector::mode(op.clone(), 0, 1.0);
        assert!((scale_norm(&e1, 1.0) - 1.0).abs() < 1e-15);
        assert!((scale_norm(&e1, 2.0) - (1.0 + PI * PI)).abs() < 1e-12);
        let mixed = ScaleVector::new(op, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let expect = ((1.0 + PI * PI) + (1.0 + 4.0 * PI * PI)).sqrt();
        assert!((scale_norm(&mixed, 1.5) - expect).abs() < 1e-12);
        assert!((expect - 7.165_753_415_060_19).abs() < 1e-12);
    }

    #[test]
    fn gradient_power_converges_to_projection() {
        // u = √2 sin(πx): |u'|² = π²(1 + cos 2πx), whose sine coefficients are
        // nonzero for odd m only. The collocation projection is first order in
        // the grid spacing because |u'|² does not vanish on the boundary.
        let exact = |k: f64| {
            let xs = 20_000;
            (0..xs)
                .map(|i| {
                    let x = (i as f64 + 0.5) / xs as f64;
                    PI * PI * (1.0 + (2.0 * PI * x).cos()) * 2f64.sqrt() * (k * PI * x).sin()
                })
                .sum::<f64>()
                / xs as f64
        };
        let err = |n: usize| {
            let op = line(1.0, n);
            let c = ScaleVector::mode(op.clone(), 0, 1.0).into_coeffs();
            let g2 = op.gradient_power(&c, 2.0).unwrap();
            (0..4).map(|m| (g2[m] - exact((m + 1) as f64)).abs()).fold(0.0, f64::max)
        };
        let (e16, e64) = (err(16), err(64));
        assert!(e16 < 5e-2, "{e16}");
        assert!(e64 < e16 / 3.0, "{e16} {e64}");
    }

    #[test]
    fn dealiased_square_of_mode_is_exactly_projected() {
        // (√2 sin πx)² = 1 − cos 2πx; its sine projection is exact on the fine grid
        // only up to the boundary effect, so compare against the odd-mode pattern.
        let op = line(1.0, 32);
        let c = ScaleVector::mode(op.clone(), 0, 1.0).into_coeffs();
        let sq = op.dealiased_map(&c, |u| u * u).unwrap();
        for (m, v) in sq.iter().enumerate() {
            if m % 2 == 1 {
                assert!(v.abs() < 1e-12, "even mode {} = {v}", m + 1);
            }
        }
        assert!(sq[0] > 0.0);
    }

    #[test]
    fn two_dimensional_round_trip() {
        let op = build_operator(OperatorConfig::rectangle([1.0, 2.0], [8, 4], 1.0)).unwrap();
        let c: Vec<f64> = (0..op.len()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let back = op.forward(&op.inverse(&c).unwrap()).unwrap();
        for (a, b) in c.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        // Parseval on the grid.
        let u = op.inverse(&c).unwrap();
        let l2 = (u.iter().map(|v| v * v).sum::<f64>() * op.cell_volume()).sqrt();
        let cn = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((l2 - cn).abs() < 1e-10 * cn);
    }
}
