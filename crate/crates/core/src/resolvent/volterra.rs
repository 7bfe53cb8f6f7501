use rayon::prelude::*;

use super::table::{Method, ScalarResolventTable};
use crate::error::{Error, Result};
use crate::kernel::MaterialKernel;
use crate::quadrature::legendre01;

/// Magnitude beyond which a computed resolvent is reported as overflow.
pub const OVERFLOW_LIMIT: f64 = 1e15;

const CELL_NODES: usize = 12;

/// Product-trapezoid weights for s(t) = 1 − μ ∫₀ᵗ a(t−r) s(r) dr on a grid
/// of step h. They do not depend on μ and are shared across modes.
///
/// With s linear on each cell, the convolution at t_j is
/// `first[j−1]·s₀ + Σ_{i=1}^{j−1} lag[j−i]·s_i + diag·s_j`.
#[derive(Debug, Clone)]
pub struct VolterraWeights {
    pub h: f64,
    pub steps: usize,
    pub diag: f64,
    /// lag[k] for k = 1..steps−1 (lag[0] unused).
    pub lag: Vec<f64>,
    /// first[c] = Q_c, the weight of s₀ at t_{c+1}.
    pub first: Vec<f64>,
}

impl VolterraWeights {
    pub fn new(kernel: &MaterialKernel, h: f64, steps: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) || steps == 0 {
            return Err(Error::Grid(format!("need h > 0 and at least one step, got h = {h}")));
        }
        // P_c = ∫_cell a(v) dv, Q_c = ∫_cell a(v)(v − ch)/h dv over cell [ch, (c+1)h].
        let a2 = kernel.primitive(1, h);
        let a3 = kernel.primitive(2, h);
        let rule = legendre01(CELL_NODES);
        let cells: Vec<(f64, f64)> = (0..steps)
            .into_par_iter()
            .map(|c| {
                if c == 0 {
                    return (a2, a2 - a3 / h);
                }
                let x0 = c as f64 * h;
                let mut p = 0.0;
                let mut q = 0.0;
                for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let a = kernel.eval_a(x0 + h * x);
                    p += w * a;
                    q += w * a * x;
                }
                (h * p, h * q)
            })
            .collect();
        let diag = cells[0].0 - cells[0].1;
        let mut lag = vec![0.0; steps];
        for k in 1..steps {
            lag[k] = cells[k - 1].1 + cells[k].0 - cells[k].1;
        }
        let first = cells.iter().map(|c| c.1).collect();
        Ok(Self { h, steps, diag, lag, first })
    }

    /// March the linear Volterra equation for one μ.
    pub fn solve(&self, mu: f64) -> Result<Vec<f64>> {
        let mut s = vec![0.0; self.steps + 1];
        s[0] = 1.0;
        if mu == 0.0 {
            s.iter_mut().for_each(|v| *v = 1.0);
            return Ok(s);
        }
        let denom = 1.0 + mu * self.diag;
        for j in 1..=self.steps {
            let mut conv = self.first[j - 1] * s[0];
            for i in 1..j {
                conv += self.lag[j - i] * s[i];
            }
            let v = (1.0 - mu * conv) / denom;
            if !(v.abs() <= OVERFLOW_LIMIT) {
                return Err(Error::Overflow(format!(
                    "|s| exceeded {OVERFLOW_LIMIT:e} at t = {} for mu = {mu}",
                    j as f64 * self.h
                )));
            }
            s[j] = v;
        }
        Ok(s)
    }
}

pub(crate) fn grid_steps(h: f64, horizon: f64) -> Result<usize> {
    if !(h > 0.0 && horizon > 0.0 && h.is_finite() && horizon.is_finite()) {
        return Err(Error::Grid(format!("need h > 0 and T > 0, got h = {h}, T = {horizon}")));
    }
    let x = horizon / h;
    let n = x.round();
    if (x - n).abs() > 1e-9 * x || n < 1.0 {
        return Err(Error::Grid(format!("T / h = {x} is not an integer")));
    }
    if n > 1e6 {
        return Err(Error::Grid(format!("T / h = {n} exceeds 1e6 steps")));
    }
    Ok(n as usize)
}

/// Volterra tables for several μ on a shared grid. The error estimate
/// compares against the same scheme on the grid of step 2h.
pub fn volterra_tables(kernel: &MaterialKernel, mus: &[f64], h: f64, horizon: f64) -> Result<Vec<ScalarResolventTable>> {
    let steps = grid_steps(h, horizon)?;
    for &mu in mus {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::Domain(format!("mu must be non-negative, got {mu}")));
        }
    }
    let fine = VolterraWeights::new(kernel, h, steps)?;
    let coarse = if steps % 2 == 0 { Some(VolterraWeights::new(kernel, 2.0 * h, steps / 2)?) } else { None };
    let id = kernel.id();
    mus.par_iter()
        .map(|&mu| {
            let values = fine.solve(mu)?;
            let error_estimate = match &coarse {
                Some(c) => {
                    let cs = c.solve(mu)?;
                    cs.iter().enumerate().map(|(i, v)| (values[2 * i] - v).abs()).fold(0.0, f64::max) / 3.0
                }
                None => f64::NAN,
            };
            Ok(ScalarResolventTable { mu, h, values, method: Method::Volterra, error_estimate, kernel_id: id.clone() })
        })
        .collect()
}

/// Scalar resolvent on t_j = j h, j ≤ T/h, by the product-trapezoid rule.
pub fn scalar_resolvent_volterra(kernel: &MaterialKernel, mu: f64, h: f64, horizon: f64) -> Result<ScalarResolventTable> {
    Ok(volterra_tables(kernel, &[mu], h, horizon)?.remove(0))
}
