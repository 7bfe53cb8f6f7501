//! Gaussian quadrature rules built with the Golub–Welsch algorithm.
//!
//! Rules are cached process-wide; building one is an O(n³) eigenproblem but
//! every caller in this crate reuses a handful of sizes.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, SymmetricEigen};
use once_cell::sync::Lazy;

use crate::specfun::ln_gamma;

/// Nodes and weights of an n-point rule.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Family {
    Jacobi01,
    Laguerre,
}

type Key = (Family, usize, u64, u64);

static CACHE: Lazy<Mutex<HashMap<Key, Arc<GaussRule>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn cached(key: Key, build: impl FnOnce() -> GaussRule) -> Arc<GaussRule> {
    if let Some(rule) = CACHE.lock().expect("quadrature cache poisoned").get(&key) {
        return rule.clone();
    }
    let rule = Arc::new(build());
    CACHE
        .lock()
        .expect("quadrature cache poisoned")
        .entry(key)
        .or_insert(rule)
        .clone()
}

fn golub_welsch(diag: &[f64], offdiag: &[f64], mu0: f64) -> GaussRule {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = offdiag[i];
            m[(i + 1, i)] = offdiag[i];
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let v0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss–Jacobi rule on [0, 1] for the weight (1 − s)^a s^b, a, b > −1.
pub fn jacobi01(n: usize, a: f64, b: f64) -> Arc<GaussRule> {
    assert!(n >= 1 && a > -1.0 && b > -1.0, "invalid Jacobi rule parameters");
    cached((Family::Jacobi01, n, a.to_bits(), b.to_bits()), || {
        // Recurrence on [-1, 1] for (1 - x)^a (1 + x)^b, then mapped.
        let ab = a + b;
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n.saturating_sub(1));
        for k in 0..n {
            let kf = k as f64;
            let d = if k == 0 {
                (b - a) / (ab + 2.0)
            } else {
                (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
            };
            diag.push(d);
        }
        for k in 1..n {
            let kf = k as f64;
            let s = 2.0 * kf + ab;
            let beta = if k == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            off.push(beta.sqrt());
        }
        let ln_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(ab + 2.0);
        let rule = golub_welsch(&diag, &off, ln_mu0.exp());
        let scale = 2f64.powf(-(ab + 1.0));
        GaussRule {
            nodes: rule.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect(),
            weights: rule.weights.iter().map(|w| w * scale).collect(),
        }
    })
}

/// Gauss–Legendre rule on [0, 1].
pub fn legendre01(n: usize) -> Arc<GaussRule> {
    jacobi01(n, 0.0, 0.0)
}

/// Generalized Gauss–Laguerre rule on [0, ∞) for the weight x^a e^{−x}.
pub fn laguerre(n: usize, a: f64) -> Arc<GaussRule> {
    assert!(n >= 1 && a > -1.0, "invalid Laguerre rule parameters");
    cached((Family::Laguerre, n, a.to_bits(), 0), || {
        let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + a + 1.0).collect();
        let off: Vec<f64> = (1..n).map(|k| (k as f64 * (k as f64 + a)).sqrt()).collect();
        golub_welsch(&diag, &off, ln_gamma(a + 1.0).exp())
    })
}
