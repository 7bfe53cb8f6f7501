#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// E_{1.5}(−1), from a 40-digit series evaluation.
pub const ML_15_M1: f64 = 0.396_629_365_318_088_084_5;
/// E_{1.5}(−0.5^{1.5}).
pub const ML_15_HALF: f64 = 0.754_048_803_869_356_944;
/// B(0.3, 1.7).
pub const BETA_03_17: f64 = 2.718_255_454_215_653_35;
/// B_{0.25}(0.5, 0.9).
pub const IBETA_025_05_09: f64 = 1.009_122_375_662_777_55;
/// I_κ(0.5, 0.5, 0.5; 1.5).
pub const I_KAPPA_HALF: f64 = 3.253_553_790_237_508_20;
/// (0.035)^{1/0.7}, the certified time of the worked budget.
pub const TAU_BUDGET: f64 = 0.008_319_499_619_482_42;

/// Double-exponential quadrature of ∫₀¹ f(s, 1−s) ds. The second argument
/// is the distance to the right endpoint, computed without cancellation.
pub fn tanh_sinh01<F: Fn(f64, f64) -> f64>(f: F, level: u32) -> f64 {
    let h = 0.5f64.powi(level as i32);
    let t_max = 6.5;
    let n = (t_max / h).ceil() as i64;
    let mut sum = 0.0;
    for k in -n..=n {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        // s = (1 + tanh u)/2, 1 − s = 1/(1 + e^{2u})
        let e = (2.0 * u).exp();
        let (s, r) = if u >= 0.0 { (1.0 / (1.0 + 1.0 / e), 1.0 / (1.0 + e)) } else { (e / (1.0 + e), 1.0 / (1.0 + e)) };
        if s <= 0.0 || r <= 0.0 {
            continue;
        }
        let w = 0.5 * FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        sum += w * f(s, r);
    }
    sum * h
}

/// ∫ₐᵇ f(x) dx by [`tanh_sinh01`].
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, level: u32) -> f64 {
    (b - a) * tanh_sinh01(|s, _| f(a + (b - a) * s), level)
}

/// Power series Σ zᵏ/Γ(βk+1); adequate for |z| ≲ 10.
pub fn mittag_leffler_oracle(beta: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..400 {
        let kf = k as f64;
        let log_term = kf * z.abs().ln() - libm::lgamma(beta * kf + 1.0);
        if k > 0 && log_term < -60.0 && kf * beta > z.abs() {
            break;
        }
        let sign = if z < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        sum += if k == 0 { 1.0 } else { sign * log_term.exp() };
    }
    sum
}

/// e^{−t/2}(cos ωt + sin ωt/(2ω)) with ω = √(μ − 1/4): resolvent of g = e^{−t}, μ > 1/4.
pub fn maxwell_unit_oracle(mu: f64, t: f64) -> f64 {
    let w = (mu - 0.25).sqrt();
    (-t / 2.0).exp() * ((w * t).cos() + (w * t).sin() / (2.0 * w))
}
