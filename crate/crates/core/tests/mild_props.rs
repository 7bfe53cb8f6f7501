mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::TAU_BUDGET;
use memres_core::kernel::MaterialKernel;
use memres_core::mild::{
    certified_existence_time, continue_mild, eps_regular_profile, lipschitz_dependence, mode_resolvents, solve_mild,
    ForcingPath, MildProblem, MildSolution, NonlinearitySpec, SolveStatus, WellPosednessBudget,
};
use memres_core::spectral::{build_operator, weighted_norm, OperatorConfig, ScaleVector, SpectralOperator};
use memres_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn line(n: usize) -> Arc<SpectralOperator> {
    Arc::new(build_operator(OperatorConfig::line(1.0, n, 1.0)).unwrap())
}

fn power_kernel() -> MaterialKernel {
    MaterialKernel::power(0.5).unwrap()
}

fn sup_distance(a: &MildSolution, b: &MildSolution) -> f64 {
    let stride = (b.times.len() - 1) / (a.times.len() - 1);
    let eigs = a.operator().eigenvalues();
    (0..a.times.len())
        .map(|j| {
            let d: Vec<f64> = a.states[j].iter().zip(&b.states[j * stride]).map(|(x, y)| x - y).collect();
            weighted_norm(eigs, &d, 0.0)
        })
        .fold(0.0, f64::max)
}

#[test]
fn zero_nonlinearity_is_pure_resolvent_action() {
    let op = line(32);
    let u0 = ScaleVector::from_fn(op.clone(), |m, _| 1.0 / (1.0 + m as f64).powi(3)).unwrap();
    let p = MildProblem::new(power_kernel(), u0.clone(), NonlinearitySpec::zero(), 0.5, 5e-3).unwrap();
    let sol = solve_mild(&p).unwrap();
    let cols = mode_resolvents(&p, sol.times.len() - 1).unwrap();
    assert_eq!(sol.states[0], u0.coeffs());
    for (j, u) in sol.states.iter().enumerate() {
        for (m, v) in u.iter().enumerate() {
            assert!((v - cols[m][j] * u0.coeffs()[m]).abs() <= 1e-12, "node {j} mode {m}");
        }
    }
}

fn forced_first_mode(h: f64) -> f64 {
    let op = line(16);
    let u0 = ScaleVector::mode(op.clone(), 0, 0.3);
    let mut e1 = vec![0.0; op.len()];
    e1[0] = 1.0;
    let nl = NonlinearitySpec::forced_linear(0.0, ForcingPath::constant(e1));
    let p = MildProblem::new(MaterialKernel::hookean(), u0, nl, 1.0, h).unwrap();
    let sol = solve_mild(&p).unwrap();
    sol.times
        .iter()
        .zip(&sol.states)
        .map(|(t, u)| (u[0] - ((PI * t).cos() * 0.3 + (PI * t).sin() / PI)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn forced_first_mode_matches_closed_form() {
    let hs = [4e-2, 2e-2, 1e-2];
    let errs: Vec<f64> = hs.iter().map(|&h| forced_first_mode(h)).collect();
    for (h, e) in hs.iter().zip(&errs) {
        assert!(*e <= 5.0 * h * h, "h = {h}: error {e:e}");
    }
    let order = (errs[0] / errs[2]).log2() / 2.0;
    assert!(order >= 1.8, "order {order}");
}

#[test]
fn step_halving_converges_at_second_order() {
    let op = line(32);
    let u0 = ScaleVector::mode(op, 0, 1.0);
    let sols: Vec<MildSolution> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&h| {
            let p = MildProblem::new(power_kernel(), u0.clone(), NonlinearitySpec::power(1.0, 2.0), 0.5, h).unwrap();
            solve_mild(&p).unwrap()
        })
        .collect();
    let d1 = sup_distance(&sols[0], &sols[1]);
    let d2 = sup_distance(&sols[1], &sols[2]);
    assert!(d2 < d1);
    assert!((d1 / d2).log2() >= 1.8, "order {}", (d1 / d2).log2());
}

#[test]
fn continuation_keeps_history() {
    let op = line(16);
    let u0 = ScaleVector::mode(op, 0, 1.0);
    for nl in [NonlinearitySpec::zero(), NonlinearitySpec::power(1.0, 2.0)] {
        let short = MildProblem::new(power_kernel(), u0.clone(), nl.clone(), 0.5, 1e-2).unwrap();
        let first = solve_mild(&short).unwrap();
        let extended = continue_mild(&first, &short, 1.0).unwrap();
        let direct = solve_mild(&short.clone().with_horizon(1.0)).unwrap();
        assert_eq!(extended.times.len(), direct.times.len());
        assert_eq!(&extended.states[..first.states.len()], &first.states[..]);
        assert!(sup_distance(&extended, &direct) <= 1e-10);
    }
}

#[test]
fn continuation_refuses_bad_requests() {
    let op = line(16);
    let blow = MildProblem::new(power_kernel(), ScaleVector::mode(op.clone(), 0, 50.0), NonlinearitySpec::power(1.0, 2.0), 1.0, 1e-3)
        .unwrap()
        .with_refinement(false);
    let sol = solve_mild(&blow).unwrap();
    assert_eq!(sol.status.label(), "blowup");
    assert!(matches!(continue_mild(&sol, &blow, 2.0), Err(Error::Precondition(_))));
    let calm = MildProblem::new(power_kernel(), ScaleVector::mode(op, 0, 0.1), NonlinearitySpec::zero(), 0.5, 1e-2).unwrap();
    let sol = solve_mild(&calm).unwrap();
    assert!(matches!(continue_mild(&sol, &calm, 0.5), Err(Error::Precondition(_))));
    assert!(matches!(continue_mild(&sol, &calm.clone().with_step(5e-3), 1.0), Err(Error::Precondition(_))));
}

#[test]
fn blowup_is_monotone_and_stable_under_halving() {
    let op = line(64);
    let u0 = ScaleVector::mode(op, 0, 50.0);
    let taus: Vec<f64> = [1e-3, 5e-4]
        .iter()
        .map(|&h| {
            let p = MildProblem::new(power_kernel(), u0.clone(), NonlinearitySpec::power(1.0, 2.0), 1.0, h).unwrap();
            let sol = solve_mild(&p).unwrap();
            let SolveStatus::Blowup { tau_estimate } = sol.status else {
                panic!("expected blow-up, got {:?}", sol.status)
            };
            let tail = &sol.norms_x1pe[sol.norms_x1pe.len().saturating_sub(5)..];
            assert!(tail.windows(2).all(|w| w[0] < w[1]), "{tail:?}");
            assert!(tau_estimate.is_finite() && tau_estimate > sol.last_time() - h);
            tau_estimate
        })
        .collect();
    assert!((taus[0] - taus[1]).abs() < 0.05 * taus[0], "{taus:?}");
}

#[test]
fn profile_without_weight_is_the_norm_history() {
    let op = line(32);
    let u0 = ScaleVector::mode(op, 2, 1.0);
    let p = MildProblem::new(power_kernel(), u0, NonlinearitySpec::zero(), 0.2, 1e-2).unwrap().with_small_t(true).with_eps(0.0);
    let sol = solve_mild(&p).unwrap();
    let prof = eps_regular_profile(&sol, 0.0, 1.5).unwrap();
    let tail = &prof.values[prof.values.len() - (sol.times.len() - 1)..];
    assert_eq!(tail, &sol.norm_history(1.0)[1..]);
    assert!(matches!(eps_regular_profile(&solve_mild(&p.with_small_t(false)).unwrap(), 0.2, 1.5), Err(Error::Sampling(_))));
}

#[test]
fn rough_datum_profile_decays() {
    let op = line(256);
    let eps = 0.2;
    let datum = ScaleVector::from_fn(op, |_, mu| (1.0 + mu).powf(-0.25 - eps / 2.0)).unwrap();
    let p = MildProblem::new(power_kernel(), datum, NonlinearitySpec::zero(), 1.0, 1e-3).unwrap().with_small_t(true).with_eps(eps);
    let prof = eps_regular_profile(&solve_mild(&p).unwrap(), eps, 1.5).unwrap();
    assert!(prof.pass, "decay {}", prof.decay);
}

#[test]
fn linear_lipschitz_ratio_is_bounded_by_the_resolvent() {
    let op = line(16);
    let u0 = ScaleVector::mode(op.clone(), 0, 1.0);
    let u1 = ScaleVector::from_fn(op, |m, _| if m < 3 { 1.0 } else { 0.0 }).unwrap();
    let p = MildProblem::new(power_kernel(), u0.clone(), NonlinearitySpec::zero(), 1.0, 1e-2).unwrap();
    let cols = mode_resolvents(&p, 100).unwrap();
    let m = cols.iter().flat_map(|c| c.iter()).fold(1.0f64, |a, v| a.max(v.abs()));
    let r = lipschitz_dependence(&p, &u0, &u1, 0.0, 1.5).unwrap();
    assert!(r.ratio_max <= m * (1.0 + 1e-12), "{} vs {m}", r.ratio_max);
    assert!(r.ratio_max >= 1.0 - 1e-12);
}

#[test]
fn nonlinear_lipschitz_ratio_stabilizes() {
    let op = line(16);
    let u0 = ScaleVector::mode(op.clone(), 0, 1.0);
    let p = MildProblem::new(power_kernel(), u0.clone(), NonlinearitySpec::power(1.0, 2.0), 0.5, 1e-2)
        .unwrap()
        .with_gamma_index(0.8);
    let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&d| {
            let u1 = u0.axpy(d, &ScaleVector::mode(op.clone(), 0, 1.0)).unwrap();
            let r = lipschitz_dependence(&p, &u0, &u1, 0.25, 1.5).unwrap();
            assert!(!r.outside_window);
            r.ratio_max
        })
        .collect();
    for w in ratios.windows(2) {
        assert!((w[0] - w[1]).abs() <= 0.1 * w[1], "{ratios:?}");
    }
    let u1 = u0.axpy(1e-3, &ScaleVector::mode(op, 0, 1.0)).unwrap();
    assert!(lipschitz_dependence(&p, &u0, &u1, 0.6, 1.5).unwrap().outside_window);
    assert!(matches!(lipschitz_dependence(&p, &u0, &u0, 0.0, 1.5), Err(Error::Precondition(_))));
}

#[test]
fn certified_window_is_honored() {
    let budget = WellPosednessBudget { m: 1.0, c: 1.0, rho: 2.0, gamma0: 0.8, zeta_g: 1.5, x0_norm: 1.0, mu: 1.0, tau_probe: f64::INFINITY };
    let w = certified_existence_time(&budget).unwrap();
    assert!((w.tau - TAU_BUDGET).abs() < 1e-15);
    let op = line(32);
    let unit = ScaleVector::mode(op.clone(), 0, 1.0);
    let x0 = ScaleVector::mode(op.clone(), 0, 1.0 / unit.norm(1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let coeffs: Vec<f64> = (0..op.len()).map(|m| if m < 8 { rng.random_range(-1.0..1.0) } else { 0.0 }).collect();
        let dir = ScaleVector::new(op.clone(), coeffs).unwrap();
        let radius = w.r * rng.random_range(0.0..1.0) / dir.norm(1.0);
        let datum = x0.axpy(radius, &dir).unwrap();
        assert!(datum.axpy(-1.0, &x0).unwrap().norm(1.0) <= w.r);
        let p = MildProblem::new(power_kernel(), datum, NonlinearitySpec::power(1.0, 2.0), w.tau, w.tau / 20.0).unwrap();
        let sol = solve_mild(&p).unwrap();
        assert!(sol.status.is_completed(), "{:?}", sol.status);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn completed_runs_start_at_the_datum_with_finite_norms(
        coeffs in prop::collection::vec(-1.0f64..1.0, 8),
        c0 in -1.0f64..1.0,
        rho in 1.5f64..3.0,
    ) {
        let op = line(8);
        let u0 = ScaleVector::new(op, coeffs).unwrap();
        let p = MildProblem::new(power_kernel(), u0.clone(), NonlinearitySpec::power(c0, rho), 0.1, 1e-2).unwrap();
        let sol = solve_mild(&p).unwrap();
        prop_assert_eq!(&sol.states[0][..], u0.coeffs());
        if sol.status.is_completed() {
            prop_assert!(sol.norms_x1.iter().chain(&sol.norms_x1pe).all(|v| v.is_finite()));
        }
    }
}
