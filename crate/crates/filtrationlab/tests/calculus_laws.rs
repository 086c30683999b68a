//! Structural laws of the pathwise calculus, exercised on randomly generated
//! filtered spaces rather than hand-built fixtures.

mod common;

use filtrationlab::calculus::{
    cond_exp, doob_decomposition, drift_residual, dual_projection, pathwise_integral, project,
    square_bracket, stoch_exp, stoch_log, stop, StopMode,
};
use filtrationlab::process::{AdaptedProcess, ProcessClass};
use filtrationlab::scenarios::Scenario;
use filtrationlab::space::Fil;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scenario(seed: u64) -> Scenario {
    common::random_batch(1, seed, &[48]).pop().unwrap()
}

/// Adapted but non-martingale: each row is the projection of fresh noise.
fn generic_adapted(sc: &Scenario, fil: Fil, seed: u64) -> AdaptedProcess {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sc.space.n_atoms();
    let rows: Vec<Vec<f64>> = (0..=sc.space.horizon)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let raw = AdaptedProcess::raw(rows, fil);
    project(&sc.space, &raw, ProcessClass::Optional, fil, &sc.space.base_weights).unwrap()
}

/// Value at t is the operand's value at t−1, so it can feed the integral's
/// time-t slot.
fn lagged(x: &AdaptedProcess) -> AdaptedProcess {
    let mut rows = vec![x.values[0].clone()];
    for t in 1..x.values.len() {
        rows.push(x.values[t - 1].clone());
    }
    AdaptedProcess::raw(rows, x.filtration)
}

fn predictable(sc: &Scenario, fil: Fil, seed: u64) -> AdaptedProcess {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sc.space.n_atoms();
    let rows: Vec<Vec<f64>> = (0..=sc.space.horizon)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let raw = AdaptedProcess::raw(rows, fil);
    project(&sc.space, &raw, ProcessClass::Predictable, fil, &sc.space.base_weights).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tower_property(seed in 0u64..10_000) {
        let sc = scenario(seed);
        let w = &sc.space.base_weights;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7457);
        let xi: Vec<f64> =
            (0..sc.space.n_atoms()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let t = sc.space.horizon;
        let s = t / 2;
        let inner = cond_exp(&sc.space, &xi, t, Fil::F, w).unwrap();
        let via = cond_exp(&sc.space, &inner, s, Fil::F, w).unwrap();
        let direct = cond_exp(&sc.space, &xi, s, Fil::F, w).unwrap();
        for a in 0..sc.space.n_atoms() {
            prop_assert!((via[a] - direct[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_projection_duality(seed in 0u64..10_000) {
        // E[(H·A)_T] = E[(H·Aᵖ)_T] for predictable H.
        let sc = scenario(seed);
        let w = &sc.space.base_weights;
        let a = generic_adapted(&sc, Fil::G, seed ^ 1);
        let h = predictable(&sc, Fil::G, seed ^ 2);
        let dual = dual_projection(&sc.space, &a, ProcessClass::Predictable, Fil::G, w).unwrap();
        let lhs = sc.space.expect(&pathwise_integral(&h, &a).values[sc.space.horizon]);
        let rhs = sc.space.expect(&pathwise_integral(&h, &dual).values[sc.space.horizon]);
        prop_assert!((lhs - rhs).abs() < 1e-12, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn exponential_and_log_invert(seed in 0u64..10_000) {
        let sc = scenario(seed);
        let y = generic_adapted(&sc, Fil::F, seed ^ 3).map(|v| 0.4 * v);
        let x = stoch_exp(&y);
        let back = stoch_exp(&stoch_log(&x, None).unwrap());
        prop_assert!(x.max_abs_diff(&back) < 1e-12);
    }

    #[test]
    fn integration_by_parts(seed in 0u64..10_000) {
        let sc = scenario(seed);
        let x = generic_adapted(&sc, Fil::G, seed ^ 4);
        let y = generic_adapted(&sc, Fil::G, seed ^ 5);
        let parts = pathwise_integral(&lagged(&x), &y)
            .add(&pathwise_integral(&lagged(&y), &x))
            .add(&square_bracket(&x, &y));
        for t in 0..=sc.space.horizon {
            for a in 0..sc.space.n_atoms() {
                let lhs = x.values[t][a] * y.values[t][a] - x.values[0][a] * y.values[0][a];
                prop_assert!((lhs - parts.values[t][a]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn doob_decomposition_splits_exactly(seed in 0u64..10_000) {
        let sc = scenario(seed);
        let w = &sc.space.base_weights;
        let x = generic_adapted(&sc, Fil::G, seed ^ 6);
        let (m, a) = doob_decomposition(&sc.space, &x, w).unwrap();
        prop_assert!(drift_residual(&sc.space, &m, w).unwrap() < 1e-13);
        prop_assert!(a.class == ProcessClass::Predictable && a.check_class(&sc.space).is_ok());
        let rebuilt = m.add(&a).add(&AdaptedProcess::raw(
            vec![x.values[0].clone(); sc.space.horizon + 1],
            Fil::G,
        ));
        prop_assert!(x.max_abs_diff(&rebuilt) < 1e-12);
    }

    #[test]
    fn optional_stopping_preserves_martingales(seed in 0u64..10_000) {
        let sc = scenario(seed);
        let w = &sc.space.base_weights;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let xi: Vec<f64> =
            (0..sc.space.n_atoms()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rows: Vec<Vec<f64>> = (0..=sc.space.horizon)
            .map(|t| cond_exp(&sc.space, &xi, t, Fil::G, w).unwrap())
            .collect();
        let m = AdaptedProcess::raw(rows, Fil::G);
        prop_assert!(drift_residual(&sc.space, &m, w).unwrap() < 1e-13);
        let stopped = stop(&m, &sc.theta, StopMode::At);
        prop_assert!(drift_residual(&sc.space, &stopped, w).unwrap() < 1e-13);
    }
}
