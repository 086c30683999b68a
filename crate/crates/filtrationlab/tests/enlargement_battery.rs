//! Whole-corpus checks of the survival decomposition and its transfer
//! machinery: every generated kind, exhaustive over terminal cells.

mod common;

use filtrationlab::calculus::{cond_exp, drift_residual, StopMode};
use filtrationlab::enlargement::{
    azema_bundle, before_theta_transfer, check_condition_b, hit_indicator, jeulin_yor, reduce,
};
use filtrationlab::process::{AdaptedProcess, ProcessClass};
use filtrationlab::space::Fil;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn survival_decomposition_identities_hold_corpus_wide() {
    for sc in common::corpus() {
        let w = &sc.space.base_weights;
        let b = azema_bundle(&sc.space, &sc.theta, w).unwrap();
        let n = sc.space.n_atoms();
        for t in 1..=sc.space.horizon {
            for a in 0..n {
                let ps = b.s_pred.values[t][a];
                let s_prev = b.s.values[t - 1][a];
                let dd = b.comp.delta(t, a);
                assert!((ps - (s_prev - dd)).abs() <= 1e-12, "{}: pS != S_prev - dD at t={t}", sc.id);
                if ps > 0.0 {
                    let product = (1.0 + dd / ps) * (1.0 - dd / s_prev);
                    assert!((product - 1.0).abs() <= 1e-12, "{}: multdec t={t}", sc.id);
                } else {
                    assert!(b.mart.delta(t, a).abs() <= 1e-12, "{}: absorbed t={t}", sc.id);
                }
                let rebuilt =
                    b.s.values[0][a] * b.mart_factor.values[t][a] * b.drift_factor.values[t][a];
                assert!(
                    (rebuilt - b.s.values[t][a]).abs() <= 1e-12,
                    "{}: S = S0*Q*D at t={t} atom={a}",
                    sc.id
                );
            }
        }
        for a in 0..n {
            if let Some(k) = sc.theta.value[a] {
                if k >= 1 {
                    assert!(b.s.values[k - 1][a] > 0.0, "{}: S positive before death", sc.id);
                }
            }
            match (b.announced_zero.value[a], b.varsigma.value[a]) {
                (Some(z), vs) => assert_eq!(vs, Some(z), "{}: announced zero is first zero", sc.id),
                (None, _) => {}
            }
        }
        let compensated = hit_indicator(&sc.space, &sc.theta).sub(&b.intensity);
        assert!(
            drift_residual(&sc.space, &compensated, w).unwrap() <= 1e-12,
            "{}: hit compensation",
            sc.id
        );
    }
}

#[test]
fn generated_kinds_satisfy_the_trace_condition() {
    for sc in common::corpus() {
        let check = check_condition_b(&sc.space, &sc.theta);
        assert!(check.holds, "{}: witness {:?}", sc.id, check.witness);
    }
}

#[test]
fn stopped_martingales_compensate_in_both_modes() {
    for sc in common::corpus() {
        let w = &sc.space.base_weights;
        let part = sc.space.partition(Fil::F, sc.t_max).clone();
        for cell in 0..part.n_cells() {
            let mut payoff = vec![0.0; sc.space.n_atoms()];
            for &a in &part.cells[cell] {
                payoff[a] = 1.0;
            }
            let rows: Vec<Vec<f64>> = (0..=sc.space.horizon)
                .map(|t| cond_exp(&sc.space, &payoff, t.min(sc.t_max), Fil::F, w).unwrap())
                .collect();
            let m = AdaptedProcess::raw(rows, Fil::F);
            for mode in [StopMode::Before, StopMode::At] {
                let jy = jeulin_yor(&sc.space, &sc.theta, &m, mode, w).unwrap();
                let res = drift_residual(&sc.space, &jy.martingale, w).unwrap();
                assert!(res <= 1e-10, "{}: cell {cell} mode {mode:?} residual {res}", sc.id);
            }
        }
    }
}

#[test]
fn alive_conditioning_reduces_to_the_small_filtration() {
    for sc in common::corpus() {
        let w = &sc.space.base_weights;
        let n = sc.space.n_atoms();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let masked: Vec<f64> = (0..n)
            .map(|a| {
                if sc.theta.at(a) > sc.space.horizon { rng.gen_range(0.5..1.5) } else { 0.0 }
            })
            .collect();
        let rows: Vec<Vec<f64>> = (0..=sc.space.horizon)
            .map(|t| cond_exp(&sc.space, &masked, t, Fil::G, w).unwrap())
            .collect();
        let z = AdaptedProcess::raw(rows, Fil::G);
        let reduced = reduce(&sc.space, &sc.theta, &z, ProcessClass::Optional, w).unwrap();
        assert_eq!(reduced.filtration, Fil::F);
        assert!(reduced.check_class(&sc.space).is_ok());
        for t in 0..=sc.space.horizon {
            for a in 0..n {
                if sc.theta.at(a) > t {
                    assert_eq!(reduced.values[t][a], z.values[t][a], "{} t={t}", sc.id);
                }
            }
        }
    }
}

#[test]
fn transfer_verdicts_agree_in_both_polarities() {
    for sc in common::corpus() {
        let w = &sc.space.base_weights;
        let n = sc.space.n_atoms();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let payoff: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rows: Vec<Vec<f64>> = (0..=sc.space.horizon)
            .map(|t| cond_exp(&sc.space, &payoff, t, Fil::F, w).unwrap())
            .collect();
        let closed = AdaptedProcess::raw(rows, Fil::F);
        let check = before_theta_transfer(&sc.space, &sc.theta, &closed, w, 1e-10).unwrap();
        assert!(check.agree, "{}: polarity split {check:?}", sc.id);

        // Under immersion (flat martingale part) stopping costs nothing, so
        // a closed martingale must pass on both sides.
        let b = azema_bundle(&sc.space, &sc.theta, w).unwrap();
        let immersion = (1..=sc.space.horizon)
            .all(|t| (0..n).all(|a| b.mart.delta(t, a).abs() <= 1e-14));
        if immersion {
            assert!(check.f_passes && check.g_passes, "{}: {check:?}", sc.id);
        }

        let drifting = closed.map(|v| v * v + 0.3 * v);
        let bad = before_theta_transfer(&sc.space, &sc.theta, &drifting, w, 1e-10).unwrap();
        assert!(bad.agree, "{}: polarity split {bad:?}", sc.id);
    }
}
