//! Cross-kind verdict agreement, density equivalence under arbitrary
//! measures, and the martingale characterizations on generated corpora.

mod common;

use filtrationlab::calculus::{cond_exp, drift_residual};
use filtrationlab::enlargement::progressive_partitions;
use filtrationlab::error::Error;
use filtrationlab::invariance::{
    candidate_density, p_martingale_characterization, p_martingale_characterization_zero_comp,
    pseudo_stopping_check, theorem_equivalence, verify_condition_a, VerifyMode,
};
use filtrationlab::measure::DensityPair;
use filtrationlab::process::AdaptedProcess;
use filtrationlab::random_time::RandomTime;
use filtrationlab::space::{Fil, FiniteFilteredSpace, Partition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn verdicts_match_their_predictions_corpus_wide() {
    for sc in common::corpus() {
        let w = &sc.space.base_weights;
        let v = verify_condition_a(
            &sc.space, &sc.theta, sc.t_max, w, VerifyMode::SpanningOnly, 1e-9,
        )
        .unwrap();
        assert_eq!(Some(v.invariant), sc.expected.invariant, "{}", sc.id);
        if let Some(want) = sc.expected.pseudo_stopping {
            let ps = pseudo_stopping_check(&sc.space, &sc.theta, w, 1e-12).unwrap();
            assert_eq!(ps.a_terminal_one, want, "{}", sc.id);
        }
    }
}

#[test]
fn projection_difference_is_always_a_martingale() {
    for sc in common::corpus() {
        let w = &sc.space.base_weights;
        let ps = pseudo_stopping_check(&sc.space, &sc.theta, w, 1e-12).unwrap();
        let res = drift_residual(&sc.space, &ps.a_minus_d, w).unwrap();
        assert!(res <= 1e-13, "{}: A - D drift {res}", sc.id);
    }
}

#[test]
fn three_tests_agree_under_arbitrary_equivalent_densities() {
    for sc in common::random_batch(10, 4000, &[32, 64]) {
        let w = &sc.space.base_weights;
        let mut rng = ChaCha8Rng::seed_from_u64(777);
        for _ in 0..5 {
            let xi: Vec<f64> =
                (0..sc.space.n_atoms()).map(|_| rng.gen_range(0.2..1.8)).collect();
            let pair = DensityPair::from_terminal(&sc.space, &xi, Fil::F).unwrap();
            let eq =
                theorem_equivalence(&sc.space, &sc.theta, &pair, sc.t_max, w, 1e-9).unwrap();
            assert!(eq.agree, "{}: direct={} qf={} cor={}", sc.id, eq.direct, eq.qf, eq.cor);
        }
    }
}

fn spanning_p_martingale(
    space: &FiniteFilteredSpace,
    t_max: usize,
    cell: usize,
    p_weights: &[f64],
) -> AdaptedProcess {
    let mut payoff = vec![0.0; space.n_atoms()];
    for &a in &space.partition(Fil::F, t_max).cells[cell] {
        payoff[a] = 1.0;
    }
    let rows: Vec<Vec<f64>> = (0..=space.horizon)
        .map(|t| cond_exp(space, &payoff, t.min(t_max), Fil::F, p_weights).unwrap())
        .collect();
    AdaptedProcess::raw(rows, Fil::F)
}

#[test]
fn characterization_matches_on_an_invariant_scenario() {
    let sc = common::build(
        "mix",
        filtrationlab::scenarios::ScenarioKind::MixtureEx41 { t: 3, alpha: 0.4 },
    );
    let w = &sc.space.base_weights;
    let cd = candidate_density(&sc.space, &sc.theta, sc.t_max, w).unwrap();
    assert!(cd.positive);
    let pair = DensityPair::from_terminal(&sc.space, &cd.density.values[sc.t_max], Fil::F).unwrap();
    let pw = pair.p_weights(&sc.space);
    let cells = sc.space.partition(Fil::F, sc.t_max).n_cells();
    for cell in 0..cells {
        let p = spanning_p_martingale(&sc.space, sc.t_max, cell, &pw);
        let rec = p_martingale_characterization(
            &sc.space, &sc.theta, &pair, &p, sc.t_max, w, 1e-10,
        )
        .unwrap();
        assert!(rec.p_passes && rec.q_passes && rec.agree, "cell {cell}: {rec:?}");
        let off = p.map(|v| v * 1.7 + 0.1 * v * v);
        let rec = p_martingale_characterization(
            &sc.space, &sc.theta, &pair, &off, sc.t_max, w, 1e-10,
        )
        .unwrap();
        assert!(rec.agree, "cell {cell} perturbed: {rec:?}");
    }
}

/// No deaths in the window: the zero-compensator shortcut applies and must
/// agree with the general form; with deaths present it must refuse.
#[test]
fn zero_compensator_variant_guards_its_precondition() {
    let f_parts = vec![
        Partition::trivial(4),
        Partition::from_labels(&[0, 0, 1, 1]),
        Partition::discrete(4),
        Partition::discrete(4),
    ];
    let theta_vals: Vec<Option<usize>> = vec![None; 4];
    let g_parts = progressive_partitions(&f_parts, &theta_vals);
    let space = FiniteFilteredSpace::new(
        3,
        (0..4).map(|i| format!("w{i}")).collect(),
        vec![0.3, 0.2, 0.25, 0.25],
        f_parts,
        g_parts.clone(),
    )
    .unwrap();
    let theta = RandomTime::new(&space, theta_vals, Fil::G).unwrap();
    let w = space.base_weights.clone();
    let cd = candidate_density(&space, &theta, 3, &w).unwrap();
    assert!(cd.positive);
    let pair = DensityPair::from_terminal(&space, &cd.density.values[3], Fil::F).unwrap();
    let p = spanning_p_martingale(&space, 3, 0, &pair.p_weights(&space));
    let general =
        p_martingale_characterization(&space, &theta, &pair, &p, 3, &w, 1e-10).unwrap();
    let shortcut =
        p_martingale_characterization_zero_comp(&space, &theta, &pair, &p, 3, &w, 1e-10).unwrap();
    assert!(general.agree && shortcut.agree);
    assert_eq!(general.p_passes, shortcut.p_passes);

    let sc = common::build(
        "cox",
        filtrationlab::scenarios::ScenarioKind::Cox {
            t: 4,
            branch_depth: 2,
            hazard: 0.3,
            hazard_jitter: 0.0,
            seed: 3,
        },
    );
    let cd = candidate_density(&sc.space, &sc.theta, sc.t_max, &sc.space.base_weights).unwrap();
    let pair2 =
        DensityPair::from_terminal(&sc.space, &cd.density.values[sc.t_max], Fil::F).unwrap();
    let p2 = spanning_p_martingale(&sc.space, sc.t_max, 0, &pair2.p_weights(&sc.space));
    let err = p_martingale_characterization_zero_comp(
        &sc.space,
        &sc.theta,
        &pair2,
        &p2,
        sc.t_max,
        &sc.space.base_weights,
        1e-10,
    );
    assert!(matches!(err, Err(Error::InvalidParameter(_))));
}

/// Coin × branch space with all deaths announced by T and the branch hidden
/// from F until the final step: each absorbed F_{T−1}-cell splits into two
/// terminal subcells, leaving genuine room for a free factor.
fn coin_branch() -> (FiniteFilteredSpace, RandomTime) {
    // Atoms [b0c0, b0c1, b1c0, b1c1]: branch 0 dies at coin+1, branch 1 is
    // the tail dying at the horizon. F observes only the coin after t = 1.
    let coin = Partition::from_labels(&[0, 1, 0, 1]);
    let f_parts = vec![
        Partition::trivial(4),
        coin.clone(),
        coin,
        Partition::discrete(4),
    ];
    let theta_vals = vec![Some(1), Some(2), Some(3), Some(3)];
    let g_parts = progressive_partitions(&f_parts, &theta_vals);
    let space = FiniteFilteredSpace::new(
        3,
        ["b0c0", "b0c1", "b1c0", "b1c1"].iter().map(|s| s.to_string()).collect(),
        vec![0.25; 4],
        f_parts,
        g_parts,
    )
    .unwrap();
    let theta = RandomTime::new(&space, theta_vals, Fil::G).unwrap();
    (space, theta)
}

/// The density is only pinned where ᵖS > 0: on the absorbed event (which is
/// known one step ahead) any mean-zero relative perturbation of the terminal
/// value leaves all three tests passing.
#[test]
fn free_factor_on_the_absorbed_region_preserves_invariance() {
    let (space, theta) = coin_branch();
    let w = &space.base_weights;
    let t = 3;
    let b = filtrationlab::enlargement::azema_bundle(&space, &theta, w).unwrap();
    let cd = candidate_density(&space, &theta, t, w).unwrap();
    assert!(cd.positive, "fixture must be invariant before perturbing");
    let mut rng = ChaCha8Rng::seed_from_u64(100);

    for _ in 0..3 {
        let mut factor = vec![1.0; space.n_atoms()];
        let sub = space.partition(Fil::F, t).clone();
        let mut touched = false;
        for cell in &space.partition(Fil::F, t - 1).cells {
            if cell.iter().any(|&a| b.s_pred.values[t][a] != 0.0) {
                continue;
            }
            // g constant per F_t-subcell, demeaned over the parent cell.
            let mut levels = std::collections::BTreeMap::new();
            for &a in cell {
                levels.entry(sub.cell_of[a]).or_insert_with(|| rng.gen_range(-0.4..0.4));
            }
            let mass: f64 = cell.iter().map(|&a| w[a]).sum();
            let mean: f64 =
                cell.iter().map(|&a| w[a] * levels[&sub.cell_of[a]]).sum::<f64>() / mass;
            for &a in cell {
                factor[a] = 1.0 + (levels[&sub.cell_of[a]] - mean);
                if factor[a] != 1.0 {
                    touched = true;
                }
            }
        }
        assert!(touched, "no absorbed cell to perturb");

        let modified: Vec<f64> = (0..space.n_atoms())
            .map(|a| cd.density.values[t][a] * factor[a])
            .collect();
        let pair = DensityPair::from_terminal(&space, &modified, Fil::F).unwrap();
        let eq = theorem_equivalence(&space, &theta, &pair, t, w, 1e-9).unwrap();
        assert!(eq.agree && eq.direct && eq.qf && eq.cor, "{eq:?}");

        // Control: a lopsided bump on one absorbed cell shifts the pinned
        // projection at earlier times and must fail all three tests in
        // unison (a uniform bump would cancel against normalization).
        let first_cell = space.partition(Fil::F, t - 1).cell_of[0];
        let skewed: Vec<f64> = (0..space.n_atoms())
            .map(|a| {
                let bump = if space.partition(Fil::F, t - 1).cell_of[a] == first_cell {
                    1.5
                } else {
                    1.0
                };
                cd.density.values[t][a] * bump
            })
            .collect();
        let pair = DensityPair::from_terminal(&space, &skewed, Fil::F).unwrap();
        let eq = theorem_equivalence(&space, &theta, &pair, t, w, 1e-9).unwrap();
        assert!(eq.agree && !eq.direct && !eq.qf && !eq.cor, "{eq:?}");
    }
}
