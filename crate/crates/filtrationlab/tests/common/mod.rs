#![allow(dead_code)]

use filtrationlab::scenarios::{
    generate, Scenario, ScenarioDescriptor, ScenarioKind,
};

pub fn descriptor(id: &str, kind: ScenarioKind) -> ScenarioDescriptor {
    ScenarioDescriptor { id: id.into(), kind, driver: None, expected: None }
}

pub fn build(id: &str, kind: ScenarioKind) -> Scenario {
    generate(&descriptor(id, kind)).unwrap()
}

/// The six worked examples with pinned verdicts.
pub fn paper_six() -> Vec<Scenario> {
    vec![
        build(
            "cox",
            ScenarioKind::Cox { t: 6, branch_depth: 3, hazard: 0.25, hazard_jitter: 0.4, seed: 7 },
        ),
        build("mix_det", ScenarioKind::MixtureEx41 { t: 4, alpha: 0.35 }),
        build("mix_open", ScenarioKind::MixtureEx42 { t: 4, alpha: 0.35 }),
        build(
            "own_obs",
            ScenarioKind::OwnFiltrationExponential { t: 5, hazard: 0.3, observed: true },
        ),
        build(
            "own_hidden",
            ScenarioKind::OwnFiltrationExponential { t: 5, hazard: 0.3, observed: false },
        ),
        build("fg", ScenarioKind::FgEqualInaccessible { t: 4, death_prob: 0.3 }),
    ]
}

/// Broad mixed battery: every kind, several parameterizations.
pub fn corpus() -> Vec<Scenario> {
    let mut all = paper_six();
    all.push(build(
        "shock",
        ScenarioKind::CommonShock { t: 4, idio_hazard: 0.2, common_hazard: 0.1 },
    ));
    all.push(build("mix_small", ScenarioKind::MixtureEx41 { t: 2, alpha: 0.6 }));
    all.push(build("fg_heavy", ScenarioKind::FgEqualInaccessible { t: 3, death_prob: 0.7 }));
    all.extend(random_batch(8, 900, &[24, 48, 96]));
    all
}

/// Seeded random scenarios with depth ≤ 8 and a cycling atom budget.
pub fn random_batch(count: usize, base_seed: u64, atom_caps: &[usize]) -> Vec<Scenario> {
    (0..count)
        .map(|i| {
            let t = 2 + (i % 7);
            let max_atoms = atom_caps[i % atom_caps.len()];
            build(
                &format!("rand_{i}"),
                ScenarioKind::Random { t, seed: base_seed + i as u64, max_atoms },
            )
        })
        .collect()
}
