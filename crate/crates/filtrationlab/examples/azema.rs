//! The survival bundle of a random time: S, its predictable version, the
//! multiplicative split S = S_0 * exp-factor * drift-factor, and where S
//! hits zero (announced or not).

use filtrationlab::enlargement::azema_bundle;
use filtrationlab::scenarios::{generate, ScenarioDescriptor, ScenarioKind};

fn main() -> Result<(), filtrationlab::Error> {
    let sc = generate(&ScenarioDescriptor {
        id: "demo".into(),
        kind: ScenarioKind::MixtureEx41 { t: 3, alpha: 0.4 },
        driver: None,
        expected: None,
    })?;
    let space = &sc.space;
    let b = azema_bundle(space, &sc.theta, &space.base_weights)?;

    println!("atom                S path                     pS path");
    for a in 0..space.n_atoms() {
        let s: Vec<String> = (0..=space.horizon).map(|t| format!("{:.3}", b.s.values[t][a])).collect();
        let ps: Vec<String> =
            (0..=space.horizon).map(|t| format!("{:.3}", b.s_pred.values[t][a])).collect();
        println!("{:<8} {}   {}", space.atoms[a], s.join(" "), ps.join(" "));
    }

    for a in 0..space.n_atoms() {
        let factor = b.mart_factor.values[space.horizon][a] * b.drift_factor.values[space.horizon][a];
        let gap = (b.s.values[space.horizon][a] - b.s.values[0][a] * factor).abs();
        println!(
            "{:<8} varsigma={:?} announced={:?} split gap={gap:.1e}",
            space.atoms[a], b.varsigma.value[a], b.announced_zero.value[a]
        );
    }
    Ok(())
}
