//! Two mixtures that differ only in their tail branch: death at a
//! deterministic final date versus never. Both are invariant, but only the
//! first compensates every F-martingale to expectation one.

use filtrationlab::invariance::pseudo_stopping_check;
use filtrationlab::scenarios::{generate, ScenarioDescriptor, ScenarioKind};

fn main() -> Result<(), filtrationlab::Error> {
    for (name, kind) in [
        ("deterministic tail", ScenarioKind::MixtureEx41 { t: 4, alpha: 0.35 }),
        ("unbounded tail", ScenarioKind::MixtureEx42 { t: 4, alpha: 0.35 }),
    ] {
        let sc = generate(&ScenarioDescriptor {
            id: name.into(),
            kind,
            driver: None,
            expected: None,
        })?;
        let ps = pseudo_stopping_check(&sc.space, &sc.theta, &sc.space.base_weights, 1e-12)?;
        println!(
            "{name}: terminal dual value gap {:.2e} -> pseudo-stopping = {}",
            ps.terminal_gap, ps.a_terminal_one
        );
        println!("  martingale part of S: max |Q| = {:.2e}", ps.mart_max);
    }
    Ok(())
}
