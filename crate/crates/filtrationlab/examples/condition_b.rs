//! The trace test: G-cells of the not-yet-occurred region must cut F-cells
//! exactly. Shows a generated scenario that passes and a hand-built space
//! where extra G-information about the future breaks the condition.

use filtrationlab::enlargement::check_condition_b;
use filtrationlab::scenarios::{generate, ScenarioDescriptor, ScenarioKind};
use filtrationlab::space::{Fil, FiniteFilteredSpace, Partition};
use filtrationlab::RandomTime;

fn main() -> Result<(), filtrationlab::Error> {
    let sc = generate(&ScenarioDescriptor {
        id: "demo".into(),
        kind: ScenarioKind::Random { t: 4, seed: 5, max_atoms: 48 },
        driver: None,
        expected: None,
    })?;
    let ok = check_condition_b(&sc.space, &sc.theta);
    println!("generated scenario: holds = {}", ok.holds);

    // Two survivors that F cannot tell apart, but G separates them one step
    // before anything has happened: the enlargement is no longer progressive.
    let atoms = vec!["a".into(), "b".into(), "c".into()];
    let weights = vec![0.4, 0.3, 0.3];
    let f = vec![Partition::trivial(3), Partition::trivial(3), Partition::discrete(3)];
    let g = vec![
        Partition::trivial(3),
        Partition::from_labels(&[0, 1, 2]),
        Partition::discrete(3),
    ];
    let space = FiniteFilteredSpace::new(2, atoms, weights, f, g)?;
    let theta = RandomTime::new(&space, vec![Some(2), None, None], Fil::G)?;
    let bad = check_condition_b(&space, &theta);
    println!("hand-built space:   holds = {}", bad.holds);
    if let Some((t, cell)) = bad.witness {
        println!("  witness: at t={t} the survivors of F-cell {cell} land in two G-cells");
    }
    Ok(())
}
