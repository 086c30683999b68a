//! Builds a four-atom space by hand: a coin revealed at t=1 and a branch
//! revealed only at t=3, with G knowing the branch from the start.

use filtrationlab::space::{Fil, FiniteFilteredSpace, Partition};
use filtrationlab::calculus::cond_exp;

fn main() -> Result<(), filtrationlab::Error> {
    let atoms = vec!["HA".into(), "HB".into(), "TA".into(), "TB".into()];
    let weights = vec![0.3, 0.2, 0.3, 0.2];
    let coin = Partition::from_labels(&["H", "H", "T", "T"]);
    let f = vec![
        Partition::trivial(4),
        coin.clone(),
        coin.clone(),
        Partition::discrete(4),
    ];
    let branch = Partition::from_labels(&["A", "B", "A", "B"]);
    let g = vec![
        branch.clone(),
        coin.join(&branch),
        coin.join(&branch),
        Partition::discrete(4),
    ];
    let space = FiniteFilteredSpace::new(3, atoms, weights, f, g)?;

    for t in 0..=space.horizon {
        println!(
            "t={t}  F cells {:?}  G cells {:?}",
            space.partition(Fil::F, t).cells,
            space.partition(Fil::G, t).cells
        );
    }

    let payoff = [4.0, 1.0, 2.0, 8.0];
    let at_one = cond_exp(&space, &payoff, 1, Fil::F, &space.base_weights)?;
    let at_one_g = cond_exp(&space, &payoff, 1, Fil::G, &space.base_weights)?;
    println!("E[X | F_1] = {at_one:?}");
    println!("E[X | G_1] = {at_one_g:?}");

    // Tower: conditioning the fine answer down again recovers the coarse one.
    let towered = cond_exp(&space, &at_one_g, 1, Fil::F, &space.base_weights)?;
    let gap = towered
        .iter()
        .zip(&at_one)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("tower gap = {gap:.2e}");
    println!("E[X] = {}", space.expect(&payoff));
    Ok(())
}
