//! A terminal density defines a changed measure; martingales under it drift
//! under the base measure until the transform subtracts the bracket
//! correction.

use filtrationlab::calculus::{cond_exp, drift_residual};
use filtrationlab::measure::{girsanov_transform, DensityPair, GirsanovForm};
use filtrationlab::process::AdaptedProcess;
use filtrationlab::scenarios::{generate, ScenarioDescriptor, ScenarioKind};
use filtrationlab::space::Fil;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), filtrationlab::Error> {
    let sc = generate(&ScenarioDescriptor {
        id: "demo".into(),
        kind: ScenarioKind::Cox { t: 5, branch_depth: 2, hazard: 0.2, hazard_jitter: 0.3, seed: 3 },
        driver: None,
        expected: None,
    })?;
    let space = &sc.space;
    let w = &space.base_weights;
    let n = space.n_atoms();

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..1.7)).collect();
    let pair = DensityPair::from_terminal(space, &xi, Fil::F)?;
    let p_weights = pair.p_weights(space);
    println!(
        "density is a base-measure martingale:   drift {:.2e}",
        drift_residual(space, &pair.q, w)?
    );

    // Closed martingale under the changed measure.
    let payoff: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rows: Vec<Vec<f64>> = (0..=space.horizon)
        .map(|t| cond_exp(space, &payoff, t, Fil::F, &p_weights))
        .collect::<Result<_, _>>()?;
    let x = AdaptedProcess::raw(rows, Fil::F);

    println!(
        "changed-measure martingale, base drift: {:.2e}",
        drift_residual(space, &x, w)?
    );
    for form in [GirsanovForm::Optional, GirsanovForm::Predictable] {
        let fixed = girsanov_transform(space, &x, &pair, form)?;
        println!(
            "{form:?} correction, base drift:     {:.2e}",
            drift_residual(space, &fixed, w)?
        );
    }
    Ok(())
}
