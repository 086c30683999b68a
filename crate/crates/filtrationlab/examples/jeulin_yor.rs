//! Stopping an F-martingale at a random time breaks the martingale property
//! in G; the compensated version repairs it. Both stopping conventions are
//! shown: strictly before the time, and at the time.

use filtrationlab::calculus::{cond_exp, drift_residual, stop, StopMode};
use filtrationlab::enlargement::jeulin_yor;
use filtrationlab::process::AdaptedProcess;
use filtrationlab::scenarios::{generate, ScenarioDescriptor, ScenarioKind};
use filtrationlab::space::Fil;

fn main() -> Result<(), filtrationlab::Error> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(17);
    let sc = generate(&ScenarioDescriptor {
        id: "demo".into(),
        kind: ScenarioKind::Random { t: 4, seed, max_atoms: 48 },
        driver: None,
        expected: None,
    })?;
    let space = &sc.space;
    let w = &space.base_weights;
    let n = space.n_atoms();

    // Closed F-martingale: conditional expectations of the terminal cell index.
    let terminal = space.partition(Fil::F, space.horizon);
    let payoff: Vec<f64> = (0..n).map(|a| terminal.cell_of[a] as f64).collect();
    let rows: Vec<Vec<f64>> = (0..=space.horizon)
        .map(|t| cond_exp(space, &payoff, t, Fil::F, w))
        .collect::<Result<_, _>>()?;
    let m = AdaptedProcess::raw(rows, Fil::F);

    for mode in [StopMode::Before, StopMode::At] {
        let lifted = AdaptedProcess::raw(m.values.clone(), Fil::G);
        let stopped = stop(&lifted, &sc.theta, mode);
        let naive = drift_residual(space, &stopped, w)?;
        let jy = jeulin_yor(space, &sc.theta, &m, mode, w)?;
        let repaired = drift_residual(space, &jy.martingale, w)?;
        println!("{mode:?}: stopped drift {naive:.3e} -> compensated drift {repaired:.3e}");
    }
    Ok(())
}
