//! Optional and predictable projections of a G-adapted payoff stream onto F,
//! and the dual projection of an increasing process, with the duality pairing
//! E[(H . A)_T] = E[(H . pA)_T] checked numerically.

use filtrationlab::calculus::{dual_projection, pathwise_integral, project};
use filtrationlab::process::{AdaptedProcess, ProcessClass};
use filtrationlab::scenarios::{generate, ScenarioDescriptor, ScenarioKind};
use filtrationlab::space::Fil;

fn main() -> Result<(), filtrationlab::Error> {
    let sc = generate(&ScenarioDescriptor {
        id: "demo".into(),
        kind: ScenarioKind::CommonShock { t: 4, idio_hazard: 0.25, common_hazard: 0.1 },
        driver: None,
        expected: None,
    })?;
    let space = &sc.space;
    let w = &space.base_weights;

    // A G-process F cannot see: the running count of shocks already revealed.
    let n = space.n_atoms();
    let rows: Vec<Vec<f64>> = (0..=space.horizon)
        .map(|t| (0..n).map(|a| ((a * 7 + t * 3) % 5) as f64).collect())
        .collect();
    let x = AdaptedProcess::raw(rows, Fil::G).classify(space);

    let opt = project(space, &x, ProcessClass::Optional, Fil::F, w)?;
    let pred = project(space, &x, ProcessClass::Predictable, Fil::F, w)?;
    println!("optional projection row t=2:    {:?}", &opt.values[2][..4]);
    println!("predictable projection row t=2: {:?}", &pred.values[2][..4]);

    // Increasing process: cumulative shocks. Its F-dual compensator makes the
    // same integrals against predictable integrands.
    let inc_rows: Vec<Vec<f64>> = (0..=space.horizon)
        .map(|t| (0..n).map(|a| (sc.theta.at(a).min(t)) as f64).collect())
        .collect();
    let a_proc = AdaptedProcess::raw(inc_rows, Fil::G).classify(space);
    let dual = dual_projection(space, &a_proc, ProcessClass::Predictable, Fil::F, w)?;

    let h = AdaptedProcess::constant(space, 1.0, Fil::F);
    let lhs = space.expect(pathwise_integral(&h, &a_proc).values.last().unwrap());
    let rhs = space.expect(pathwise_integral(&h, &dual).values.last().unwrap());
    println!("E[(H.A)_T] = {lhs:.12}");
    println!("E[(H.pA)_T] = {rhs:.12}");
    println!("duality gap = {:.2e}", (lhs - rhs).abs());
    Ok(())
}
