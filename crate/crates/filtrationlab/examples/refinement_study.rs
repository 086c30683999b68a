//! Halving the step of a constant-hazard clock drives the protection price
//! toward its continuous limit 1 - exp(-lambda) at first order.

use filtrationlab::bsde::{solve_g_bsde, DriverSpec};
use filtrationlab::process::AdaptedProcess;
use filtrationlab::scenarios::{generate, ScenarioDescriptor, ScenarioKind};
use filtrationlab::space::Fil;

fn main() -> Result<(), filtrationlab::Error> {
    let lambda = 0.8f64;
    let target = 1.0 - (-lambda).exp();
    println!("steps   price        error      ratio");
    let mut prev_err: Option<f64> = None;
    for t in [4usize, 8, 16] {
        let sc = generate(&ScenarioDescriptor {
            id: format!("refine{t}"),
            kind: ScenarioKind::Cox {
                t,
                branch_depth: 1,
                hazard: lambda / (t as f64 - 1.0),
                hazard_jitter: 0.0,
                seed: 1,
            },
            driver: None,
            expected: None,
        })?;
        let ones = AdaptedProcess::constant(&sc.space, 1.0, Fil::F);
        let g = solve_g_bsde(
            &sc.space,
            &sc.theta,
            &ones,
            &DriverSpec::Zero,
            sc.t_max,
            &sc.space.base_weights,
        )?;
        let price = g.value.values[0][0];
        let err = target - price;
        match prev_err {
            Some(p) => println!("{t:<7} {price:.8}   {err:.2e}   {:.3}", err / p),
            None => println!("{t:<7} {price:.8}   {err:.2e}"),
        }
        prev_err = Some(err);
    }
    println!("limit   {target:.8}");
    Ok(())
}
