//! Backward equations for defaultable claims: the G-filtration equation
//! stopped at the default, and its two F-filtration reductions (under the
//! base measure and under an equivalent measure), which agree with the
//! G-solution before θ exactly when the measure is an invariance measure.

use crate::calculus::drift_residual;
use crate::enlargement::azema_bundle;
use crate::error::{Error, Result};
use crate::measure::DensityPair;
use crate::process::AdaptedProcess;
use crate::random_time::RandomTime;
use crate::space::{Fil, FiniteFilteredSpace};
use serde::{Deserialize, Serialize};

/// One-period generator g_t(z). Implementations must not distinguish atoms
/// within an F_{t-1}-cell: the solvers read the value at one representative
/// atom per cell.
pub trait Driver {
    fn eval(&self, t: usize, atom: usize, z: f64) -> f64;
}

/// Serializable drivers for scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriverSpec {
    Zero,
    /// g(z) = -rate·z, i.e. one-period discounting z = base/(1+rate).
    Discount { rate: f64 },
    Affine { slope: f64, intercept: f64 },
    /// g(z) = cap·tanh(gain·z/cap): affine near zero, bounded by ±cap.
    Saturating { gain: f64, cap: f64 },
}

impl Driver for DriverSpec {
    fn eval(&self, _t: usize, _atom: usize, z: f64) -> f64 {
        match *self {
            DriverSpec::Zero => 0.0,
            DriverSpec::Discount { rate } => -rate * z,
            DriverSpec::Affine { slope, intercept } => slope * z + intercept,
            DriverSpec::Saturating { gain, cap } => cap * (gain * z / cap).tanh(),
        }
    }
}

/// Solution of one backward pass. `value` carries the filtration it was
/// solved in; the G-solution is frozen at the last pre-default value, so
/// row t holds V_{min(t, θ-1, t_max-1)}.
#[derive(Debug, Clone)]
pub struct BsdeSolution {
    pub value: AdaptedProcess,
    pub t_max: usize,
    pub max_iters: usize,
}

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX: usize = 100;

/// Solves z = base + g_t(z) by Newton with a finite-difference slope;
/// exact in one step for affine drivers.
fn solve_implicit(
    driver: &dyn Driver,
    t: usize,
    atom: usize,
    base: f64,
    cell: usize,
    iters_seen: &mut usize,
) -> Result<f64> {
    let mut z = base;
    for k in 1..=NEWTON_MAX {
        let f = z - base - driver.eval(t, atom, z);
        if f.abs() <= NEWTON_TOL * (1.0 + z.abs()) {
            *iters_seen = (*iters_seen).max(k);
            return Ok(z);
        }
        let h = 1e-7 * (1.0 + z.abs());
        let slope = (driver.eval(t, atom, z + h) - driver.eval(t, atom, z)) / h;
        let fprime = 1.0 - slope;
        if fprime.abs() < 1e-9 || !fprime.is_finite() {
            return Err(Error::FixedPointDiverged { t, cell, iters: k });
        }
        z -= f / fprime;
        if !z.is_finite() {
            return Err(Error::FixedPointDiverged { t, cell, iters: k });
        }
    }
    Err(Error::FixedPointDiverged { t, cell, iters: NEWTON_MAX })
}

fn check_horizon(space: &FiniteFilteredSpace, t_max: usize) -> Result<()> {
    if t_max == 0 || t_max > space.horizon {
        return Err(Error::InvalidTime(format!(
            "t_max {} outside 1..={}",
            t_max, space.horizon
        )));
    }
    Ok(())
}

/// The claim pays `recovery_t` at t = θ when θ < t_max and nothing
/// otherwise; `driver` accrues per period alive. Backward condition per
/// alive G_{t-1}-cell:
/// Z_{t-1} = E[1_{θ>t}Z_t + 1_{θ=t}recovery_t | cell] + g_t(Z_{t-1}),
/// with Z_{t_max-1} = 0.
pub fn solve_g_bsde(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    recovery: &AdaptedProcess,
    driver: &dyn Driver,
    t_max: usize,
    measure: &[f64],
) -> Result<BsdeSolution> {
    check_horizon(space, t_max)?;
    let n = space.n_atoms();
    let mut rows = vec![vec![0.0; n]; t_max];
    let mut max_iters = 0;
    for t in (1..t_max).rev() {
        let (next, rest) = {
            let (a, b) = rows.split_at_mut(t);
            (&b[0], a)
        };
        let prev_row = &mut rest[t - 1];
        for (c, cell) in space.partition(Fil::G, t - 1).cells.iter().enumerate() {
            if theta.at(cell[0]) <= t - 1 {
                continue;
            }
            let mass: f64 = cell.iter().map(|&a| measure[a]).sum();
            let mut base = 0.0;
            for &a in cell {
                if theta.at(a) > t {
                    base += measure[a] * next[a];
                } else if theta.at(a) == t {
                    base += measure[a] * recovery.values[t][a];
                }
            }
            base /= mass;
            let z = solve_implicit(driver, t, cell[0], base, c, &mut max_iters)?;
            for &a in cell {
                prev_row[a] = z;
            }
        }
    }
    let values: Vec<Vec<f64>> = (0..=space.horizon)
        .map(|t| {
            (0..n)
                .map(|a| {
                    let cut = t.min(t_max - 1).min(theta.at(a).saturating_sub(1));
                    rows[cut][a]
                })
                .collect()
        })
        .collect();
    Ok(BsdeSolution {
        value: AdaptedProcess::raw(values, Fil::G).classify(space),
        t_max,
        max_iters,
    })
}

/// F-reduction under the base measure, solved per F_{t-1}-cell C:
/// U_{t-1} = (E[S_t U_t | C] + E[Δ𝖠_t recovery_t | C]) / S_{t-1}(C)
///           + g_t(U_{t-1}),
/// pinned to 0 on cells where S_{t-1} vanishes. Agrees with the G-solution
/// on {θ > t} unconditionally.
pub fn solve_reduced_q(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    recovery: &AdaptedProcess,
    driver: &dyn Driver,
    t_max: usize,
    measure: &[f64],
) -> Result<BsdeSolution> {
    check_horizon(space, t_max)?;
    reduced_solve(space, theta, recovery, driver, t_max, measure, None)
}

/// F-reduction whose continuation value is a conditional expectation under
/// the equivalent measure of `pair`:
/// U_{t-1} = (1 - ΔD_t/S_{t-1})(C) · E_pair[U_t | C] + recovery leg
///           + g_t(U_{t-1}).
/// Matches the G-solution before θ exactly when the pair is an invariance
/// measure; a drifting pair shows up as a gap.
pub fn solve_reduced_p(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    recovery: &AdaptedProcess,
    driver: &dyn Driver,
    t_max: usize,
    measure: &[f64],
    pair: &DensityPair,
) -> Result<BsdeSolution> {
    check_horizon(space, t_max)?;
    reduced_solve(space, theta, recovery, driver, t_max, measure, Some(pair))
}

fn reduced_solve(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    recovery: &AdaptedProcess,
    driver: &dyn Driver,
    t_max: usize,
    measure: &[f64],
    pair: Option<&DensityPair>,
) -> Result<BsdeSolution> {
    if recovery.filtration != Fil::F {
        return Err(Error::FiltrationMismatch { context: "reduced BSDE recovery" });
    }
    let bundle = azema_bundle(space, theta, measure)?;
    let p_weights = pair.map(|pr| pr.p_weights(space));
    let n = space.n_atoms();
    let mut rows = vec![vec![0.0; n]; t_max];
    let mut max_iters = 0;
    for t in (1..t_max).rev() {
        let (next, rest) = {
            let (a, b) = rows.split_at_mut(t);
            (&b[0], a)
        };
        let prev_row = &mut rest[t - 1];
        for (c, cell) in space.partition(Fil::F, t - 1).cells.iter().enumerate() {
            let s_prev = bundle.s.values[t - 1][cell[0]];
            if s_prev == 0.0 {
                continue;
            }
            let mass: f64 = cell.iter().map(|&a| measure[a]).sum();
            let recovery_leg: f64 = cell
                .iter()
                .map(|&a| measure[a] * bundle.hit_dual.delta(t, a) * recovery.values[t][a])
                .sum::<f64>()
                / mass
                / s_prev;
            let continuation = match &p_weights {
                None => {
                    cell.iter()
                        .map(|&a| measure[a] * bundle.s.values[t][a] * next[a])
                        .sum::<f64>()
                        / mass
                        / s_prev
                }
                Some(pw) => {
                    let p_mass: f64 = cell.iter().map(|&a| pw[a]).sum();
                    let mean: f64 =
                        cell.iter().map(|&a| pw[a] * next[a]).sum::<f64>() / p_mass;
                    (bundle.s_pred.values[t][cell[0]] / s_prev) * mean
                }
            };
            let z = solve_implicit(
                driver, t, cell[0], continuation + recovery_leg, c, &mut max_iters,
            )?;
            for &a in cell {
                prev_row[a] = z;
            }
        }
    }
    let values: Vec<Vec<f64>> = (0..=space.horizon)
        .map(|t| rows[t.min(t_max - 1)].clone())
        .collect();
    Ok(BsdeSolution {
        value: AdaptedProcess::raw(values, Fil::F),
        t_max,
        max_iters,
    })
}

/// Drift of the compensated value process rebuilt from a G-solution:
/// ΔM_t = 1_{θ>t-1}1_{t<t_max}[1_{θ>t}Z_t + 1_{θ=t}recovery_t − Z_{t-1}
///        + g_t(Z_{t-1})]. Zero drift is the defining property of the
/// solution, so this is an independent audit of the solver.
pub fn martingale_residual(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    recovery: &AdaptedProcess,
    driver: &dyn Driver,
    solution: &BsdeSolution,
    measure: &[f64],
) -> Result<f64> {
    let n = space.n_atoms();
    let z = &solution.value;
    let mut vals = vec![vec![0.0; n]];
    for t in 1..=space.horizon {
        let prev = vals[t - 1].clone();
        let row: Vec<f64> = (0..n)
            .map(|a| {
                let mut dm = 0.0;
                if theta.at(a) > t - 1 && t < solution.t_max {
                    let inflow = if theta.at(a) > t {
                        z.values[t][a]
                    } else if theta.at(a) == t {
                        recovery.values[t][a]
                    } else {
                        0.0
                    };
                    dm = inflow - z.values[t - 1][a]
                        + driver.eval(t, a, z.values[t - 1][a]);
                }
                prev[a] + dm
            })
            .collect();
        vals.push(row);
    }
    drift_residual(space, &AdaptedProcess::raw(vals, Fil::G), measure)
}

/// max_t,ω |Z_t − U_{min(t, θ-1)}|: the G-solution against a reduction
/// stopped before the default.
pub fn stopped_gap(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    g_solution: &BsdeSolution,
    reduced: &BsdeSolution,
) -> f64 {
    let _ = space;
    let theta_g = RandomTime {
        value: theta.value.clone(),
        filtration: Fil::G,
    };
    let lifted = AdaptedProcess::raw(reduced.value.values.clone(), Fil::G);
    let stopped = crate::calculus::stop(&lifted, &theta_g, crate::calculus::StopMode::Before);
    g_solution.value.max_abs_diff(&stopped)
}
