//! Discrete-time stochastic calculus primitives. All operations are exact
//! cell-arithmetic; tolerances only enter through the martingale tests.

use crate::error::{Error, Result};
use crate::process::{AdaptedProcess, ProcessClass};
use crate::random_time::RandomTime;
use crate::space::{Fil, FiniteFilteredSpace};

/// Conditional expectation of an atom-indexed payoff given the time-t cells
/// of the tagged filtration, under arbitrary full-support weights.
pub fn cond_exp(
    space: &FiniteFilteredSpace,
    x: &[f64],
    t: usize,
    fil: Fil,
    measure: &[f64],
) -> Result<Vec<f64>> {
    let part = space.partition(fil, t);
    let mut out = vec![0.0; space.n_atoms()];
    for (c, cell) in part.cells.iter().enumerate() {
        let mass: f64 = cell.iter().map(|&a| measure[a]).sum();
        if mass <= 0.0 {
            return Err(Error::ZeroMassCell { t, cell: c });
        }
        let avg = cell.iter().map(|&a| measure[a] * x[a]).sum::<f64>() / mass;
        for &a in cell {
            out[a] = avg;
        }
    }
    Ok(out)
}

/// Optional projection E[X_t | t] or predictable projection E[X_t | t-1]
/// onto the target filtration.
pub fn project(
    space: &FiniteFilteredSpace,
    x: &AdaptedProcess,
    kind: ProcessClass,
    target: Fil,
    measure: &[f64],
) -> Result<AdaptedProcess> {
    let lag = match kind {
        ProcessClass::Optional => 0,
        ProcessClass::Predictable => 1,
        ProcessClass::Raw => {
            return Err(Error::WrongClass {
                expected: "optional or predictable projection kind",
                t: 0,
                atom: 0,
            })
        }
    };
    let mut values = Vec::with_capacity(x.values.len());
    for (t, row) in x.values.iter().enumerate() {
        values.push(cond_exp(space, row, t.saturating_sub(lag), target, measure)?);
    }
    Ok(AdaptedProcess {
        values,
        filtration: target,
        class: kind,
    })
}

/// Dual projection of a finite-variation process: increments are projected
/// one by one, Δ(Aᵖ)_t = E[ΔA_t | t-1] (kind predictable) or
/// Δ(Aᵒ)_t = E[ΔA_t | t] (kind optional), started at E[A₀ | 0].
pub fn dual_projection(
    space: &FiniteFilteredSpace,
    a: &AdaptedProcess,
    kind: ProcessClass,
    target: Fil,
    measure: &[f64],
) -> Result<AdaptedProcess> {
    let lag = match kind {
        ProcessClass::Optional => 0,
        ProcessClass::Predictable => 1,
        ProcessClass::Raw => {
            return Err(Error::WrongClass {
                expected: "optional or predictable dual-projection kind",
                t: 0,
                atom: 0,
            })
        }
    };
    let n = space.n_atoms();
    let mut values = vec![cond_exp(space, &a.values[0], 0, target, measure)?];
    for t in 1..a.values.len() {
        let delta: Vec<f64> = (0..n).map(|w| a.values[t][w] - a.values[t - 1][w]).collect();
        let proj = cond_exp(space, &delta, t - lag.min(t), target, measure)?;
        let prev = &values[t - 1];
        values.push((0..n).map(|w| prev[w] + proj[w]).collect());
    }
    Ok(AdaptedProcess {
        values,
        filtration: target,
        class: kind,
    })
}

/// Doob decomposition X = X₀ + M + A with M a martingale, A predictable,
/// M₀ = A₀ = 0. Unique in discrete time.
pub fn doob_decomposition(
    space: &FiniteFilteredSpace,
    x: &AdaptedProcess,
    measure: &[f64],
) -> Result<(AdaptedProcess, AdaptedProcess)> {
    let fil = x.filtration;
    let n = space.n_atoms();
    let mut a_vals = vec![vec![0.0; n]];
    let mut m_vals = vec![vec![0.0; n]];
    for t in 1..x.values.len() {
        let delta: Vec<f64> = (0..n).map(|w| x.values[t][w] - x.values[t - 1][w]).collect();
        let da = cond_exp(space, &delta, t - 1, fil, measure)?;
        let a_prev = a_vals[t - 1].clone();
        let m_prev = m_vals[t - 1].clone();
        a_vals.push((0..n).map(|w| a_prev[w] + da[w]).collect());
        m_vals.push((0..n).map(|w| m_prev[w] + delta[w] - da[w]).collect());
    }
    let m = AdaptedProcess {
        values: m_vals,
        filtration: fil,
        class: ProcessClass::Optional,
    };
    let a = AdaptedProcess {
        values: a_vals,
        filtration: fil,
        class: ProcessClass::Predictable,
    };
    Ok((m, a))
}

/// (H·X)_t = Σ_{s≤t} H_s ΔX_s for predictable H. Rejects non-predictable
/// integrands: silently accepting one would corrupt every downstream check.
pub fn stoch_integral(
    space: &FiniteFilteredSpace,
    h: &AdaptedProcess,
    x: &AdaptedProcess,
) -> Result<AdaptedProcess> {
    if h.filtration != x.filtration {
        return Err(Error::FiltrationMismatch {
            context: "stoch_integral",
        });
    }
    let mut probe = h.clone();
    probe.class = ProcessClass::Predictable;
    if probe.check_class(space).is_err() {
        return Err(Error::IntegrandNotPredictable);
    }
    Ok(pathwise_integral(h, x))
}

/// Raw pathwise Stieltjes sum Σ_{s≤t} H_s ΔX_s without the predictability
/// certificate; this is what optional-integrand expressions (density-weighted
/// brackets and the like) mean.
pub fn pathwise_integral(h: &AdaptedProcess, x: &AdaptedProcess) -> AdaptedProcess {
    let n = x.values[0].len();
    let mut values = vec![vec![0.0; n]];
    for t in 1..x.values.len() {
        let prev = values[t - 1].clone();
        values.push(
            (0..n)
                .map(|w| prev[w] + h.values[t][w] * (x.values[t][w] - x.values[t - 1][w]))
                .collect(),
        );
    }
    AdaptedProcess::raw(values, x.filtration)
}

/// Square bracket [X,Y]_t = Σ_{s≤t} ΔX_sΔY_s and its dual predictable
/// projection ⟨X,Y⟩ under the supplied measure.
pub fn brackets(
    space: &FiniteFilteredSpace,
    x: &AdaptedProcess,
    y: &AdaptedProcess,
    measure: &[f64],
) -> Result<(AdaptedProcess, AdaptedProcess)> {
    if x.filtration != y.filtration {
        return Err(Error::FiltrationMismatch { context: "brackets" });
    }
    let square = square_bracket(x, y);
    let angle = dual_projection(space, &square, ProcessClass::Predictable, x.filtration, measure)?;
    Ok((square, angle))
}

/// Square bracket alone (no measure needed).
pub fn square_bracket(x: &AdaptedProcess, y: &AdaptedProcess) -> AdaptedProcess {
    let n = x.values[0].len();
    let mut values = vec![vec![0.0; n]];
    for t in 1..x.values.len() {
        let prev = values[t - 1].clone();
        values.push(
            (0..n)
                .map(|w| {
                    prev[w]
                        + (x.values[t][w] - x.values[t - 1][w])
                            * (y.values[t][w] - y.values[t - 1][w])
                })
                .collect(),
        );
    }
    AdaptedProcess::raw(values, x.filtration)
}

/// Stochastic exponential 𝓔(X)_t = Π_{s≤t}(1+ΔX_s), 𝓔(X)₀ = 1. A factor
/// hitting 0 makes the path 0 from then on; that is legitimate output.
pub fn stoch_exp(x: &AdaptedProcess) -> AdaptedProcess {
    let n = x.values[0].len();
    let mut values = vec![vec![1.0; n]];
    for t in 1..x.values.len() {
        let prev = values[t - 1].clone();
        values.push(
            (0..n)
                .map(|w| prev[w] * (1.0 + x.values[t][w] - x.values[t - 1][w]))
                .collect(),
        );
    }
    AdaptedProcess::raw(values, x.filtration)
}

/// Stochastic logarithm X̄ = (1/X₋)·X of a positive process, so that
/// X = X₀𝓔(X̄). With a window, increments outside it are frozen at 0 and
/// positivity is only required inside.
pub fn stoch_log(
    x: &AdaptedProcess,
    window: Option<&PredictableWindow>,
) -> Result<AdaptedProcess> {
    let n = x.values[0].len();
    let mut values = vec![vec![0.0; n]];
    for t in 1..x.values.len() {
        let prev_row = values[t - 1].clone();
        let mut row = Vec::with_capacity(n);
        for w in 0..n {
            let inside = window.map_or(true, |win| win.contains(t, w));
            if !inside {
                row.push(prev_row[w]);
                continue;
            }
            if x.values[t][w] <= 0.0 || x.values[t - 1][w] <= 0.0 {
                return Err(Error::LogOutsideWindow { t, atom: w });
            }
            row.push(prev_row[w] + (x.values[t][w] - x.values[t - 1][w]) / x.values[t - 1][w]);
        }
        values.push(row);
    }
    Ok(AdaptedProcess::raw(values, x.filtration))
}

/// Stopping mode: at τ keeps the value at τ, before τ keeps the value at
/// τ-1 (at τ=0 the time-0 value, matching the time-0 convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopMode {
    At,
    Before,
}

pub fn stop(x: &AdaptedProcess, tau: &RandomTime, mode: StopMode) -> AdaptedProcess {
    let n = x.values[0].len();
    let horizon = x.values.len() - 1;
    let mut values = vec![vec![0.0; n]; horizon + 1];
    for w in 0..n {
        let cut = match (mode, tau.value[w]) {
            (_, None) => horizon,
            (StopMode::At, Some(s)) => s.min(horizon),
            (StopMode::Before, Some(s)) => s.saturating_sub(1).min(horizon),
        };
        for (t, row) in values.iter_mut().enumerate() {
            row[w] = x.values[t.min(cut)][w];
        }
    }
    AdaptedProcess::raw(values, x.filtration)
}

/// A predictable interval ∪ₙ[0,τₙ] given by its stopping-time sequence.
/// Time 0 always belongs to the interval.
#[derive(Debug, Clone)]
pub struct PredictableWindow {
    pub taus: Vec<RandomTime>,
}

impl PredictableWindow {
    pub fn new(taus: Vec<RandomTime>) -> Self {
        PredictableWindow { taus }
    }

    pub fn full(space: &FiniteFilteredSpace, fil: Fil) -> Self {
        PredictableWindow {
            taus: vec![RandomTime::constant(space, space.horizon, fil)],
        }
    }

    pub fn contains(&self, t: usize, atom: usize) -> bool {
        t == 0 || self.taus.iter().any(|tau| t <= tau.at(atom))
    }
}

/// Result of a martingale test: the max one-step drift over all cells, and
/// whether it stays within tolerance.
#[derive(Debug, Clone, Copy)]
pub struct MartingaleCheck {
    pub passes: bool,
    pub max_residual: f64,
}

/// Tests E[ΔX_t | t-1] = 0 on every cell. With a window, each process
/// stopped at a window time is tested (local martingale on ∪ₙ[0,τₙ]); on a
/// finite space local martingales are martingales, so this is the full story.
pub fn is_martingale(
    space: &FiniteFilteredSpace,
    x: &AdaptedProcess,
    measure: &[f64],
    window: Option<&PredictableWindow>,
    tol: f64,
) -> Result<MartingaleCheck> {
    let max_residual = match window {
        None => drift_residual(space, x, measure)?,
        Some(win) => {
            let mut worst: f64 = 0.0;
            for tau in &win.taus {
                let stopped = stop(x, tau, StopMode::At);
                worst = worst.max(drift_residual(space, &stopped, measure)?);
            }
            worst
        }
    };
    Ok(MartingaleCheck {
        passes: max_residual <= tol,
        max_residual,
    })
}

/// Max over t ≥ 1 and cells at t-1 of |E[ΔX_t | cell]|.
pub fn drift_residual(
    space: &FiniteFilteredSpace,
    x: &AdaptedProcess,
    measure: &[f64],
) -> Result<f64> {
    let fil = x.filtration;
    let mut worst: f64 = 0.0;
    for t in 1..x.values.len() {
        let part = space.partition(fil, t - 1);
        for (c, cell) in part.cells.iter().enumerate() {
            let mass: f64 = cell.iter().map(|&a| measure[a]).sum();
            if mass <= 0.0 {
                return Err(Error::ZeroMassCell { t: t - 1, cell: c });
            }
            let drift: f64 = cell
                .iter()
                .map(|&a| measure[a] * (x.values[t][a] - x.values[t - 1][a]))
                .sum::<f64>()
                / mass;
            worst = worst.max(drift.abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Partition;

    // Two-period binary tree: coin 1 at t=1, coin 2 at t=2. Four atoms
    // hh, ht, th, tt.
    fn tree() -> FiniteFilteredSpace {
        let p0 = Partition::trivial(4);
        let p1 = Partition::from_labels(&[0, 0, 1, 1]);
        let p2 = Partition::discrete(4);
        let parts = vec![p0, p1, p2];
        FiniteFilteredSpace::new(
            2,
            vec!["hh".into(), "ht".into(), "th".into(), "tt".into()],
            vec![0.25; 4],
            parts.clone(),
            parts,
        )
        .unwrap()
    }

    fn walk(space: &FiniteFilteredSpace) -> AdaptedProcess {
        // Symmetric walk: ±1 per coin.
        let values = vec![
            vec![0.0; 4],
            vec![1.0, 1.0, -1.0, -1.0],
            vec![2.0, 0.0, 0.0, -2.0],
        ];
        AdaptedProcess::optional(space, values, Fil::F).unwrap()
    }

    #[test]
    fn cond_exp_weighted_average() {
        // Hand sum: 0.25·4 + 0.75·0 = 1.
        let f = vec![Partition::trivial(2), Partition::trivial(2)];
        let space = FiniteFilteredSpace::new(
            1,
            vec!["a".into(), "b".into()],
            vec![0.25, 0.75],
            f.clone(),
            f,
        )
        .unwrap();
        let out = cond_exp(&space, &[4.0, 0.0], 0, Fil::F, &space.base_weights).unwrap();
        assert_eq!(out, vec![1.0, 1.0]);
    }

    #[test]
    fn cond_exp_measurable_unchanged() {
        let space = tree();
        let x = [3.0, 3.0, -1.0, -1.0];
        let out = cond_exp(&space, &x, 1, Fil::F, &space.base_weights).unwrap();
        assert_eq!(out.as_slice(), x.as_slice());
    }

    #[test]
    fn tower_property() {
        let space = tree();
        let x = [1.0, 2.0, 4.0, 8.0];
        let w = &space.base_weights;
        let inner = cond_exp(&space, &x, 1, Fil::F, w).unwrap();
        let two_step = cond_exp(&space, &inner, 0, Fil::F, w).unwrap();
        let direct = cond_exp(&space, &x, 0, Fil::F, w).unwrap();
        assert_eq!(two_step, direct);
    }

    #[test]
    fn doob_recovers_walk() {
        let space = tree();
        let x = walk(&space);
        let (m, a) = doob_decomposition(&space, &x, &space.base_weights).unwrap();
        assert_eq!(a.max_abs_diff(&AdaptedProcess::constant(&space, 0.0, Fil::F)), 0.0);
        let rebuilt = m.add(&a).add(&AdaptedProcess::constant(&space, 0.0, Fil::F));
        assert_eq!(rebuilt.max_abs_diff(&x), 0.0);
    }

    #[test]
    fn doob_predictable_part_of_drifting_process() {
        let space = tree();
        // X_t = t on every atom: purely predictable.
        let values = vec![vec![0.0; 4], vec![1.0; 4], vec![2.0; 4]];
        let x = AdaptedProcess::optional(&space, values, Fil::F).unwrap();
        let (m, a) = doob_decomposition(&space, &x, &space.base_weights).unwrap();
        assert_eq!(m.max_abs_diff(&AdaptedProcess::constant(&space, 0.0, Fil::F)), 0.0);
        assert_eq!(a.values[2], vec![2.0; 4]);
    }

    #[test]
    fn integral_of_unit_integrand() {
        let space = tree();
        let x = walk(&space);
        let one = AdaptedProcess::constant(&space, 1.0, Fil::F);
        let ix = stoch_integral(&space, &one, &x).unwrap();
        assert_eq!(ix.max_abs_diff(&x), 0.0); // X₀ = 0 here
    }

    #[test]
    fn integral_rejects_lookahead() {
        let space = tree();
        let x = walk(&space);
        // Integrand equal to the walk itself at t=1 is not predictable.
        let h = AdaptedProcess::raw(x.values.clone(), Fil::F);
        assert!(matches!(
            stoch_integral(&space, &h, &x),
            Err(Error::IntegrandNotPredictable)
        ));
    }

    #[test]
    fn stopped_integral_matches_stopped_process() {
        let space = tree();
        let x = walk(&space);
        // τ = 1 on first-coin heads, 2 otherwise; H = 1_{(0,τ]} predictable.
        let tau = RandomTime::new(&space, vec![Some(1), Some(1), Some(2), Some(2)], Fil::F).unwrap();
        let h_vals = vec![
            vec![1.0; 4],
            vec![1.0; 4],
            vec![0.0, 0.0, 1.0, 1.0],
        ];
        let h = AdaptedProcess::predictable(&space, h_vals, Fil::F).unwrap();
        let ix = stoch_integral(&space, &h, &x).unwrap();
        let stopped = stop(&x, &tau, StopMode::At);
        assert_eq!(ix.max_abs_diff(&stopped), 0.0); // X₀ = 0
    }

    #[test]
    fn square_bracket_compensates_square() {
        let space = tree();
        let x = walk(&space);
        let (sq, ang) = brackets(&space, &x, &x, &space.base_weights).unwrap();
        let x2 = x.zip_with(&x, |a, _| a * a);
        let comp = x2.sub(&sq);
        let check = is_martingale(&space, &comp, &space.base_weights, None, 1e-12).unwrap();
        assert!(check.passes, "X² − [X,X] must be a martingale");
        // ⟨X,X⟩ is the predictable quadratic variation: 1 per step here.
        assert_eq!(ang.values[2], vec![2.0; 4]);
    }

    #[test]
    fn exp_log_round_trip() {
        let space = tree();
        let y_vals = vec![
            vec![2.0; 4],
            vec![3.0, 3.0, 1.0, 1.0],
            vec![4.5, 1.5, 1.2, 0.4],
        ];
        let y = AdaptedProcess::optional(&space, y_vals, Fil::F).unwrap();
        let log = stoch_log(&y, None).unwrap();
        let exp = stoch_exp(&log);
        let y0_scaled = y.map(|v| v / 2.0);
        assert!(exp.max_abs_diff(&y0_scaled) < 1e-15);
    }

    #[test]
    fn exp_multiplicativity() {
        let space = tree();
        let x = walk(&space);
        let y = x.scale(-0.25);
        let lhs = stoch_exp(&x).zip_with(&stoch_exp(&y), |a, b| a * b);
        let sum = x.add(&y).add(&square_bracket(&x, &y));
        let rhs = stoch_exp(&sum);
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
    }

    #[test]
    fn vanishing_exponential_absorbs() {
        // ΔX₁ = −1 everywhere.
        let values = vec![vec![0.0; 4], vec![-1.0; 4], vec![5.0; 4]];
        let x = AdaptedProcess::raw(values, Fil::F);
        let e = stoch_exp(&x);
        assert_eq!(e.values[1], vec![0.0; 4]);
        assert_eq!(e.values[2], vec![0.0; 4]);
        assert!(stoch_log(&e, None).is_err());
    }

    #[test]
    fn stop_modes() {
        let space = tree();
        let x = walk(&space);
        let tau = RandomTime::new(&space, vec![Some(1), Some(1), None, None], Fil::F).unwrap();
        let at = stop(&x, &tau, StopMode::At);
        let before = stop(&x, &tau, StopMode::Before);
        assert_eq!(at.values[2], vec![1.0, 1.0, 0.0, -2.0]);
        assert_eq!(before.values[1], vec![0.0, 0.0, -1.0, -1.0]);
        let zero = RandomTime::constant(&space, 0, Fil::F);
        let frozen = stop(&x, &zero, StopMode::Before);
        assert_eq!(frozen.values[2], vec![0.0; 4]); // X_{0−} = X₀
    }

    #[test]
    fn martingale_test_flags_drift() {
        let space = tree();
        let x = walk(&space);
        let ok = is_martingale(&space, &x, &space.base_weights, None, 1e-12).unwrap();
        assert!(ok.passes && ok.max_residual == 0.0);
        let driftful = x.add(&AdaptedProcess::raw(
            vec![vec![0.0; 4], vec![0.1; 4], vec![0.2; 4]],
            Fil::F,
        ));
        let bad = is_martingale(&space, &driftful, &space.base_weights, None, 1e-12).unwrap();
        assert!(!bad.passes && (bad.max_residual - 0.1).abs() < 1e-15);
    }

    #[test]
    fn windowed_test_ignores_post_window_drift() {
        let space = tree();
        // Drift only at t=2; window [0,1] hides it.
        let x = AdaptedProcess::raw(vec![vec![0.0; 4], vec![0.0; 4], vec![1.0; 4]], Fil::F);
        let win = PredictableWindow::new(vec![RandomTime::constant(&space, 1, Fil::F)]);
        let check = is_martingale(&space, &x, &space.base_weights, Some(&win), 1e-12).unwrap();
        assert!(check.passes);
    }
}
