//! Invariance analysis: for which equivalent measures do F-martingales,
//! stopped before θ, remain G-martingales under the base measure, and how
//! that property reduces to a single density candidate and its positivity.

use crate::calculus::{
    brackets, cond_exp, drift_residual, is_martingale, pathwise_integral, stoch_exp, stop,
    PredictableWindow, StopMode,
};
use crate::enlargement::{azema_bundle, AzemaBundle};
use crate::error::{Error, Result};
use crate::measure::{girsanov_transform, DensityPair, GirsanovForm};
use crate::process::{AdaptedProcess, ProcessClass};
use crate::random_time::RandomTime;
use crate::space::{Fil, FiniteFilteredSpace};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The one candidate density the theory allows on [0,T]: the martingale
/// factor of S. It always integrates to 1 here; what can fail is strict
/// positivity, and the two defects are flagged separately.
#[derive(Debug, Clone)]
pub struct CandidateDensity {
    pub density: AdaptedProcess,
    pub positive: bool,
    pub normalized: bool,
    pub first_vanish: Option<(usize, usize)>,
}

pub fn candidate_density(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    t_max: usize,
    measure: &[f64],
) -> Result<CandidateDensity> {
    check_t_max(space, t_max)?;
    let bundle = azema_bundle(space, theta, measure)?;
    candidate_from_bundle(space, &bundle, t_max, measure)
}

fn candidate_from_bundle(
    space: &FiniteFilteredSpace,
    bundle: &AzemaBundle,
    t_max: usize,
    measure: &[f64],
) -> Result<CandidateDensity> {
    let density = bundle.mart_factor.freeze_after(t_max);
    let mut first_vanish = None;
    'scan: for t in 0..=t_max {
        for a in 0..space.n_atoms() {
            if density.values[t][a] <= 0.0 {
                first_vanish = Some((t, a));
                break 'scan;
            }
        }
    }
    let mean: f64 = density.values[t_max]
        .iter()
        .zip(measure)
        .map(|(v, w)| v * w)
        .sum();
    Ok(CandidateDensity {
        positive: first_vanish.is_none(),
        normalized: (mean - 1.0).abs() <= 1e-12,
        first_vanish,
        density,
    })
}

fn check_t_max(space: &FiniteFilteredSpace, t_max: usize) -> Result<()> {
    if t_max == 0 || t_max > space.horizon {
        return Err(Error::InvalidTime(format!(
            "t_max {} outside 1..={}",
            t_max, space.horizon
        )));
    }
    Ok(())
}

/// Three views of the same dichotomy: the candidate stays positive on [0,T]
/// iff every zero of S up to T is announced (ᵖS vanishes there too) iff the
/// first zero of S, restricted to [0,T], is a predictable time. The three
/// answers can only differ through a bug, so `consistent` is part of the
/// record.
#[derive(Debug, Clone, Copy)]
pub struct PositivityRecord {
    pub factor_positive: bool,
    pub zero_announced: bool,
    pub zero_time_predictable: bool,
    pub consistent: bool,
}

pub fn positivity_check(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    t_max: usize,
    measure: &[f64],
) -> Result<PositivityRecord> {
    check_t_max(space, t_max)?;
    let bundle = azema_bundle(space, theta, measure)?;
    let candidate = candidate_from_bundle(space, &bundle, t_max, measure)?;

    let mut zero_announced = true;
    let mut in_range = vec![false; space.n_atoms()];
    for a in 0..space.n_atoms() {
        if let Some(t) = bundle.varsigma.value[a] {
            if t <= t_max {
                in_range[a] = true;
                if bundle.s_pred.values[t][a] != 0.0 {
                    zero_announced = false;
                }
            }
        }
    }
    let restricted = bundle.varsigma.restrict(&in_range);
    let zero_time_predictable = restricted.is_predictable(space);

    let consistent = candidate.positive == zero_announced
        && zero_announced == zero_time_predictable;
    Ok(PositivityRecord {
        factor_positive: candidate.positive,
        zero_announced,
        zero_time_predictable,
        consistent,
    })
}

/// On a finite lattice the candidate is always a true martingale; this check
/// records the identities that express that fact: E[𝒬_T] = 1, the finiteness
/// bound E[𝓔((1/ᵖS)·D)_{θ∧T}], and the telescoping clauses
/// E[(D_T − D_{σₙ})𝓔_{σₙ}] along entry times σₙ of 𝓔((1/ᵖS)·D) into [n,∞),
/// which decrease to exactly zero.
#[derive(Debug, Clone)]
pub struct TrueMartingaleCheck {
    pub expectation_gap: f64,
    pub e_identity: bool,
    pub sfcnd_bound: f64,
    pub ncsfcnd_clauses: Vec<f64>,
    pub clauses_vanish: bool,
}

pub fn true_martingale_check(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    t_max: usize,
    measure: &[f64],
) -> Result<TrueMartingaleCheck> {
    check_t_max(space, t_max)?;
    let bundle = azema_bundle(space, theta, measure)?;
    let n = space.n_atoms();
    let exp_d = comp_exponential(space, &bundle);

    let mean: f64 = bundle.mart_factor.values[t_max]
        .iter()
        .zip(measure)
        .map(|(v, w)| v * w)
        .sum();
    let expectation_gap = (mean - 1.0).abs();

    let sfcnd_bound: f64 = (0..n)
        .map(|a| measure[a] * exp_d.values[theta.at(a).min(t_max)][a])
        .sum();

    let mut ncsfcnd_clauses = Vec::new();
    let mut level = 1.0;
    for _ in 0..60 {
        let mut clause = 0.0;
        let mut saturated = true;
        for a in 0..n {
            let sigma = (0..=t_max)
                .find(|&t| exp_d.values[t][a] >= level)
                .unwrap_or(t_max);
            if sigma < t_max {
                saturated = false;
            }
            clause += measure[a]
                * (bundle.comp.values[t_max][a] - bundle.comp.values[sigma][a])
                * exp_d.values[sigma][a];
        }
        ncsfcnd_clauses.push(clause);
        if saturated {
            break;
        }
        level *= 2.0;
    }
    let clauses_vanish = ncsfcnd_clauses.last().map_or(false, |c| c.abs() <= 1e-12);
    Ok(TrueMartingaleCheck {
        expectation_gap,
        e_identity: expectation_gap <= 1e-12,
        sfcnd_bound,
        ncsfcnd_clauses,
        clauses_vanish,
    })
}

/// 𝓔(1_{ᵖS>0}(1/ᵖS)·D): the reciprocal of the decreasing factor while ᵖS
/// stays positive.
fn comp_exponential(space: &FiniteFilteredSpace, bundle: &AzemaBundle) -> AdaptedProcess {
    let n = space.n_atoms();
    let integrand = AdaptedProcess {
        values: (0..=space.horizon)
            .map(|t| {
                (0..n)
                    .map(|a| {
                        let ps = bundle.s_pred.values[t][a];
                        if ps > 0.0 {
                            1.0 / ps
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect(),
        filtration: Fil::F,
        class: ProcessClass::Predictable,
    };
    stoch_exp(&pathwise_integral(&integrand, &bundle.comp))
}

/// Exhaustive one-pass test that every closed martingale under the weights
/// `p_weights`, stopped strictly before θ, has zero drift under `measure` on
/// every G-cell up to t_max. Linearity reduces the quantifier over
/// martingales to a kernel comparison per (G-cell, F-subcell) pair.
pub fn direct_invariance_residual(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    p_weights: &[f64],
    measure: &[f64],
    t_max: usize,
) -> f64 {
    let mut worst = 0.0f64;
    for t in 1..=t_max {
        let pf_prev = space.partition(Fil::F, t - 1);
        let pf = space.partition(Fil::F, t);
        let pg_prev = space.partition(Fil::G, t - 1);
        let p_prev_mass: Vec<f64> = pf_prev
            .cells
            .iter()
            .map(|c| c.iter().map(|&a| p_weights[a]).sum())
            .collect();
        let p_mass: Vec<f64> = pf
            .cells
            .iter()
            .map(|c| c.iter().map(|&a| p_weights[a]).sum())
            .collect();
        // F_t-cells grouped under their F_{t-1} parent.
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); pf_prev.cells.len()];
        for (c, cell) in pf.cells.iter().enumerate() {
            children[pf_prev.cell_of[cell[0]]].push(c);
        }
        let mut alive_in = vec![0.0f64; pf.cells.len()];
        for cg in &pg_prev.cells {
            let wg: f64 = cg.iter().map(|&a| measure[a]).sum();
            let mut touched = Vec::new();
            let mut alive_total = 0.0;
            for &a in cg {
                if theta.at(a) > t {
                    let c = pf.cell_of[a];
                    if alive_in[c] == 0.0 {
                        touched.push(c);
                    }
                    alive_in[c] += measure[a];
                    alive_total += measure[a];
                }
            }
            let parent = pf_prev.cell_of[cg[0]];
            let beta = alive_total / wg / p_prev_mass[parent];
            for &c in &children[parent] {
                let alpha = alive_in[c] / wg / p_mass[c];
                worst = worst.max((alpha - beta).abs());
            }
            for c in touched {
                alive_in[c] = 0.0;
            }
        }
    }
    worst
}

/// Same property probed by sampling: random F_{t_max}-measurable payoffs,
/// closed into martingales under `p_weights`, stopped before θ, drift-tested
/// under `measure`. Slower but goes through the same code paths a user would.
pub fn sampled_invariance_residual(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    p_weights: &[f64],
    measure: &[f64],
    t_max: usize,
    count: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let part = space.partition(Fil::F, t_max);
    let n = space.n_atoms();
    let theta_g = RandomTime {
        value: theta.value.clone(),
        filtration: Fil::G,
    };
    let mut worst = 0.0f64;
    for _ in 0..count {
        let mut payoff = vec![0.0; n];
        for cell in &part.cells {
            let v: f64 = rng.gen_range(0.0..1.0);
            for &a in cell {
                payoff[a] = v;
            }
        }
        let mut rows = Vec::with_capacity(space.horizon + 1);
        for t in 0..=space.horizon {
            rows.push(cond_exp(space, &payoff, t.min(t_max), Fil::F, p_weights)?);
        }
        let closed = AdaptedProcess::raw(rows, Fil::G);
        let stopped = stop(&closed, &theta_g, StopMode::Before);
        worst = worst.max(drift_residual(space, &stopped, measure)?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy)]
pub enum VerifyMode {
    SpanningOnly,
    WithRandomCombos { count: usize, seed: u64 },
}

/// Verdict of the existence question: is there an equivalent measure on
/// F_{t_max} whose martingales survive stopping-before-θ. A non-positive
/// candidate is a negative verdict, not an error.
#[derive(Debug, Clone)]
pub struct InvarianceVerdict {
    pub invariant: bool,
    pub positivity_failure: Option<(usize, usize)>,
    pub direct_residual: Option<f64>,
    pub sampled_residual: Option<f64>,
    pub tested: usize,
}

pub fn verify_condition_a(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    t_max: usize,
    measure: &[f64],
    mode: VerifyMode,
    tol: f64,
) -> Result<InvarianceVerdict> {
    let candidate = candidate_density(space, theta, t_max, measure)?;
    if !candidate.positive {
        return Ok(InvarianceVerdict {
            invariant: false,
            positivity_failure: candidate.first_vanish,
            direct_residual: None,
            sampled_residual: None,
            tested: 0,
        });
    }
    let mut p_weights: Vec<f64> = candidate.density.values[t_max]
        .iter()
        .zip(measure)
        .map(|(v, w)| v * w)
        .collect();
    let total: f64 = p_weights.iter().sum();
    for w in &mut p_weights {
        *w /= total;
    }
    let direct = direct_invariance_residual(space, theta, &p_weights, measure, t_max);
    let mut tested = space.partition(Fil::F, t_max).n_cells();
    let sampled = match mode {
        VerifyMode::SpanningOnly => None,
        VerifyMode::WithRandomCombos { count, seed } => {
            tested += count;
            Some(sampled_invariance_residual(
                space, theta, &p_weights, measure, t_max, count, seed,
            )?)
        }
    };
    let invariant = direct <= tol && sampled.map_or(true, |r| r <= tol);
    Ok(InvarianceVerdict {
        invariant,
        positivity_failure: None,
        direct_residual: Some(direct),
        sampled_residual: sampled,
        tested,
    })
}

/// For one given equivalent measure: the direct stopped-martingale test, the
/// density-matching identity on {ᵖS>0}∩[0,T], and the compensated form
/// ᵖS·q̄ = Q on [0,T], all of which must give one answer. The terminal
/// factorization residual (candidate times the off-support free factor) is
/// recorded alongside.
#[derive(Debug, Clone, Copy)]
pub struct EquivalenceRecord {
    pub direct_residual: f64,
    pub direct: bool,
    pub qf_residual: f64,
    pub qf: bool,
    pub cor_residual: f64,
    pub cor: bool,
    pub yf_residual: f64,
    pub agree: bool,
}

pub fn theorem_equivalence(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    pair: &DensityPair,
    t_max: usize,
    measure: &[f64],
    tol: f64,
) -> Result<EquivalenceRecord> {
    check_t_max(space, t_max)?;
    let bundle = azema_bundle(space, theta, measure)?;
    let n = space.n_atoms();
    let p_weights = pair.p_weights(space);
    let direct_residual = direct_invariance_residual(space, theta, &p_weights, measure, t_max);

    let mut qf_residual = 0.0f64;
    let mut cor_residual = 0.0f64;
    for t in 0..=t_max {
        for a in 0..n {
            if bundle.s_pred.values[t][a] > 0.0 {
                qf_residual = qf_residual
                    .max((pair.q.values[t][a] - bundle.mart_factor.values[t][a]).abs());
            }
            if t >= 1 {
                let lhs = bundle.s_pred.values[t][a] * pair.q_bar.delta(t, a);
                cor_residual = cor_residual.max((lhs - bundle.mart.delta(t, a)).abs());
            }
        }
    }

    // Free factor 𝓔(1_{ᵖS=0}·q̄) and the terminal factorization.
    let mut yf_residual = 0.0f64;
    for a in 0..n {
        let mut free = 1.0;
        for t in 1..=t_max {
            if bundle.s_pred.values[t][a] == 0.0 {
                free *= 1.0 + pair.q_bar.delta(t, a);
            }
        }
        let rhs = bundle.mart_factor.values[t_max][a] * free;
        yf_residual = yf_residual.max((pair.q.values[t_max][a] - rhs).abs());
    }

    let direct = direct_residual <= tol;
    let qf = qf_residual <= tol;
    let cor = cor_residual <= tol;
    Ok(EquivalenceRecord {
        direct_residual,
        direct,
        qf_residual,
        qf,
        cor_residual,
        cor,
        yf_residual,
        agree: direct == qf && qf == cor,
    })
}

/// Two-sided residuals of the martingale characterization on {ᵖS>0}∩[0,T]:
/// P is a martingale under the equivalent measure there iff the process with
/// increments ᵖS_tΔP_t + ΔQ_tΔP_t is one under the base measure.
#[derive(Debug, Clone, Copy)]
pub struct CharacterizationRecord {
    pub p_residual: f64,
    pub q_residual: f64,
    pub p_passes: bool,
    pub q_passes: bool,
    pub agree: bool,
}

pub fn p_martingale_characterization(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    pair: &DensityPair,
    p_process: &AdaptedProcess,
    t_max: usize,
    measure: &[f64],
    tol: f64,
) -> Result<CharacterizationRecord> {
    check_t_max(space, t_max)?;
    if p_process.filtration != Fil::F {
        return Err(Error::FiltrationMismatch {
            context: "p_martingale_characterization",
        });
    }
    let bundle = azema_bundle(space, theta, measure)?;
    let window = bundle.pred_support_window(space);
    characterization_on_window(
        space, &bundle, pair, p_process, t_max, measure, tol, &window,
        |bundle, t, a| bundle.s_pred.values[t][a],
    )
}

/// The variant whose window is {S₋>0}∩[0,T]; only meaningful when the
/// compensator D never moves, which is required up front.
pub fn p_martingale_characterization_zero_comp(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    pair: &DensityPair,
    p_process: &AdaptedProcess,
    t_max: usize,
    measure: &[f64],
    tol: f64,
) -> Result<CharacterizationRecord> {
    check_t_max(space, t_max)?;
    if p_process.filtration != Fil::F {
        return Err(Error::FiltrationMismatch {
            context: "p_martingale_characterization_zero_comp",
        });
    }
    let bundle = azema_bundle(space, theta, measure)?;
    let moved = (1..=t_max)
        .flat_map(|t| (0..space.n_atoms()).map(move |a| (t, a)))
        .any(|(t, a)| bundle.comp.delta(t, a).abs() > 1e-12);
    if moved {
        return Err(Error::InvalidParameter(
            "zero-compensator characterization needs D constant on (0,T]".into(),
        ));
    }
    let window = bundle.support_window(space);
    characterization_on_window(
        space, &bundle, pair, p_process, t_max, measure, tol, &window,
        |bundle, t, a| bundle.s.values[t - 1][a],
    )
}

#[allow(clippy::too_many_arguments)]
fn characterization_on_window(
    space: &FiniteFilteredSpace,
    bundle: &AzemaBundle,
    pair: &DensityPair,
    p_process: &AdaptedProcess,
    t_max: usize,
    measure: &[f64],
    tol: f64,
    window: &PredictableWindow,
    weight: impl Fn(&AzemaBundle, usize, usize) -> f64,
) -> Result<CharacterizationRecord> {
    let n = space.n_atoms();
    let frozen = p_process.freeze_after(t_max);
    let p_weights = pair.p_weights(space);
    let p_check = is_martingale(space, &frozen, &p_weights, Some(window), tol)?;

    let mut vals = vec![vec![0.0; n]];
    for t in 1..=space.horizon {
        let prev = vals[t - 1].clone();
        vals.push(
            (0..n)
                .map(|a| {
                    prev[a]
                        + (weight(bundle, t, a) + bundle.mart.delta(t, a)) * frozen.delta(t, a)
                })
                .collect(),
        );
    }
    let transferred = AdaptedProcess::raw(vals, Fil::F);
    let q_check = is_martingale(space, &transferred, measure, Some(window), tol)?;
    Ok(CharacterizationRecord {
        p_residual: p_check.max_residual,
        q_residual: q_check.max_residual,
        p_passes: p_check.passes,
        q_passes: q_check.passes,
        agree: p_check.passes == q_check.passes,
    })
}

/// Both properties a pseudo-stopping-style time may or may not have: the
/// dual optional projection ending at 1 on every path, and the martingale
/// part of S vanishing identically (which is what makes the base measure
/// itself invariant at every horizon). They are logged independently, with
/// the gap process 𝖠 − D that separates them.
#[derive(Debug, Clone)]
pub struct PseudoStoppingCheck {
    pub terminal_gap: f64,
    pub a_terminal_one: bool,
    pub mart_max: f64,
    pub mart_zero: bool,
    pub a_minus_d: AdaptedProcess,
}

pub fn pseudo_stopping_check(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    measure: &[f64],
    tol: f64,
) -> Result<PseudoStoppingCheck> {
    let bundle = azema_bundle(space, theta, measure)?;
    let end = space.horizon;
    let terminal_gap = bundle.hit_dual.values[end]
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max);
    let mart_max = bundle
        .mart
        .values
        .iter()
        .flatten()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    Ok(PseudoStoppingCheck {
        terminal_gap,
        a_terminal_one: terminal_gap <= tol,
        mart_max,
        mart_zero: mart_max <= tol,
        a_minus_d: bundle.hit_dual.sub(&bundle.comp).classify(space),
    })
}

/// Residuals of the drift cancellation that makes the Girsanov-corrected
/// process behave in G: with X = P − q·[p,P],
/// the G-side process Σ 1_{θ>t} q_tΔp_tΔP_t + 1_{θ≥t} Δ⟨Q,X⟩_t / S_{t−1}
/// and the F-side process Σ S_t q_tΔp_tΔP_t + ΔQ_tΔX_t (on {S₋>0}∩[0,T])
/// are martingales whenever the pair is an invariance measure.
#[derive(Debug, Clone, Copy)]
pub struct DriftCancellation {
    pub g_residual: f64,
    pub f_residual: f64,
    pub passes: bool,
}

pub fn drift_cancellation_check(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    pair: &DensityPair,
    p_process: &AdaptedProcess,
    t_max: usize,
    measure: &[f64],
    tol: f64,
) -> Result<DriftCancellation> {
    check_t_max(space, t_max)?;
    if p_process.filtration != Fil::F {
        return Err(Error::FiltrationMismatch {
            context: "drift_cancellation_check",
        });
    }
    let bundle = azema_bundle(space, theta, measure)?;
    let frozen = p_process.freeze_after(t_max);
    let x = girsanov_transform(space, &frozen, pair, GirsanovForm::Optional)?;
    let (_, angle_qx) = brackets(space, &bundle.mart, &x, measure)?;
    let n = space.n_atoms();

    let mut g_vals = vec![vec![0.0; n]];
    let mut f_vals = vec![vec![0.0; n]];
    for t in 1..=space.horizon {
        let g_prev = g_vals[t - 1].clone();
        let f_prev = f_vals[t - 1].clone();
        let mut g_row = Vec::with_capacity(n);
        let mut f_row = Vec::with_capacity(n);
        for a in 0..n {
            let core = pair.q.values[t][a] * pair.p.delta(t, a) * frozen.delta(t, a);
            let mut dg = 0.0;
            if theta.at(a) > t {
                dg += core;
            }
            if theta.at(a) >= t {
                dg += angle_qx.delta(t, a) / bundle.s.values[t - 1][a];
            }
            g_row.push(g_prev[a] + dg);
            let df = bundle.s.values[t][a] * core + bundle.mart.delta(t, a) * x.delta(t, a);
            f_row.push(f_prev[a] + df);
        }
        g_vals.push(g_row);
        f_vals.push(f_row);
    }
    let g_side = AdaptedProcess::raw(g_vals, Fil::G);
    let f_side = AdaptedProcess::raw(f_vals, Fil::F);
    let g_residual = drift_residual(space, &g_side, measure)?;
    let window = bundle.support_window(space);
    let f_check = is_martingale(space, &f_side, measure, Some(&window), tol)?;
    Ok(DriftCancellation {
        g_residual,
        f_residual: f_check.max_residual,
        passes: g_residual <= tol && f_check.max_residual <= tol,
    })
}

/// The survival reweighting 1_{θ>t}𝓔((1/ᵖS)·D)_t: a G-martingale whose
/// terminal value defines a measure carried by {θ > T}; it integrates to 1
/// when θ > 0, and restricted to F_T it matches the candidate-density
/// weights wherever S_T > 0.
#[derive(Debug, Clone, Copy)]
pub struct SurvivalBridge {
    pub mart_residual: f64,
    pub density_is_martingale: bool,
    pub normalization_gap: f64,
    pub normalized: bool,
    pub restriction_gap: f64,
    pub restriction_matches: bool,
    pub projection_gap: f64,
    pub projection_matches: bool,
}

pub fn survival_measure_bridge(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    t_max: usize,
    measure: &[f64],
    tol: f64,
) -> Result<SurvivalBridge> {
    check_t_max(space, t_max)?;
    let bundle = azema_bundle(space, theta, measure)?;
    let exp_d = comp_exponential(space, &bundle);
    let n = space.n_atoms();
    let zeta_vals: Vec<Vec<f64>> = (0..=space.horizon)
        .map(|t| {
            let s = t.min(t_max);
            (0..n)
                .map(|a| if theta.at(a) > s { exp_d.values[s][a] } else { 0.0 })
                .collect()
        })
        .collect();
    let zeta = AdaptedProcess::raw(zeta_vals, Fil::G);
    let mart_residual = drift_residual(space, &zeta, measure)?;

    let total: f64 = zeta.values[t_max]
        .iter()
        .zip(measure)
        .map(|(z, w)| z * w)
        .sum();
    let normalization_gap = (total - 1.0).abs();

    let mut restriction_gap = 0.0f64;
    for cell in &space.partition(Fil::F, t_max).cells {
        if bundle.s.values[t_max][cell[0]] == 0.0 {
            continue;
        }
        let mass: f64 = cell.iter().map(|&a| measure[a]).sum();
        let gap: f64 = cell
            .iter()
            .map(|&a| {
                measure[a]
                    * (zeta.values[t_max][a] - bundle.mart_factor.values[t_max][a])
            })
            .sum();
        restriction_gap = restriction_gap.max((gap / mass).abs());
    }

    // Optional projection of the reweighting: E[ζ_t | F_t] = S_t·𝓔_t, which
    // collapses to S₀𝒬_t while ᵖS has not vanished along the path.
    let mut projection_gap = 0.0f64;
    let s0 = bundle.s.values[0].clone();
    for t in 0..=t_max {
        let projected = cond_exp(space, &zeta.values[t], t, Fil::F, measure)?;
        for a in 0..n {
            if (1..=t).all(|s| bundle.s_pred.values[s][a] > 0.0) {
                let want = s0[a] * bundle.mart_factor.values[t][a];
                projection_gap = projection_gap.max((projected[a] - want).abs());
            }
        }
    }
    Ok(SurvivalBridge {
        mart_residual,
        density_is_martingale: mart_residual <= tol,
        normalization_gap,
        normalized: normalization_gap <= tol,
        restriction_gap,
        restriction_matches: restriction_gap <= tol,
        projection_gap,
        projection_matches: projection_gap <= tol,
    })
}
