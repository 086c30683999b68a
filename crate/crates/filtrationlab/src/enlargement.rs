//! Progressive-enlargement machinery: how a random time θ living in a larger
//! filtration G interacts with the smaller filtration F it sits over.

use crate::calculus::{
    brackets, cond_exp, doob_decomposition, drift_residual, pathwise_integral, project, stop,
    PredictableWindow, StopMode,
};
use crate::error::{Error, Result};
use crate::process::{AdaptedProcess, ProcessClass};
use crate::random_time::RandomTime;
use crate::space::{Fil, FiniteFilteredSpace, Partition};

/// J_t = 1 while θ has not occurred (θ > t).
pub fn alive_indicator(space: &FiniteFilteredSpace, theta: &RandomTime) -> AdaptedProcess {
    let n = space.n_atoms();
    let values = (0..=space.horizon)
        .map(|t| (0..n).map(|a| if theta.at(a) > t { 1.0 } else { 0.0 }).collect())
        .collect();
    AdaptedProcess::raw(values, Fil::G).classify(space)
}

/// H_t = 1 once θ has occurred (θ ≤ t).
pub fn hit_indicator(space: &FiniteFilteredSpace, theta: &RandomTime) -> AdaptedProcess {
    let n = space.n_atoms();
    let values = (0..=space.horizon)
        .map(|t| (0..n).map(|a| if theta.at(a) <= t { 1.0 } else { 0.0 }).collect())
        .collect();
    AdaptedProcess::raw(values, Fil::G).classify(space)
}

/// Outcome of the trace test: G-cells must cut the not-yet-occurred region
/// {θ > t} exactly as F-cells do, at every t. On failure `witness` names the
/// first (t, F-cell index) where two still-alive atoms sit in different
/// G-cells.
#[derive(Debug, Clone, Copy)]
pub struct ConditionB {
    pub holds: bool,
    pub witness: Option<(usize, usize)>,
}

pub fn check_condition_b(space: &FiniteFilteredSpace, theta: &RandomTime) -> ConditionB {
    for t in 0..=space.horizon {
        let pf = space.partition(Fil::F, t);
        let pg = space.partition(Fil::G, t);
        for (c, cell) in pf.cells.iter().enumerate() {
            let mut g_cell: Option<usize> = None;
            for &a in cell {
                if theta.at(a) <= t {
                    continue;
                }
                match g_cell {
                    None => g_cell = Some(pg.cell_of[a]),
                    Some(g) if g != pg.cell_of[a] => {
                        return ConditionB {
                            holds: false,
                            witness: Some((t, c)),
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    ConditionB {
        holds: true,
        witness: None,
    }
}

/// G-partitions of the smallest enlargement of F that makes θ a stopping
/// time: at each t an atom is labeled by its F-cell plus the value of θ if
/// already observed.
pub fn progressive_partitions(
    f_parts: &[Partition],
    theta: &[Option<usize>],
) -> Vec<Partition> {
    f_parts
        .iter()
        .enumerate()
        .map(|(t, pf)| {
            let labels: Vec<(usize, usize)> = theta
                .iter()
                .enumerate()
                .map(|(a, th)| {
                    let seen = match th {
                        Some(v) if *v <= t => v + 1,
                        _ => 0,
                    };
                    (pf.cell_of[a], seen)
                })
                .collect();
            Partition::from_labels(&labels)
        })
        .collect()
}

/// Everything the survival process of θ determines: additive and
/// multiplicative decompositions, projections, compensators and the zero
/// times of S. All fields are exact cell arithmetic under the given measure.
#[derive(Debug, Clone)]
pub struct AzemaBundle {
    /// S_t = probability of {θ > t} given F_t.
    pub s: AdaptedProcess,
    /// Predictable projection ᵖS_t = E[S_t | F_{t-1}].
    pub s_pred: AdaptedProcess,
    /// Martingale part Q of S = S₀ + Q − D.
    pub mart: AdaptedProcess,
    /// Predictable nondecreasing compensator D.
    pub comp: AdaptedProcess,
    /// Dual optional projection of the hit indicator: Δ𝖠_t = E[1_{θ=t} | F_t].
    pub hit_dual: AdaptedProcess,
    /// G-compensator of the hit indicator: Δv_t = 1_{t≤θ} ΔD_t / S_{t-1}.
    pub intensity: AdaptedProcess,
    /// Martingale factor of S = S₀ · 𝒬 · 𝒟: 𝒬 = 𝓔(1_{ᵖS>0}(1/ᵖS)·Q).
    pub mart_factor: AdaptedProcess,
    /// Predictable decreasing factor 𝒟 = 𝓔(−1_{S₋>0}(1/S₋)·D).
    pub drift_factor: AdaptedProcess,
    /// First zero of S (absorbing), ∞ if S stays positive.
    pub varsigma: RandomTime,
    /// First t with S_{t-1} > 0 but ᵖS_t = 0: the announced zero, which is
    /// also the first zero of 𝒟.
    pub announced_zero: RandomTime,
}

pub fn azema_bundle(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    measure: &[f64],
) -> Result<AzemaBundle> {
    let n = space.n_atoms();
    let horizon = space.horizon;
    let alive = alive_indicator(space, theta);
    let s_vals: Result<Vec<Vec<f64>>> = (0..=horizon)
        .map(|t| cond_exp(space, &alive.values[t], t, Fil::F, measure))
        .collect();
    let s = AdaptedProcess {
        values: s_vals?,
        filtration: Fil::F,
        class: ProcessClass::Optional,
    };
    let s_pred = project(space, &s, ProcessClass::Predictable, Fil::F, measure)?;
    let (mart, neg_comp) = doob_decomposition(space, &s, measure)?;
    let comp = neg_comp.scale(-1.0);

    let hit = hit_indicator(space, theta);
    let hit_dual = dual_projection(space, &hit, measure)?;

    let mut v_vals = vec![vec![0.0; n]];
    for t in 1..=horizon {
        let prev = v_vals[t - 1].clone();
        let row = (0..n)
            .map(|a| {
                if theta.at(a) >= t {
                    prev[a] + comp.delta(t, a) / s.values[t - 1][a]
                } else {
                    prev[a]
                }
            })
            .collect();
        v_vals.push(row);
    }
    let intensity = AdaptedProcess {
        values: v_vals,
        filtration: Fil::G,
        class: ProcessClass::Predictable,
    };

    let mut qf_vals = vec![vec![1.0; n]];
    let mut df_vals = vec![vec![1.0; n]];
    for t in 1..=horizon {
        let qf_prev = qf_vals[t - 1].clone();
        let df_prev = df_vals[t - 1].clone();
        let mut qf_row = Vec::with_capacity(n);
        let mut df_row = Vec::with_capacity(n);
        for a in 0..n {
            let ps = s_pred.values[t][a];
            let s_prev = s.values[t - 1][a];
            // Ratio forms of 1 + ΔQ/ᵖS and 1 − ΔD/S₋: equal exactly, and a
            // vanishing numerator makes the factor hit 0.0 instead of ±1ulp.
            let qf_step = if ps > 0.0 { s.values[t][a] / ps } else { 1.0 };
            let df_step = if s_prev > 0.0 { ps / s_prev } else { 1.0 };
            qf_row.push(qf_prev[a] * qf_step);
            df_row.push(df_prev[a] * df_step);
        }
        qf_vals.push(qf_row);
        df_vals.push(df_row);
    }
    let mart_factor = AdaptedProcess::raw(qf_vals, Fil::F).classify(space);
    let drift_factor = AdaptedProcess::raw(df_vals, Fil::F).classify(space);

    let mut vs_vals = vec![None; n];
    let mut az_vals = vec![None; n];
    for a in 0..n {
        vs_vals[a] = (0..=horizon).find(|&t| s.values[t][a] == 0.0);
        az_vals[a] = (1..=horizon)
            .find(|&t| s.values[t - 1][a] > 0.0 && s_pred.values[t][a] == 0.0);
    }
    let varsigma = RandomTime::new(space, vs_vals, Fil::F)?;
    let announced_zero = RandomTime::new(space, az_vals, Fil::F)?;

    Ok(AzemaBundle {
        s,
        s_pred,
        mart,
        comp,
        hit_dual,
        intensity,
        mart_factor,
        drift_factor,
        varsigma,
        announced_zero,
    })
}

/// Dual optional projection onto F of a G finite-variation process.
fn dual_projection(
    space: &FiniteFilteredSpace,
    a: &AdaptedProcess,
    measure: &[f64],
) -> Result<AdaptedProcess> {
    let n = space.n_atoms();
    let mut values = vec![cond_exp(space, &a.values[0], 0, Fil::F, measure)?];
    for t in 1..a.values.len() {
        let delta: Vec<f64> = (0..n).map(|w| a.values[t][w] - a.values[t - 1][w]).collect();
        let proj = cond_exp(space, &delta, t, Fil::F, measure)?;
        let prev = values[t - 1].clone();
        values.push((0..n).map(|w| prev[w] + proj[w]).collect());
    }
    Ok(AdaptedProcess {
        values,
        filtration: Fil::F,
        class: ProcessClass::Optional,
    })
}

impl AzemaBundle {
    /// ςₙ = first time S drops to 1/n or below. The intervals [0,ςₙ] grow to
    /// the support region {S₋ > 0} ∪ [0].
    pub fn varsigma_n(&self, space: &FiniteFilteredSpace, n: f64) -> RandomTime {
        let atoms = space.n_atoms();
        let vals = (0..atoms)
            .map(|a| (1..=space.horizon).find(|&t| self.s.values[t][a] <= 1.0 / n))
            .collect();
        RandomTime::new(space, vals, Fil::F).expect("level sets of S are F-stopping times")
    }

    /// ζₙ = (first time ᵖS enters [0,1/n]) − 1; the intervals [0,ζₙ] grow to
    /// {ᵖS > 0} ∪ [0].
    pub fn zeta_n(&self, space: &FiniteFilteredSpace, n: f64) -> RandomTime {
        let atoms = space.n_atoms();
        let vals = (0..atoms)
            .map(|a| {
                (1..=space.horizon)
                    .find(|&t| self.s_pred.values[t][a] <= 1.0 / n)
                    .map(|t| t - 1)
            })
            .collect();
        RandomTime::new(space, vals, Fil::F).expect("level sets of ᵖS are announced")
    }

    /// The predictable region {S₋ > 0} ∪ [0] as a window [0,τ]: S_{t-1} > 0
    /// exactly when t ≤ ς, so the cap is ς itself (horizon when S never dies).
    pub fn support_window(&self, space: &FiniteFilteredSpace) -> PredictableWindow {
        PredictableWindow::new(vec![self.varsigma.min_const(space.horizon)])
    }

    /// The region {ᵖS > 0} ∪ [0] as a window [0,τ].
    pub fn pred_support_window(&self, space: &FiniteFilteredSpace) -> PredictableWindow {
        let atoms = space.n_atoms();
        let vals: Vec<Option<usize>> = (0..atoms)
            .map(|a| {
                (1..=space.horizon)
                    .find(|&t| self.s_pred.values[t][a] == 0.0)
                    .map(|t| t - 1)
            })
            .collect();
        let tau = RandomTime::new(space, vals, Fil::F).expect("zeros of ᵖS are announced");
        PredictableWindow::new(vec![tau.min_const(space.horizon)])
    }
}

/// F-reduction of a G-process: the unique F-process agreeing with it on the
/// not-yet-occurred region (strictly before θ for predictable kind), zero
/// where uniqueness is lost. Two constructions are compared: the projection
/// formula and direct value-picking on traced cells; disagreement means the
/// inputs violate the preconditions.
pub fn reduce(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    x: &AdaptedProcess,
    kind: ProcessClass,
    measure: &[f64],
) -> Result<AdaptedProcess> {
    if x.filtration != Fil::G {
        return Err(Error::FiltrationMismatch { context: "reduce" });
    }
    let mut probe = x.clone();
    probe.class = kind;
    probe.check_class(space)?;
    let lag = match kind {
        ProcessClass::Optional => 0,
        ProcessClass::Predictable => 1,
        ProcessClass::Raw => {
            return Err(Error::WrongClass {
                expected: "optional or predictable reduction kind",
                t: 0,
                atom: 0,
            })
        }
    };
    let n = space.n_atoms();
    let horizon = space.horizon;
    let mut values = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        let base = t.saturating_sub(lag);
        // Projection construction: E[1_{θ>base} X_t | F_base] / S_base.
        let masked: Vec<f64> = (0..n)
            .map(|a| if theta.at(a) > base { x.values[t][a] } else { 0.0 })
            .collect();
        let num = cond_exp(space, &masked, base, Fil::F, measure)?;
        let alive_ind: Vec<f64> = (0..n)
            .map(|a| if theta.at(a) > base { 1.0 } else { 0.0 })
            .collect();
        let s_base = cond_exp(space, &alive_ind, base, Fil::F, measure)?;
        let mut row = vec![0.0; n];
        let part = space.partition(Fil::F, base);
        for cell in &part.cells {
            let rep = cell.iter().find(|&&a| theta.at(a) > base);
            let (formula, direct) = match rep {
                Some(&a) => (num[a] / s_base[a], x.values[t][a]),
                None => (0.0, 0.0),
            };
            if (formula - direct).abs() > 1e-9 * (1.0 + direct.abs()) {
                return Err(Error::ConditionBFailed {
                    t: base,
                    cell: part.cell_of[cell[0]],
                });
            }
            for &a in cell {
                row[a] = direct;
            }
        }
        values.push(row);
    }
    Ok(AdaptedProcess {
        values,
        filtration: Fil::F,
        class: kind,
    })
}

/// F-stopping time ρ with {τ < θ} = {ρ < θ} ⊆ {τ = ρ}: the earliest time an
/// F-cell can certify that τ has already happened on its whole still-alive
/// part.
pub fn reduce_time(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    tau: &RandomTime,
) -> Result<RandomTime> {
    let n = space.n_atoms();
    let mut rho = vec![None; n];
    for t in 0..=space.horizon {
        let part = space.partition(Fil::F, t);
        for cell in &part.cells {
            let alive: Vec<usize> = cell.iter().copied().filter(|&a| theta.at(a) > t).collect();
            if alive.is_empty() || !alive.iter().all(|&a| tau.at(a) <= t) {
                continue;
            }
            for &a in cell {
                if rho[a].is_none() {
                    rho[a] = Some(t);
                }
            }
        }
    }
    RandomTime::new(space, rho, Fil::F)
}

/// The drift correction that turns an F-martingale stopped at (or before) θ
/// into a G-martingale, and the resulting G-martingale.
#[derive(Debug, Clone)]
pub struct JeulinYor {
    pub martingale: AdaptedProcess,
    pub drift: AdaptedProcess,
}

/// Before mode: M^{θ−} gains drift Δ⟨S,M⟩_t / S_{t−1} on {t ≤ θ}. At mode:
/// M^θ gains additionally Δ⟨𝖠,M⟩_t / S_{t−1}, the contribution of the jump
/// of M at θ itself.
pub fn jeulin_yor(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    m: &AdaptedProcess,
    mode: StopMode,
    measure: &[f64],
) -> Result<JeulinYor> {
    if m.filtration != Fil::F {
        return Err(Error::FiltrationMismatch { context: "jeulin_yor" });
    }
    let bundle = azema_bundle(space, theta, measure)?;
    let (_, angle_s) = brackets(space, &bundle.s, m, measure)?;
    let angle_hit = match mode {
        StopMode::At => Some(brackets(space, &bundle.hit_dual, m, measure)?.1),
        StopMode::Before => None,
    };
    let n = space.n_atoms();
    let mut drift_vals = vec![vec![0.0; n]];
    for t in 1..=space.horizon {
        let prev = drift_vals[t - 1].clone();
        let row = (0..n)
            .map(|a| {
                if theta.at(a) >= t {
                    let mut d = angle_s.delta(t, a);
                    if let Some(ah) = &angle_hit {
                        d += ah.delta(t, a);
                    }
                    prev[a] + d / bundle.s.values[t - 1][a]
                } else {
                    prev[a]
                }
            })
            .collect();
        drift_vals.push(row);
    }
    let drift = AdaptedProcess {
        values: drift_vals,
        filtration: Fil::G,
        class: ProcessClass::Predictable,
    };
    let mg = AdaptedProcess::raw(m.values.clone(), Fil::G);
    let theta_g = RandomTime {
        value: theta.value.clone(),
        filtration: Fil::G,
    };
    let stopped = stop(&mg, &theta_g, mode);
    Ok(JeulinYor {
        martingale: stopped.sub(&drift),
        drift,
    })
}

/// Verdicts of the two-sided transfer test for an F-process K: the F-side
/// process Σ S_s ΔK_s is a martingale on {S₋ > 0} exactly when K stopped
/// before θ is a G-martingale.
#[derive(Debug, Clone, Copy)]
pub struct TransferCheck {
    pub f_residual: f64,
    pub g_residual: f64,
    pub f_passes: bool,
    pub g_passes: bool,
    pub agree: bool,
}

pub fn before_theta_transfer(
    space: &FiniteFilteredSpace,
    theta: &RandomTime,
    k: &AdaptedProcess,
    measure: &[f64],
    tol: f64,
) -> Result<TransferCheck> {
    if k.filtration != Fil::F {
        return Err(Error::FiltrationMismatch {
            context: "before_theta_transfer",
        });
    }
    let bundle = azema_bundle(space, theta, measure)?;
    // Σ_{s≤t} S_s ΔK_s = (S₋·K + [S,K])_t: drift S_t ΔK_t per step.
    let f_side = pathwise_integral(&bundle.s, k);
    let window = bundle.support_window(space);
    let f_check =
        crate::calculus::is_martingale(space, &f_side, measure, Some(&window), tol)?;

    let kg = AdaptedProcess::raw(k.values.clone(), Fil::G);
    let theta_g = RandomTime {
        value: theta.value.clone(),
        filtration: Fil::G,
    };
    let g_side = stop(&kg, &theta_g, StopMode::Before);
    let g_res = drift_residual(space, &g_side, measure)?;
    Ok(TransferCheck {
        f_residual: f_check.max_residual,
        g_residual: g_res,
        f_passes: f_check.passes,
        g_passes: g_res <= tol,
        agree: f_check.passes == (g_res <= tol),
    })
}
