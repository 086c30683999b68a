//! Seeded generators of enlargement test cases: worked examples with known
//! verdicts plus randomized stress spaces, all reproducible bit-for-bit
//! from their descriptor.

use crate::bsde::DriverSpec;
use crate::enlargement::{check_condition_b, progressive_partitions};
use crate::error::{Error, Result};
use crate::invariance::positivity_check;
use crate::process::AdaptedProcess;
use crate::random_time::RandomTime;
use crate::space::{Fil, FiniteFilteredSpace, Partition};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MAX_ATOMS: usize = 4096;
pub const MAX_DEPTH: usize = 12;
/// The hazard-refinement study halves step sizes, so this kind alone may
/// run deeper lattices.
pub const MAX_DEPTH_COX: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDescriptor {
    pub id: String,
    #[serde(flatten)]
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub driver: Option<DriverSpec>,
    /// Overrides the built-in prediction field by field; a wrong override
    /// makes the batch runner flag the scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<ExpectedVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Default intensity predictable in F: a per-cell hazard drawn on a
    /// binary market tree, death clock independent given the path.
    Cox {
        t: usize,
        #[serde(default)]
        branch_depth: usize,
        hazard: f64,
        #[serde(default)]
        hazard_jitter: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Death at the first coin head (capped at t) with weight alpha, at the
    /// deterministic date t+1 otherwise.
    MixtureEx41 { t: usize, alpha: f64 },
    /// Death at the first coin head (capped at t) with weight alpha, never
    /// otherwise; the never branch is revealed only through survival.
    MixtureEx42 { t: usize, alpha: f64 },
    /// Geometric death clock with odds `hazard`. With `observed` the clock
    /// filters itself (F = G); otherwise F is trivial.
    OwnFiltrationExponential { t: usize, hazard: f64, observed: bool },
    /// F = G on a market tree carrying an independent per-step death coin:
    /// every zero of S is a surprise.
    FgEqualInaccessible { t: usize, death_prob: f64 },
    /// Two independent shock clocks; G reveals which clock fired (or both),
    /// strictly more than the progressive enlargement.
    CommonShock {
        t: usize,
        idio_hazard: f64,
        common_hazard: f64,
    },
    /// Random refining tree, random death map, and randomly revealed extra
    /// information; resampled until the trace condition holds.
    Random {
        t: usize,
        seed: u64,
        #[serde(default)]
        max_atoms: usize,
    },
}

/// What the construction itself predicts, to be confronted with the
/// computed verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedVerdict {
    pub invariant: Option<bool>,
    pub pseudo_stopping: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub space: FiniteFilteredSpace,
    pub theta: RandomTime,
    pub t_max: usize,
    pub expected: ExpectedVerdict,
    pub driver: DriverSpec,
    pub recovery: AdaptedProcess,
    /// Attempts the rejection sampler needed (1 for deterministic kinds).
    pub tries: usize,
}

pub fn load_descriptors(path: &Path) -> Result<Vec<ScenarioDescriptor>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn generate(descriptor: &ScenarioDescriptor) -> Result<Scenario> {
    generate_with_seed(descriptor, 0)
}

/// `seed_offset` is XORed into the per-descriptor seeds so one corpus file
/// can be re-rolled from the command line.
pub fn generate_with_seed(descriptor: &ScenarioDescriptor, seed_offset: u64) -> Result<Scenario> {
    let id = descriptor.id.clone();
    let (space, theta, t_max, mut expected, tries, seed) = match descriptor.kind {
        ScenarioKind::Cox { t, branch_depth, hazard, hazard_jitter, seed } => {
            let (sp, th) = build_cox(t, branch_depth, hazard, hazard_jitter, seed ^ seed_offset)?;
            let exp = ExpectedVerdict {
                invariant: Some(true),
                pseudo_stopping: Some(false),
                clause: None,
            };
            (sp, th, t, exp, 1, seed ^ seed_offset)
        }
        ScenarioKind::MixtureEx41 { t, alpha } => {
            let (sp, th) = build_mixture(t, alpha, MixtureTail::Deterministic)?;
            let exp = ExpectedVerdict {
                invariant: Some(true),
                pseudo_stopping: Some(true),
                clause: None,
            };
            (sp, th, t + 1, exp, 1, 41)
        }
        ScenarioKind::MixtureEx42 { t, alpha } => {
            if t < 2 {
                return Err(Error::InvalidParameter("mixture_ex42 needs t >= 2".into()));
            }
            let (sp, th) = build_mixture(t, alpha, MixtureTail::Never)?;
            let exp = ExpectedVerdict {
                invariant: Some(true),
                pseudo_stopping: Some(false),
                clause: None,
            };
            (sp, th, t + 1, exp, 1, 42)
        }
        ScenarioKind::OwnFiltrationExponential { t, hazard, observed } => {
            let (sp, th) = build_own_filtration(t, hazard, observed)?;
            let exp = ExpectedVerdict {
                invariant: Some(!observed),
                pseudo_stopping: Some(false),
                clause: observed.then(|| "positivity".into()),
            };
            (sp, th, t, exp, 1, 36)
        }
        ScenarioKind::FgEqualInaccessible { t, death_prob } => {
            let (sp, th) = build_fg_equal(t, death_prob)?;
            let exp = ExpectedVerdict {
                invariant: Some(false),
                pseudo_stopping: Some(false),
                clause: Some("positivity".into()),
            };
            (sp, th, t, exp, 1, 35)
        }
        ScenarioKind::CommonShock { t, idio_hazard, common_hazard } => {
            let (sp, th) = build_common_shock(t, idio_hazard, common_hazard)?;
            let exp = ExpectedVerdict {
                invariant: Some(true),
                pseudo_stopping: Some(false),
                clause: None,
            };
            (sp, th, t, exp, 1, 44)
        }
        ScenarioKind::Random { t, seed, max_atoms } => {
            let (sp, th, tries) = build_random(t, seed ^ seed_offset, max_atoms)?;
            let exp = ExpectedVerdict {
                invariant: None,
                pseudo_stopping: None,
                clause: None,
            };
            (sp, th, t, exp, tries, seed ^ seed_offset)
        }
    };
    if expected.invariant.is_none() {
        // Randomized kinds take their prediction from the positivity side;
        // the direct verdict must then reproduce it independently.
        let rec = positivity_check(&space, &theta, t_max, &space.base_weights)?;
        expected.invariant = Some(rec.factor_positive);
        if !rec.factor_positive {
            expected.clause = Some("positivity".into());
        }
    }
    if let Some(over) = &descriptor.expected {
        if over.invariant.is_some() {
            expected.invariant = over.invariant;
        }
        if over.pseudo_stopping.is_some() {
            expected.pseudo_stopping = over.pseudo_stopping;
        }
        if over.clause.is_some() {
            expected.clause = over.clause.clone();
        }
    }
    let recovery = build_recovery(&space, seed);
    Ok(Scenario {
        id,
        space,
        theta,
        t_max,
        expected,
        driver: descriptor
            .driver
            .unwrap_or(DriverSpec::Saturating { gain: 0.4, cap: 0.5 }),
        recovery,
        tries,
    })
}

fn odds_to_prob(h: f64) -> f64 {
    h / (1.0 + h)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn check_unit_open(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidParameter(format!("{name} must lie in (0,1), got {v}")));
    }
    Ok(())
}

fn check_size(t: usize, max_t: usize, atoms: usize) -> Result<()> {
    if t == 0 || t > max_t {
        return Err(Error::InvalidParameter(format!("depth {t} outside 1..={max_t}")));
    }
    if atoms > MAX_ATOMS {
        return Err(Error::InvalidParameter(format!(
            "{atoms} atoms exceeds the {MAX_ATOMS} guard"
        )));
    }
    Ok(())
}

/// Market tree with binary splits on the first `branch_depth` steps; each
/// (step, cell) draws a hazard known one step ahead, the death clock is
/// then conditionally geometric. S is predictable, so its martingale part
/// vanishes identically.
fn build_cox(
    t: usize,
    branch_depth: usize,
    hazard: f64,
    hazard_jitter: f64,
    seed: u64,
) -> Result<(FiniteFilteredSpace, RandomTime)> {
    check_positive("hazard", hazard)?;
    if branch_depth > t.min(6) {
        return Err(Error::InvalidParameter(format!(
            "branch_depth {branch_depth} exceeds min(t, 6)"
        )));
    }
    if !(0.0..1.0).contains(&hazard_jitter) {
        return Err(Error::InvalidParameter("hazard_jitter must lie in [0,1)".into()));
    }
    let leaves = 1usize << branch_depth;
    let n = leaves * (t + 1);
    check_size(t, MAX_DEPTH_COX, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Market cell of leaf l at time s: its top branch_depth∧s bits.
    let leaf_cell = |l: usize, s: usize| l >> (branch_depth - s.min(branch_depth));
    // gamma[s-1][cell] = per-step death probability over (s-1, s].
    let mut gamma = Vec::with_capacity(t);
    for s in 1..=t {
        let cells = 1usize << (s - 1).min(branch_depth);
        gamma.push(
            (0..cells)
                .map(|_| {
                    let u: f64 = rng.gen_range(-1.0..1.0);
                    odds_to_prob(hazard * (1.0 + hazard_jitter * u))
                })
                .collect::<Vec<f64>>(),
        );
    }

    // Atom (leaf, k): death at k = 1..=t, or k = t+1 meaning never.
    let atom = |l: usize, k: usize| l * (t + 1) + (k - 1);
    let mut weights = vec![0.0; n];
    let mut theta_vals = vec![None; n];
    let mut names = vec![String::new(); n];
    let leaf_weight = 1.0 / leaves as f64;
    for l in 0..leaves {
        let mut alive = leaf_weight;
        for k in 1..=t {
            let g = gamma[k - 1][leaf_cell(l, k - 1)];
            weights[atom(l, k)] = alive * g;
            theta_vals[atom(l, k)] = Some(k);
            names[atom(l, k)] = format!("m{l}d{k}");
            alive *= 1.0 - g;
        }
        weights[atom(l, t + 1)] = alive;
        names[atom(l, t + 1)] = format!("m{l}sv");
    }
    let f_parts: Vec<Partition> = (0..=t)
        .map(|s| {
            Partition::from_labels(
                &(0..n).map(|a| leaf_cell(a / (t + 1), s)).collect::<Vec<usize>>(),
            )
        })
        .collect();
    let g_parts = progressive_partitions(&f_parts, &theta_vals);
    let space = FiniteFilteredSpace::new(t, names, weights, f_parts, g_parts)?;
    let theta = RandomTime::new(&space, theta_vals, Fil::G)?;
    Ok((space, theta))
}

enum MixtureTail {
    Deterministic,
    Never,
}

/// Coin lattice recording the first head. The death mixes the capped
/// first-head time (weight alpha) with a tail branch F never sees directly.
fn build_mixture(
    t: usize,
    alpha: f64,
    tail: MixtureTail,
) -> Result<(FiniteFilteredSpace, RandomTime)> {
    check_unit_open("alpha", alpha)?;
    // Coin atom j: first head at j+1 for j < t, no head within t steps at
    // j = t. Two branches each.
    let coins = t + 1;
    let n = 2 * coins;
    check_size(t, MAX_DEPTH, n)?;
    let coin_weight = |j: usize| {
        if j < t {
            0.5f64.powi(j as i32 + 1)
        } else {
            0.5f64.powi(t as i32)
        }
    };
    let sigma1 = |j: usize| if j < t { j + 1 } else { t };
    let mut weights = Vec::with_capacity(n);
    let mut theta_vals = Vec::with_capacity(n);
    let mut names = Vec::with_capacity(n);
    for branch in 0..2 {
        for j in 0..coins {
            let bw = if branch == 0 { alpha } else { 1.0 - alpha };
            weights.push(bw * coin_weight(j));
            if branch == 0 {
                theta_vals.push(Some(sigma1(j)));
            } else {
                theta_vals.push(match tail {
                    MixtureTail::Deterministic => Some(t + 1),
                    MixtureTail::Never => None,
                });
            }
            names.push(format!("b{branch}c{j}"));
        }
    }
    let horizon = t + 1;
    let f_parts: Vec<Partition> = (0..=horizon)
        .map(|s| {
            Partition::from_labels(
                &(0..n)
                    .map(|a| {
                        let j = a % coins;
                        if j < t && j + 1 <= s {
                            j + 1
                        } else {
                            0
                        }
                    })
                    .collect::<Vec<usize>>(),
            )
        })
        .collect();
    let g_parts = progressive_partitions(&f_parts, &theta_vals);
    let space = FiniteFilteredSpace::new(horizon, names, weights, f_parts, g_parts)?;
    let theta = RandomTime::new(&space, theta_vals, Fil::G)?;
    Ok((space, theta))
}

fn build_own_filtration(
    t: usize,
    hazard: f64,
    observed: bool,
) -> Result<(FiniteFilteredSpace, RandomTime)> {
    check_positive("hazard", hazard)?;
    let n = t + 1;
    check_size(t, MAX_DEPTH, n)?;
    let gamma = odds_to_prob(hazard);
    let mut weights = Vec::with_capacity(n);
    let mut theta_vals = Vec::with_capacity(n);
    let mut alive = 1.0;
    for k in 1..=t {
        weights.push(alive * gamma);
        theta_vals.push(Some(k));
        alive *= 1.0 - gamma;
    }
    weights.push(alive);
    theta_vals.push(None);
    let trivial = vec![Partition::trivial(n); t + 1];
    let f_parts = if observed {
        progressive_partitions(&trivial, &theta_vals)
    } else {
        trivial
    };
    let g_parts = progressive_partitions(&f_parts, &theta_vals);
    let names = (0..n)
        .map(|k| if k < t { format!("d{}", k + 1) } else { "sv".into() })
        .collect();
    let space = FiniteFilteredSpace::new(t, names, weights, f_parts, g_parts)?;
    let theta = RandomTime::new(&space, theta_vals, Fil::G)?;
    Ok((space, theta))
}

/// Full-information tree: a fair market coin every step plus an independent
/// death coin with probability `death_prob`. Nothing announces the death,
/// so S jumps to zero through positive ᵖS.
fn build_fg_equal(t: usize, death_prob: f64) -> Result<(FiniteFilteredSpace, RandomTime)> {
    check_unit_open("death_prob", death_prob)?;
    let paths = 1usize << t;
    let n = paths * (t + 1);
    check_size(t, 8, n)?;
    let atom = |m: usize, slot: usize| m * (t + 1) + slot;
    let mut weights = vec![0.0; n];
    let mut theta_vals = vec![None; n];
    let mut names = vec![String::new(); n];
    let path_weight = 1.0 / paths as f64;
    for m in 0..paths {
        let mut alive = path_weight;
        for k in 1..=t {
            weights[atom(m, k - 1)] = alive * death_prob;
            theta_vals[atom(m, k - 1)] = Some(k);
            names[atom(m, k - 1)] = format!("m{m}d{k}");
            alive *= 1.0 - death_prob;
        }
        weights[atom(m, t)] = alive;
        names[atom(m, t)] = format!("m{m}sv");
    }
    let parts: Vec<Partition> = (0..=t)
        .map(|s| {
            Partition::from_labels(
                &(0..n)
                    .map(|a| {
                        let m = a / (t + 1);
                        let slot = a % (t + 1);
                        let death_seen = if slot + 1 <= s && slot < t { slot + 1 } else { 0 };
                        (m >> (t - s)) * (t + 2) + death_seen
                    })
                    .collect::<Vec<usize>>(),
            )
        })
        .collect();
    let space =
        FiniteFilteredSpace::new(t, names, weights, parts.clone(), parts)?;
    let theta = RandomTime::new(&space, theta_vals, Fil::G)?;
    Ok((space, theta))
}

/// Two independent geometric clocks; θ is their minimum and G names the
/// firing clock (idiosyncratic, common, or both at once), which is strictly
/// finer than watching θ alone.
fn build_common_shock(
    t: usize,
    idio_hazard: f64,
    common_hazard: f64,
) -> Result<(FiniteFilteredSpace, RandomTime)> {
    check_positive("idio_hazard", idio_hazard)?;
    check_positive("common_hazard", common_hazard)?;
    let n = 3 * t + 1;
    check_size(t, MAX_DEPTH, n)?;
    let ga = odds_to_prob(idio_hazard);
    let gb = odds_to_prob(common_hazard);
    let mut weights = Vec::with_capacity(n);
    let mut theta_vals = Vec::with_capacity(n);
    let mut names = Vec::with_capacity(n);
    let mut alive = 1.0;
    for k in 1..=t {
        for (cause, p) in [
            ("i", ga * (1.0 - gb)),
            ("c", gb * (1.0 - ga)),
            ("x", ga * gb),
        ] {
            weights.push(alive * p);
            theta_vals.push(Some(k));
            names.push(format!("{cause}{k}"));
        }
        alive *= (1.0 - ga) * (1.0 - gb);
    }
    weights.push(alive);
    theta_vals.push(None);
    names.push("sv".into());
    let f_parts = vec![Partition::trivial(n); t + 1];
    let g_parts: Vec<Partition> = (0..=t)
        .map(|s| {
            Partition::from_labels(
                &(0..n)
                    .map(|a| match theta_vals[a] {
                        Some(k) if k <= s => a + 1,
                        _ => 0,
                    })
                    .collect::<Vec<usize>>(),
            )
        })
        .collect();
    let space = FiniteFilteredSpace::new(t, names, weights, f_parts, g_parts)?;
    let theta = RandomTime::new(&space, theta_vals, Fil::G)?;
    Ok((space, theta))
}

/// Random refining tree, random death map, and a randomly timed extra
/// reveal in G. Reveals over living atoms can split an F-cell's survivors
/// across G-cells; such draws are rejected and resampled.
fn build_random(
    t: usize,
    seed: u64,
    max_atoms: usize,
) -> Result<(FiniteFilteredSpace, RandomTime, usize)> {
    let cap = if max_atoms == 0 { 96 } else { max_atoms };
    check_size(t, MAX_DEPTH, cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(12..=cap.max(12));

    let mut weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }

    let mut f_parts = vec![Partition::trivial(n)];
    for _ in 1..=t {
        let prev = f_parts.last().unwrap();
        let mut cell_of = prev.cell_of.clone();
        let mut next_label = prev.n_cells();
        for cell in &prev.cells {
            if cell.len() > 1 && rng.gen_bool(0.5) {
                let mut shuffled = cell.clone();
                shuffled.shuffle(&mut rng);
                let cut = rng.gen_range(1..cell.len());
                for &a in &shuffled[..cut] {
                    cell_of[a] = next_label;
                }
                next_label += 1;
            }
        }
        f_parts.push(Partition::from_cell_of(cell_of));
    }

    for attempt in 1..=50 {
        let theta_vals: Vec<Option<usize>> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    None
                } else {
                    Some(rng.gen_range(1..=t))
                }
            })
            .collect();
        let g_parts = {
            let base = progressive_partitions(&f_parts, &theta_vals);
            let reveal_at = rng.gen_range(1..=t);
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3usize)).collect();
            let dead_only = rng.gen_bool(0.5);
            (0..=t)
                .map(|s| {
                    if s < reveal_at {
                        return base[s].clone();
                    }
                    let extra = Partition::from_labels(
                        &(0..n)
                            .map(|a| {
                                let dead = theta_vals[a].map_or(false, |k| k <= s);
                                if !dead_only || dead {
                                    labels[a] + 1
                                } else {
                                    0
                                }
                            })
                            .collect::<Vec<usize>>(),
                    );
                    base[s].join(&extra)
                })
                .collect::<Vec<Partition>>()
        };
        let space = FiniteFilteredSpace::new(
            t,
            (0..n).map(|a| format!("a{a}")).collect(),
            weights.clone(),
            f_parts.clone(),
            g_parts,
        )?;
        let theta = RandomTime::new(&space, theta_vals, Fil::G)?;
        if check_condition_b(&space, &theta).holds {
            return Ok((space, theta, attempt));
        }
    }
    Err(Error::InvalidParameter(format!(
        "random scenario seed {seed} found no trace-compatible draw in 50 tries"
    )))
}

/// Per-(time, F-cell) recovery levels in [0.25, 1.25], deterministic in the
/// scenario seed.
fn build_recovery(space: &FiniteFilteredSpace, seed: u64) -> AdaptedProcess {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9).wrapping_add(1));
    let n = space.n_atoms();
    let values = (0..=space.horizon)
        .map(|s| {
            let part = space.partition(Fil::F, s);
            let levels: Vec<f64> =
                (0..part.n_cells()).map(|_| rng.gen_range(0.25..1.25)).collect();
            (0..n).map(|a| levels[part.cell_of[a]]).collect()
        })
        .collect();
    AdaptedProcess::raw(values, Fil::F)
}
