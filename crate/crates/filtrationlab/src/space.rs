//! Finite filtered probability spaces: weighted atoms plus two nested
//! filtrations given as per-time partitions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which of the two filtrations a process, time or partition refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fil {
    F,
    G,
}

/// A partition of the atom set. `cell_of[atom]` is the cell index; `cells`
/// lists the atoms of each cell in increasing order. Cell indices are
/// normalized by first occurrence so that equal partitions compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub cell_of: Vec<usize>,
    pub cells: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds a partition from an arbitrary atom labelling; atoms with equal
    /// labels share a cell.
    pub fn from_labels<T: PartialEq>(labels: &[T]) -> Self {
        let mut reps: Vec<&T> = Vec::new();
        let mut cell_of = Vec::with_capacity(labels.len());
        for l in labels {
            let idx = match reps.iter().position(|r| *r == l) {
                Some(i) => i,
                None => {
                    reps.push(l);
                    reps.len() - 1
                }
            };
            cell_of.push(idx);
        }
        Self::from_cell_of(cell_of)
    }

    /// Builds from a raw cell-index vector, renumbering by first occurrence.
    pub fn from_cell_of(raw: Vec<usize>) -> Self {
        let mut remap: Vec<Option<usize>> = vec![None; raw.len()];
        let mut cell_of = Vec::with_capacity(raw.len());
        let mut cells: Vec<Vec<usize>> = Vec::new();
        for (atom, &r) in raw.iter().enumerate() {
            let idx = match remap.get(r).and_then(|m| *m) {
                Some(i) => i,
                None => {
                    if r >= remap.len() {
                        remap.resize(r + 1, None);
                    }
                    let i = cells.len();
                    remap[r] = Some(i);
                    cells.push(Vec::new());
                    i
                }
            };
            cell_of.push(idx);
            cells[idx].push(atom);
        }
        Partition { cell_of, cells }
    }

    /// The trivial one-cell partition.
    pub fn trivial(n_atoms: usize) -> Self {
        Partition {
            cell_of: vec![0; n_atoms],
            cells: vec![(0..n_atoms).collect()],
        }
    }

    /// The discrete partition (every atom its own cell).
    pub fn discrete(n_atoms: usize) -> Self {
        Partition {
            cell_of: (0..n_atoms).collect(),
            cells: (0..n_atoms).map(|a| vec![a]).collect(),
        }
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// True iff every cell of `self` is contained in a cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.cells.iter().all(|cell| {
            let target = coarser.cell_of[cell[0]];
            cell.iter().all(|&a| coarser.cell_of[a] == target)
        })
    }

    /// Common refinement (join) of two partitions.
    pub fn join(&self, other: &Partition) -> Partition {
        let pairs: Vec<(usize, usize)> = self
            .cell_of
            .iter()
            .zip(&other.cell_of)
            .map(|(&a, &b)| (a, b))
            .collect();
        Partition::from_labels(&pairs)
    }

    /// True iff `set` (an atom predicate) is a union of cells.
    pub fn saturates(&self, set: &[bool]) -> bool {
        self.cells
            .iter()
            .all(|cell| cell.iter().all(|&a| set[a] == set[cell[0]]))
    }
}

/// Atoms with strictly positive weights summing to one, and two filtrations
/// `F ⊆ G` given as refining partition chains over times `0..=T`.
#[derive(Debug, Clone)]
pub struct FiniteFilteredSpace {
    pub horizon: usize,
    pub atoms: Vec<String>,
    pub base_weights: Vec<f64>,
    partitions_f: Vec<Partition>,
    partitions_g: Vec<Partition>,
}

impl FiniteFilteredSpace {
    pub fn new(
        horizon: usize,
        atoms: Vec<String>,
        base_weights: Vec<f64>,
        partitions_f: Vec<Partition>,
        partitions_g: Vec<Partition>,
    ) -> Result<Self> {
        let n = atoms.len();
        if horizon == 0 {
            return Err(Error::InvalidSpace("horizon must be at least 1".into()));
        }
        if n == 0 || base_weights.len() != n {
            return Err(Error::InvalidSpace(
                "atoms and base_weights must be non-empty and of equal length".into(),
            ));
        }
        if base_weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidSpace(
                "base weights must be strictly positive (all measures are equivalent)".into(),
            ));
        }
        let total: f64 = base_weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidSpace(format!(
                "base weights sum to {total}, expected 1"
            )));
        }
        for (name, parts) in [("F", &partitions_f), ("G", &partitions_g)] {
            if parts.len() != horizon + 1 {
                return Err(Error::InvalidSpace(format!(
                    "{name} must have horizon+1 partitions"
                )));
            }
            if parts.iter().any(|p| p.cell_of.len() != n) {
                return Err(Error::InvalidSpace(format!(
                    "{name} partition sizes disagree with atom count"
                )));
            }
            for t in 1..=horizon {
                if !parts[t].refines(&parts[t - 1]) {
                    return Err(Error::InvalidSpace(format!(
                        "{name} does not refine over time at t={t}"
                    )));
                }
            }
        }
        for t in 0..=horizon {
            if !partitions_g[t].refines(&partitions_f[t]) {
                return Err(Error::InvalidSpace(format!(
                    "G must refine F at every time (violated at t={t})"
                )));
            }
        }
        Ok(FiniteFilteredSpace {
            horizon,
            atoms,
            base_weights,
            partitions_f,
            partitions_g,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn partition(&self, fil: Fil, t: usize) -> &Partition {
        match fil {
            Fil::F => &self.partitions_f[t],
            Fil::G => &self.partitions_g[t],
        }
    }

    /// Partition generating the t-1 information, with the convention that
    /// time 0- means time 0.
    pub fn partition_prev(&self, fil: Fil, t: usize) -> &Partition {
        self.partition(fil, t.saturating_sub(1))
    }

    /// Expectation of an atom-indexed payoff under the base measure.
    pub fn expect(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.base_weights).map(|(v, w)| v * w).sum()
    }
}
