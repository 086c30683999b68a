//! Random times with a stopping-time certificate.

use crate::error::{Error, Result};
use crate::space::{Fil, FiniteFilteredSpace};

/// A map atom -> {0..T} ∪ {∞} (None encodes ∞) that is a stopping time of
/// the tagged filtration: {value ≤ t} is a union of time-t cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomTime {
    pub value: Vec<Option<usize>>,
    pub filtration: Fil,
}

impl RandomTime {
    pub fn new(
        space: &FiniteFilteredSpace,
        value: Vec<Option<usize>>,
        filtration: Fil,
    ) -> Result<Self> {
        if value.len() != space.n_atoms() {
            return Err(Error::InvalidTime("value length != atom count".into()));
        }
        if let Some(t) = value.iter().flatten().find(|&&t| t > space.horizon) {
            return Err(Error::InvalidTime(format!(
                "finite value {t} exceeds the horizon"
            )));
        }
        let tau = RandomTime { value, filtration };
        for t in 0..=space.horizon {
            let set: Vec<bool> = tau.value.iter().map(|v| matches!(v, Some(s) if *s <= t)).collect();
            if !space.partition(filtration, t).saturates(&set) {
                return Err(Error::InvalidTime(format!(
                    "{{τ ≤ {t}}} is not measurable at time {t}"
                )));
            }
        }
        Ok(tau)
    }

    pub fn infinite(space: &FiniteFilteredSpace, filtration: Fil) -> Self {
        RandomTime {
            value: vec![None; space.n_atoms()],
            filtration,
        }
    }

    pub fn constant(space: &FiniteFilteredSpace, t: usize, filtration: Fil) -> Self {
        RandomTime {
            value: vec![Some(t); space.n_atoms()],
            filtration,
        }
    }

    /// τ(ω) as an effective comparison key (∞ sorts after every time).
    pub fn at(&self, atom: usize) -> usize {
        self.value[atom].unwrap_or(usize::MAX)
    }

    /// {τ = t}: measurable already at t-1 for every t ≥ 1.
    pub fn is_predictable(&self, space: &FiniteFilteredSpace) -> bool {
        (1..=space.horizon).all(|t| {
            let set: Vec<bool> = self.value.iter().map(|v| *v == Some(t)).collect();
            space.partition(self.filtration, t - 1).saturates(&set)
        })
    }

    /// Pointwise minimum with a constant time.
    pub fn min_const(&self, t: usize) -> RandomTime {
        RandomTime {
            value: self
                .value
                .iter()
                .map(|v| Some(v.map_or(t, |s| s.min(t))))
                .collect(),
            filtration: self.filtration,
        }
    }

    /// Restriction τ_A: equals τ on the set, ∞ elsewhere.
    pub fn restrict(&self, set: &[bool]) -> RandomTime {
        RandomTime {
            value: self
                .value
                .iter()
                .zip(set)
                .map(|(v, &keep)| if keep { *v } else { None })
                .collect(),
            filtration: self.filtration,
        }
    }
}
