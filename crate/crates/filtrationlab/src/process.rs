//! Time-indexed, cell-constant processes on a finite filtered space.

use crate::error::{Error, Result};
use crate::space::{Fil, FiniteFilteredSpace};
use serde::{Deserialize, Serialize};

/// Measurability class of a process for its tagged filtration. `Predictable`
/// at time t means constant on cells of time t-1 (at t=0: on cells of time 0,
/// matching the convention that the time-0 past is time 0 itself).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProcessClass {
    Raw,
    Optional,
    Predictable,
}

/// Values per (time, atom) plus the filtration they are adapted to.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedProcess {
    pub values: Vec<Vec<f64>>,
    pub filtration: Fil,
    pub class: ProcessClass,
}

impl AdaptedProcess {
    /// Wraps values without any measurability claim.
    pub fn raw(values: Vec<Vec<f64>>, filtration: Fil) -> Self {
        AdaptedProcess {
            values,
            filtration,
            class: ProcessClass::Raw,
        }
    }

    /// Validates cell-constancy at every time and tags the result optional.
    pub fn optional(
        space: &FiniteFilteredSpace,
        values: Vec<Vec<f64>>,
        filtration: Fil,
    ) -> Result<Self> {
        let p = AdaptedProcess {
            values,
            filtration,
            class: ProcessClass::Optional,
        };
        p.check_class(space)?;
        Ok(p)
    }

    /// Validates measurability one step ahead and tags the result predictable.
    pub fn predictable(
        space: &FiniteFilteredSpace,
        values: Vec<Vec<f64>>,
        filtration: Fil,
    ) -> Result<Self> {
        let p = AdaptedProcess {
            values,
            filtration,
            class: ProcessClass::Predictable,
        };
        p.check_class(space)?;
        Ok(p)
    }

    pub fn constant(space: &FiniteFilteredSpace, c: f64, filtration: Fil) -> Self {
        AdaptedProcess {
            values: vec![vec![c; space.n_atoms()]; space.horizon + 1],
            filtration,
            class: ProcessClass::Predictable,
        }
    }

    /// Verifies that the claimed class actually holds (exact equality; all
    /// constructions in this library produce bitwise cell-constant values).
    pub fn check_class(&self, space: &FiniteFilteredSpace) -> Result<()> {
        match self.class {
            ProcessClass::Raw => Ok(()),
            ProcessClass::Optional => self.check_measurable(space, 0),
            ProcessClass::Predictable => self.check_measurable(space, 1),
        }
    }

    fn check_measurable(&self, space: &FiniteFilteredSpace, lag: usize) -> Result<()> {
        for (t, row) in self.values.iter().enumerate() {
            let part = space.partition(self.filtration, t.saturating_sub(lag));
            for cell in &part.cells {
                let v0 = row[cell[0]];
                if let Some(&a) = cell.iter().find(|&&a| row[a] != v0) {
                    return Err(Error::WrongClass {
                        expected: if lag == 0 { "optional" } else { "predictable" },
                        t,
                        atom: a,
                    });
                }
            }
        }
        Ok(())
    }

    /// Detects the finest class the values satisfy.
    pub fn classify(mut self, space: &FiniteFilteredSpace) -> Self {
        self.class = ProcessClass::Predictable;
        if self.check_class(space).is_ok() {
            return self;
        }
        self.class = ProcessClass::Optional;
        if self.check_class(space).is_ok() {
            return self;
        }
        self.class = ProcessClass::Raw;
        self
    }

    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    /// Freezes the path after t: rows beyond t repeat row t, so later
    /// increments vanish and drift tests only see [0,t].
    pub fn freeze_after(&self, t: usize) -> AdaptedProcess {
        let values = (0..self.values.len())
            .map(|s| self.values[s.min(t)].clone())
            .collect();
        AdaptedProcess {
            values,
            filtration: self.filtration,
            class: self.class,
        }
    }

    /// Value at t-1, with the convention that time 0- is time 0.
    pub fn prev(&self, t: usize, atom: usize) -> f64 {
        self.values[t.saturating_sub(1)][atom]
    }

    /// Increment at t (zero at t=0).
    pub fn delta(&self, t: usize, atom: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.values[t][atom] - self.values[t - 1][atom]
        }
    }

    /// Pointwise combination with another process on the same lattice. The
    /// result is tagged raw; callers re-classify when they need a certificate.
    pub fn zip_with(&self, other: &AdaptedProcess, f: impl Fn(f64, f64) -> f64) -> AdaptedProcess {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        AdaptedProcess::raw(values, self.filtration)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> AdaptedProcess {
        let values = self
            .values
            .iter()
            .map(|row| row.iter().map(|&x| f(x)).collect())
            .collect();
        AdaptedProcess::raw(values, self.filtration)
    }

    pub fn add(&self, other: &AdaptedProcess) -> AdaptedProcess {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &AdaptedProcess) -> AdaptedProcess {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> AdaptedProcess {
        self.map(|x| c * x)
    }

    /// Max over all (t, atom) of |self - other|.
    pub fn max_abs_diff(&self, other: &AdaptedProcess) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}
