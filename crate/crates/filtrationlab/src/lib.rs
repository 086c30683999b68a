//! Exact stochastic calculus on finite, discrete-time filtered probability spaces.
//!
//! Everything is finite here: the sample space is a list of weighted atoms,
//! filtrations are per-time partitions, and conditional expectations are
//! weighted cell averages. On such spaces the identities of the general
//! theory of processes (projections, Doob decompositions, compensators,
//! stochastic exponentials, Girsanov and Jeulin-Yor compensations) hold
//! exactly, so this library asserts them with tight tolerances instead of
//! assuming them.
//!
//! The centerpiece is the analysis of a random time `θ` observed through a
//! pair of nested filtrations `F ⊆ G`: the survival process of `θ` and its
//! additive and multiplicative decompositions, reductions of `G`-processes to
//! `F`, the decision whether martingales can be preserved when stopped right
//! before `θ` under a changed measure, and the transfer of backward equations
//! between the two filtrations. A scenario layer generates worked model
//! families (Cox times, independent mixtures, shock models, adversarial
//! random spaces) with predicted outcomes, and a batch runner turns the whole
//! thing into a reproducible verification pipeline.

pub mod bsde;
pub mod calculus;
pub mod enlargement;
pub mod error;
pub mod invariance;
pub mod measure;
pub mod process;
pub mod random_time;
pub mod report;
pub mod runner;
pub mod scenarios;
pub mod space;

pub use error::Error;
pub use process::{AdaptedProcess, ProcessClass};
pub use random_time::RandomTime;
pub use space::{Fil, FiniteFilteredSpace, Partition};

/// Default tolerance for martingale (drift) residuals.
pub const TOL_MARTINGALE: f64 = 1e-9;
/// Tolerance for identities that are exact in exact arithmetic.
pub const TOL_ALGEBRA: f64 = 1e-12;
/// Tolerance for compensation formulas (Jeulin-Yor, Girsanov, drift cancellation).
pub const TOL_COMPENSATION: f64 = 1e-10;
/// Tolerance for backward-solver solution transfer.
pub const TOL_BSDE: f64 = 1e-8;
