//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid random time: {0}")]
    InvalidTime(String),

    #[error("cell {cell} at time {t} has zero total mass under the supplied measure")]
    ZeroMassCell { t: usize, cell: usize },

    #[error("process is not {expected} (violated at time {t}, atom {atom})")]
    WrongClass {
        expected: &'static str,
        t: usize,
        atom: usize,
    },

    #[error("integrand must be predictable")]
    IntegrandNotPredictable,

    #[error("stochastic logarithm undefined: process not positive at time {t}, atom {atom}")]
    LogOutsideWindow { t: usize, atom: usize },

    #[error("filtrations disagree between `{context}` operands")]
    FiltrationMismatch { context: &'static str },

    #[error("condition (B) fails at time {t}, cell {cell}")]
    ConditionBFailed { t: usize, cell: usize },

    #[error("density is not an equivalent measure change: {0}")]
    NotEquivalent(String),

    #[error("density is not an invariance witness: {0}")]
    NotInvariant(String),

    #[error("one-step solve did not converge at time {t}, cell {cell} (after {iters} iterations)")]
    FixedPointDiverged { t: usize, cell: usize, iters: usize },

    #[error("invalid scenario parameters: {0}")]
    InvalidParameter(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("scenario file: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
