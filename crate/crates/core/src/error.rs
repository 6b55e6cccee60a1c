use thiserror::Error;

/// Errors raised by the learners, estimators, and solvers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid budget: k = {k} is not allowed for d = {d}")]
    InvalidBudget { k: usize, d: usize },

    #[error("attribute index {index} out of range for d = {d}")]
    IndexOutOfRange { index: usize, d: usize },

    #[error("pair probability requested for identical indices ({0}, {0})")]
    SameIndex(usize),

    #[error("indices must be pairwise distinct")]
    DuplicateIndex,

    #[error("dimension {d} exceeds the supported maximum {max}")]
    DimensionTooLarge { d: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("observed attribute {index} has zero inclusion probability")]
    ZeroProbability { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex iteration limit of {0} reached")]
    IterationLimit(usize),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
