use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GsbmError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel {index} is not a probability vector: {reason}")]
    InvalidChannel { index: usize, reason: String },

    #[error("degenerate family: symbol {symbol} has zero average probability")]
    Degenerate { symbol: usize },

    #[error("label tuple {0:?} out of range")]
    LabelOutOfRange(Vec<usize>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("tensor is not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },

    #[error("all-ones vector is not an eigenvector of the interaction matrix (residual {residual:e})")]
    NotRegularInteraction { residual: f64 },

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("budget exceeded: {what} needs {needed} but budget is {budget}")]
    BudgetExceeded { what: String, needed: f64, budget: f64 },

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    #[error("model specification error: {0}")]
    Spec(String),

    #[error("inequality chain violated at link {link}: {lhs} > {rhs}")]
    ChainViolation { link: String, lhs: f64, rhs: f64 },
}

pub type Result<T> = std::result::Result<T, GsbmError>;

pub(crate) fn invalid(msg: impl Into<String>) -> GsbmError {
    GsbmError::InvalidParameter(msg.into())
}
