use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input data.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A hyperparameter or option combination that cannot be honored.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// The solver produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A path grid point failed; the remaining points still ran.
    #[error("lambda0 = {lambda0}, lambda2 = {lambda2}: {source}")]
    GridPoint { lambda0: f64, lambda2: f64, source: Box<Error> },

    #[error("model file: {0}")]
    ModelFormat(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
