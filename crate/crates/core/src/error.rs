use thiserror::Error;

#[derive(Debug, Error)]
pub enum GsbmError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("visibility graph is disconnected")]
    VisibilityDisconnected,

    #[error("parameters infeasible: {0}")]
    Infeasible(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GsbmError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(GsbmError::InvalidInput(msg.into()))
}
