use thiserror::Error;

/// Errors raised across the clustering pipeline.
#[derive(Debug, Error)]
pub enum FsascError {
    /// A caller-side precondition was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An exact integer quantity does not fit in the platform word.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("not enough points: {points} points but {required} monomials of degree {degree} in {dim} variables")]
    NotEnoughPoints {
        points: usize,
        required: usize,
        degree: usize,
        dim: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FsascError {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        FsascError::Contract(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        FsascError::Numerical(msg.into())
    }

    /// True for errors caused by malformed input files.
    pub fn is_parse_error(&self) -> bool {
        matches!(self, FsascError::Parse { .. } | FsascError::Json(_))
    }

    /// True for failures of the numerical routines themselves.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            FsascError::Numerical(_) | FsascError::NotEnoughPoints { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, FsascError>;
