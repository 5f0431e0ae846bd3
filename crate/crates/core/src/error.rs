use thiserror::Error;

/// Errors raised across the library and CLI.
#[derive(Debug, Error)]
pub enum GwtError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("graph is disconnected: {0}")]
    Disconnected(String),

    #[error("odd size {0}: operation requires an even node count")]
    OddSize(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular system (condition estimate {condition:.3e}): {detail}")]
    Singular { condition: f64, detail: String },

    #[error("filterbank is not invertible: {0}")]
    NotInvertible(String),

    #[error("no complementary filter exists (Bezout): {0}")]
    BezoutInfeasible(String),

    #[error("perfect reconstruction check failed: residual {0:.3e}")]
    ReconstructionFailed(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GwtError {
    /// Process exit code used by the CLI: 2 validation, 3 mathematical
    /// infeasibility, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            GwtError::InvalidGraph(_)
            | GwtError::SizeMismatch { .. }
            | GwtError::Disconnected(_)
            | GwtError::OddSize(_)
            | GwtError::InvalidArgument(_)
            | GwtError::Parse(_)
            | GwtError::Json(_) => 2,
            GwtError::Singular { .. }
            | GwtError::NotInvertible(_)
            | GwtError::BezoutInfeasible(_)
            | GwtError::ReconstructionFailed(_) => 3,
            GwtError::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, GwtError>;
