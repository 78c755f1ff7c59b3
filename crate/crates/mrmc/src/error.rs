use thiserror::Error;

/// Errors raised by scenario validation, the numerical kernels and the harness.
#[derive(Debug, Error)]
pub enum MrmcError {
    /// One entry per violated configuration invariant.
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("degenerate filter: {0}")]
    DegenerateFilter(String),

    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("empty null space: {0}")]
    NullSpace(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MrmcError>;
