use thiserror::Error;

#[derive(Debug, Error)]
pub enum IsacError {
    /// Malformed or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Physical domain violation (e.g. zero distance in a path-loss term).
    #[error("domain error: {0}")]
    Domain(String),

    /// No design satisfies the active constraints.
    #[error("infeasible scenario: {0}")]
    Infeasible(String),

    /// Exhaustive search refused because the instance is too large.
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, IsacError>;
