use thiserror::Error;

/// Errors raised across the walk, census, ensemble and diagnostic layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An exact enumeration or sampling request exceeded its configured budget.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),

    #[error("missing value: {0}")]
    Missing(String),

    #[error("chain initialization failed: {0}")]
    Initialization(String),

    #[error("malformed record: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
