use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A point or parameter outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Construction rejected because a stated bound or precondition fails.
    #[error("rejected: {0}")]
    Rejected(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
