use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input (bad indices, lengths, parameters).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Input is well formed but outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested enumeration exceeds a configured bound.
    #[error("scale refused: {what} needs {count}, limit is {limit}")]
    Scale {
        what: String,
        count: String,
        limit: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn scale(what: impl Into<String>, count: impl ToString, limit: impl ToString) -> Self {
        Error::Scale {
            what: what.into(),
            count: count.to_string(),
            limit: limit.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
