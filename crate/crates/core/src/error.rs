use std::path::PathBuf;

use thiserror::Error;

/// Errors shared by every engine component.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("a round is already being processed for debate {0}")]
    RoundInProgress(String),

    #[error("debate {0} is finished")]
    DebateFinished(String),

    #[error("turn deadline passed for debate {0}")]
    TurnExpired(String),

    #[error("sequence conflict for debate {debate_id}: expected {expected}, got {got}")]
    Conflict {
        debate_id: String,
        expected: u64,
        got: u64,
    },

    #[error("corrupt data in {path} at line {line}: {reason}")]
    CorruptData {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("storage error: {0}")]
    Storage(#[from] std::io::Error),

    #[error("evaluation unavailable: {0}")]
    EvaluationUnavailable(String),

    #[error("provider unavailable: {0}")]
    ProviderUnavailable(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn state(msg: impl Into<String>) -> Self {
        Error::InvalidState(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
