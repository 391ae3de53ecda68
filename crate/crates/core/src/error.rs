//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by parsing, validation, and metric computation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A log line that is not valid JSON.
    #[error("line {line}: malformed JSON: {message}")]
    MalformedJson { line: usize, message: String },

    /// A structurally valid line that violates the record schema or an invariant.
    #[error("line {line}: {message}")]
    InvalidRecord { line: usize, message: String },

    /// Invalid input outside of line-oriented parsing.
    #[error("{0}")]
    InvalidInput(String),

    /// An operation that requires at least one value received none.
    #[error("{0}")]
    EmptyInput(String),

    /// A metric was asked to score a hypothesis with no tokens.
    #[error("empty hypothesis")]
    EmptyHypothesis,

    /// Aggregation over exclusively undefined values.
    #[error("all {0} values are undefined")]
    AllUndefined(&'static str),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn record(line: usize, msg: impl Into<String>) -> Self {
        Error::InvalidRecord {
            line,
            message: msg.into(),
        }
    }
}
