use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The exhaustive oracle refuses instances that are too large to enumerate.
    #[error("exhaustive scan refused: matrix has {rows} rows, limit is {limit}")]
    GuardViolation { rows: usize, limit: usize },

    /// Power iteration did not reach tolerance; carries the last iterate
    /// (left vector first, then right vector).
    #[error("power iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    NotConverged {
        iterations: usize,
        last_change: f64,
        left: Vec<f64>,
        right: Vec<f64>,
    },

    #[error("malformed matrix input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(message: impl Into<String>) -> Error {
    Error::Domain(message.into())
}
