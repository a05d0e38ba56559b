use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can surface. The `Display` prefixes are stable so
/// scripts can match on them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("io error: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown entity: `{0}`")]
    UnknownEntity(String),

    #[error("unknown predicate: `{0}`")]
    UnknownPredicate(String),

    #[error("unseen predicate: `{0}` has no edges in the graph; supply positive pairs manually (--positives)")]
    UnseenPredicate(String),

    #[error("invalid statement: subject and object are the same entity `{0}`")]
    SameEndpoints(String),

    #[error("empty selection: no feature has importance >= {threshold}; lower the threshold")]
    EmptySelection { threshold: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("no convergence: gradient norm {grad_norm:e} after {iterations} iterations (tolerance {tolerance:e}, loss {loss})")]
    NoConvergence {
        iterations: usize,
        grad_norm: f64,
        tolerance: f64,
        loss: f64,
    },

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error("model format error: line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
