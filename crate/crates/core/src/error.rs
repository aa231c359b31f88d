//! Error type shared across the toolkit.
//!
//! Two broad classes matter to callers: contract violations (bad input data,
//! mismatched shapes, malformed files) and plain I/O failures. The CLI maps
//! the former to exit code 1 and the latter to exit code 2, so the variants
//! here keep that distinction intact.

use std::path::PathBuf;

/// Unified error for corpus handling, model plumbing, and file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A line in a tab-separated input file could not be parsed.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        /// 1-based line number of the offending record.
        line: usize,
        msg: String,
    },

    /// Caller handed an operation data that violates its contract
    /// (empty corpus, shape mismatch, invalid configuration value, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two models that must agree on a dimension do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A serialized model file is corrupt or not in the expected format.
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),

    /// Underlying filesystem failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Wrap an I/O error with the path it happened on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors that indicate broken input rather than a failed
    /// filesystem operation.
    pub fn is_contract_violation(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
