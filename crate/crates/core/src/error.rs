use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library and mapped onto CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("row {row} references column {column} beyond sequence horizon {horizon}")]
    OutOfRange {
        row: usize,
        column: usize,
        horizon: usize,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("no analytic divergence certificate for explicit families")]
    NoCertificate,

    #[error("construction impossible: {0}")]
    ConstructionImpossible(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A checked inequality failed. The CLI exits with code 2 on this variant.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::InvariantViolation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
