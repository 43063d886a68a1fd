use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A `ModelParams` invariant does not hold.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("label {label} out of range at position {index} (expected 1..={max})")]
    LabelOutOfRange {
        index: usize,
        label: usize,
        max: usize,
    },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    EigenConvergence { iterations: usize, residual: f64 },

    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),

    /// The numeric divergence oracle needs every label in the two target
    /// columns to carry positive mass.
    #[error("oracle requires full support: P({k},{column},{label}) = 0")]
    OracleSupport {
        k: usize,
        column: usize,
        label: usize,
    },

    #[error("malformed input in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by bad input rather than a failure while computing.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::EigenConvergence { .. } | Error::Io { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
