use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate triangle {triangle} (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },

    #[error("dimension mismatch: {what} (expected {expected}, got {actual})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} did not converge after {iterations} iterations (estimate {estimate:e}, residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
        residual: f64,
    },

    #[error("matrix is numerically singular: {0}")]
    Singular(String),

    #[error("Chebyshev recurrence diverged at order {k}; operator spectrum is outside [-1, 1]")]
    RecurrenceDiverged { k: usize },

    #[error("augmentation input mixes class labels ({0:?}); augment each class separately")]
    MixedLabels(Vec<String>),

    #[error("class {label:?} has {count} observation(s); permutation augmentation needs at least 2")]
    TooFewObservations { label: String, count: usize },

    #[error("malformed {format} file: {message}")]
    Format { format: &'static str, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for failures caused by the inputs (files, arguments) rather than by a computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::InvalidMesh(_)
                | Error::InvalidArgument(_)
                | Error::Format { .. }
                | Error::Json(_)
        )
    }
}
