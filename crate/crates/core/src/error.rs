use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced anywhere in the reproduction pipeline.
///
/// Variants are grouped by [`ErrorKind`], which the command line driver maps
/// onto process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("order {order} exceeds the supported maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("invalid harmonic index (order {order}, degree {degree})")]
    InvalidIndex { order: usize, degree: i64 },

    #[error("{function} is singular at argument {x}")]
    SingularArgument { function: &'static str, x: f64 },

    #[error("argument {x} outside the domain of {function}")]
    Domain { function: &'static str, x: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("translation needs source order >= {required}, coefficients only have order {available}")]
    TruncationRisk { available: usize, required: usize },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { what: &'static str, condition: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("SDR undefined: desired signal has zero energy")]
    UndefinedSdr,

    #[error("configuration error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{}: {detail}", path.display())]
    Ingestion { path: PathBuf, detail: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn ingestion(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Ingestion {
            path: path.into(),
            detail: detail.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps `self` with the name of the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::UnsupportedOrder { .. }
            | Error::InvalidIndex { .. }
            | Error::Geometry(_)
            | Error::Dimension { .. }
            | Error::Config { .. } => ErrorKind::Config,
            Error::Ingestion { .. } | Error::Io { .. } => ErrorKind::Data,
            Error::SingularArgument { .. }
            | Error::Domain { .. }
            | Error::TruncationRisk { .. }
            | Error::IllConditioned { .. }
            | Error::NonFinite(_)
            | Error::UndefinedSdr => ErrorKind::Numerical,
            Error::Stage { source, .. } => source.kind(),
        }
    }

    /// Process exit code: 2 for configuration, 3 for data, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        }
    }
}
