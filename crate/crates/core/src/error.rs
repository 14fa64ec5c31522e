use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {context}: {message}")]
    Parse { context: String, message: String },

    #[error("building {index}: {reason}")]
    InvalidBuilding { index: usize, reason: String },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid element set: {0}")]
    Tle(String),

    #[error("propagation failed: {0}")]
    Propagation(String),

    #[error("antenna pattern: {0}")]
    Pattern(String),

    #[error("atmosphere table: {0}")]
    Atmosphere(String),

    #[error("unavailability probability {0}% is outside the table range")]
    ProbabilityOutOfRange(f64),

    #[error("empty sample set")]
    EmptySamples,

    #[error("found only {found} of {wanted} line-of-sight positions after {attempts} draws")]
    InsufficientLineOfSight {
        found: usize,
        wanted: usize,
        attempts: usize,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl std::fmt::Display) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }
}
