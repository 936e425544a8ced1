use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration (bad key, bad value, violated ordering constraint).
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called with inputs violating its preconditions.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// No point of the calibration search grid meets the target arms.
    #[error("calibration infeasible: {0}")]
    CalibrationInfeasible(String),

    /// File parse failure with location.
    #[error("parse error in {path}, line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// I/O failure with the path that caused it.
    #[error("i/o error on {path}: {source}")]
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
}

pub type Result<T> = std::result::Result<T, Error>;
