use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },

    #[error("invalid state: {0}")]
    State(String),

    #[error("numeric fault in {location}: {detail}")]
    Numeric { location: String, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            context,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches the environment step at which a numeric fault surfaced.
    pub fn at_step(self, step: u64) -> Self {
        match self {
            Error::Numeric { location, detail } => Error::Numeric {
                location: format!("step {step}: {location}"),
                detail,
            },
            other => other,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric { .. })
    }
}
