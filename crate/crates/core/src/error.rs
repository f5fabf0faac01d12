use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the prediction toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown feature: {0}")]
    UnknownFeature(String),

    #[error("unknown language: {0}")]
    UnknownLanguage(String),

    #[error("cannot predict {feature} for {language}: {reason}")]
    Prediction {
        language: String,
        feature: String,
        reason: String,
    },

    #[error("training diverged at epoch {epoch}: {message}")]
    Divergence { epoch: usize, message: String },

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
