use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by configuration, file loading and domain checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    #[error("unknown key `{key}` on line {line}")]
    UnknownKey { key: String, line: usize },

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("value for `{key}` on line {line} is out of range: {message}")]
    Range { key: String, line: usize, message: String },

    #[error("mask format error on line {line}: {message}")]
    MaskFormat { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

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
