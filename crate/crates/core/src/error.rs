use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "dimension mismatch: individual traits {individual}, interaction matrix {rows}x{cols}, \
         society traits {society}"
    )]
    DimensionMismatch {
        individual: usize,
        rows: usize,
        cols: usize,
        society: usize,
    },

    #[error("empty population")]
    EmptyPopulation,

    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },

    /// A bookkeeping invariant was violated; indicates a scheduler bug.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
