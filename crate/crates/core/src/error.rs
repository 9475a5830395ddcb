use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("spin at index {index} is {value}, expected +1 or -1")]
    InvalidSpin { index: usize, value: i64 },

    #[error("at least 2 elements are required, got {0}")]
    TooFewElements(usize),

    #[error("invalid weight image: {0}")]
    InvalidWeights(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("instance has {n} elements; exhaustive search is limited to {max}")]
    TooLarge { n: usize, max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("replay trace exhausted: {requested} values requested, {remaining} remaining")]
    ReplayExhausted { requested: usize, remaining: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
