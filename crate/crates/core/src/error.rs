use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("non-finite value in vector")]
    NonFinite,

    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error("episode {episode}: missing voice embeddings for segments {ids:?}")]
    MissingEmbeddings { episode: String, ids: Vec<u32> },

    #[error("stage yield increased from {from} ({before}) to {to} ({after})")]
    YieldViolation { from: &'static str, before: usize, to: &'static str, after: usize },

    #[error("subtitle cue {cue}: {message}")]
    Subtitle { cue: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse { source_name: source_name.to_string(), line, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
