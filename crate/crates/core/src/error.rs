use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported language profile `{0}` (supported: java-like)")]
    UnsupportedProfile(String),

    #[error("no classes found under {0}")]
    EmptyProject(PathBuf),

    #[error("invalid facts: {0}")]
    Validation(String),

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("degenerate vocabulary: every class document is empty after preprocessing")]
    DegenerateVocabulary,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is undefined for this decomposition")]
    UndefinedMetric(&'static str),

    #[error("ground truth does not match the class universe: {0}")]
    UniverseMismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
