use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: label index {index} out of bounds for K={labels}")]
    LabelBounds { line: usize, index: usize, labels: usize },

    #[error("line {line}: feature index {index} out of bounds for D={dim}")]
    FeatureBounds { line: usize, index: usize, dim: usize },

    #[error("no instances")]
    NoInstances,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid query: index {0} is not in the unlabeled pool")]
    InvalidQuery(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("target MeanIR {target} unreachable; closest achieved {closest}")]
    UnreachableTarget { target: f64, closest: f64 },

    #[error("{path}: {source}")]
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

    pub(crate) fn dim(expected: usize, got: usize) -> Self {
        Error::Dimension { expected, got }
    }
}
