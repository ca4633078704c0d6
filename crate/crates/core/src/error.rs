use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UrlError {
    #[error("empty url")]
    Empty,
    #[error("malformed url: {0}")]
    Malformed(String),
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageError {
    #[error("image data truncated")]
    TruncatedImage,
    #[error("unsupported image variant")]
    UnsupportedVariant,
    #[error("image declares a zero dimension")]
    ZeroDimension,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("corrupt corpus: {0}")]
    Corrupt(String),
}

impl CorpusError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.into(),
            source,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatureError {
    #[error("only {found} distinct domains in scope, {wanted} requested")]
    CorpusTooSmall { wanted: usize, found: usize },
    #[error("image references unknown page {0}")]
    MissingPage(u64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifierError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset contains a single class")]
    SingleClass,
    #[error("too few rows: class with {have} rows cannot fill {folds} folds")]
    TooFewRows { have: usize, folds: usize },
    #[error("row {row} has {found} values, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown feature column: {0}")]
    UnknownFeature(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
