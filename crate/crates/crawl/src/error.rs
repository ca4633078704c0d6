use std::path::PathBuf;

use beacon_core::CorpusError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid domain list: {0}")]
    DomainList(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}

/// A single fetch that did not produce a response. Recorded, never fatal.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FetchError {
    #[error("timed out")]
    Timeout,
    #[error("more than {0} redirects")]
    TooManyRedirects(usize),
    #[error("connection error: {0}")]
    Connection(String),
    #[error("redirect to unsupported location {0}")]
    BadRedirect(String),
}

impl FetchError {
    /// Short code stored in page and skip records.
    pub fn code(&self) -> &'static str {
        match self {
            FetchError::Timeout => "timeout",
            FetchError::TooManyRedirects(_) => "too_many_redirects",
            FetchError::Connection(_) => "connection",
            FetchError::BadRedirect(_) => "bad_redirect",
        }
    }
}

#[derive(Debug, Error)]
pub enum CrawlError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("http client: {0}")]
    Client(String),
    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },
}
