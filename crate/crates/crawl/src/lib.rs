//! Networked corpus builder: fetches listed sites and their same-site
//! links, downloads every referenced image and merges repeated passes.

pub mod config;
pub mod crawl;
pub mod error;
pub mod fetch;
pub mod robots;

pub use config::{CrawlConfig, DomainEntry, ModeName};
pub use crawl::{ingest, merge, CrawlOutput, Crawler};
pub use error::{ConfigError, CrawlError, FetchError};
pub use fetch::{FetchResult, Fetcher, HostGate};
