//! Detection of invisible third-party images ("web beacons").
//!
//! The pipeline runs from collected pages and images ([`corpus`]) through
//! HTML and image header parsing ([`html_extract`], [`image_inspect`]),
//! filter-list matching ([`filter_engine`]) and feature extraction
//! ([`features`]) to a resampled decision-tree experiment ([`classifier`]).
//! [`report`] produces the sample summaries.

pub mod classifier;
pub mod corpus;
pub mod error;
pub mod features;
pub mod filter_engine;
pub mod html_extract;
pub mod image_inspect;
pub mod report;

pub use error::{ClassifierError, CorpusError, FeatureError, ImageError, UrlError};

/// Single-precision aliases.
pub type Dataset32 = classifier::Dataset<f32>;
pub type TreeNode32 = classifier::TreeNode<f32>;
/// Double-precision aliases.
pub type Dataset64 = classifier::Dataset<f64>;
pub type TreeNode64 = classifier::TreeNode<f64>;
