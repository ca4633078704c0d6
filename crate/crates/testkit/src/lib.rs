//! Fixtures and oracles shared by the integration and acceptance tests.

use std::path::PathBuf;

use beacon_core::image_inspect::{is_invisible, raster_dimensions, sniff_mime, svg_dimensions, MimeType};
use beacon_core::ImageError;
use serde::Deserialize;

pub mod corpus_gen;
pub mod filter_oracle;
pub mod fixture_server;
pub mod imagegen;
pub mod invariants;
pub mod planted;
pub mod synthetic_web;
pub mod tree_oracle;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// One row of `data/images/manifest.csv`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct ImageFixture {
    pub filename: String,
    pub mime: String,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub invisible: bool,
    /// `truncated_image` or `zero_dimension` when parsing must fail.
    pub error: Option<String>,
}

pub fn image_fixtures() -> Result<Vec<ImageFixture>, csv::Error> {
    let mut rdr = csv::Reader::from_path(data_dir().join("images").join("manifest.csv"))?;
    rdr.deserialize()
        .map(|r| r.map(|mut f: ImageFixture| {
            f.error = f.error.filter(|e| !e.is_empty());
            f
        }))
        .collect()
}

/// Inspects one fixture file and compares it with its manifest row.
pub fn check_image_fixture(f: &ImageFixture) -> Result<(), String> {
    let bytes = std::fs::read(data_dir().join("images").join(&f.filename)).map_err(|e| e.to_string())?;
    let mime = sniff_mime(&bytes, None);
    if mime.as_str() != f.mime {
        return Err(format!("mime {} != {}", mime.as_str(), f.mime));
    }
    let dims = match &mime {
        MimeType::Svg => Ok(svg_dimensions(&String::from_utf8_lossy(&bytes))),
        m => raster_dimensions(&bytes, m).map(Some),
    };
    let dims = match (dims, f.error.as_deref()) {
        (Err(e), Some(want)) => {
            let name = match e {
                ImageError::TruncatedImage => "truncated_image",
                ImageError::ZeroDimension => "zero_dimension",
                ImageError::UnsupportedVariant => "unsupported_variant",
            };
            return if name == want { Ok(()) } else { Err(format!("error {name} != {want}")) };
        }
        (Err(e), None) => return Err(format!("unexpected error {e}")),
        (Ok(_), Some(want)) => return Err(format!("expected error {want}")),
        (Ok(d), None) => d,
    };
    let got = (dims.map(|d| d.width), dims.map(|d| d.height));
    if got != (f.width, f.height) {
        return Err(format!("dimensions {got:?} != {:?}", (f.width, f.height)));
    }
    if is_invisible(&mime, dims) != f.invisible {
        return Err(format!("invisible != {}", f.invisible));
    }
    Ok(())
}
