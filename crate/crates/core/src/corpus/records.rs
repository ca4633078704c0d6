use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::url::ParsedUrl;
use crate::error::ImageError;
use crate::image_inspect::MimeType;

/// SHA-256 of an image body; serialized as lowercase hex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContentDigest(pub [u8; 32]);

impl ContentDigest {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for ContentDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContentDigest({})", self.to_hex())
    }
}

impl fmt::Display for ContentDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for ContentDigest {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 64 || s.bytes().any(|b| b.is_ascii_uppercase()) {
            return Err(format!("digest must be 64 lowercase hex chars: {s:?}"));
        }
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).map_err(|e| e.to_string())?;
        Ok(ContentDigest(out))
    }
}

impl Serialize for ContentDigest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for ContentDigest {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FetchStatus {
    Ok,
    Timeout,
    Error { code: String },
}

impl FetchStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, FetchStatus::Ok)
    }
}

/// One `<img>` element as written in the document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImgTagRef {
    /// Attribute value after entity decoding, before URL resolution.
    pub src: String,
    pub alt_present: bool,
    pub style_value: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageRecord {
    pub id: u64,
    pub site_domain: String,
    pub requested_url: ParsedUrl,
    /// Post-redirect URL; all cross-domain decisions use this one.
    pub final_url: ParsedUrl,
    pub fetch_status: FetchStatus,
    pub image_refs: Vec<ImgTagRef>,
    pub pass_index: u8,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpResponseMeta {
    pub status: u16,
    pub etag_present: bool,
    pub set_cookie_present: bool,
    pub cache_control: Option<String>,
    pub content_type: Option<String>,
}

impl HttpResponseMeta {
    /// Builds the metadata from raw header pairs. Repeated `Cache-Control`
    /// fields are joined with `", "` as HTTP list semantics allow.
    pub fn from_headers<'a, I>(status: u16, headers: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut meta = HttpResponseMeta {
            status,
            ..Default::default()
        };
        for (name, value) in headers {
            if name.eq_ignore_ascii_case("etag") {
                meta.etag_present = true;
            } else if name.eq_ignore_ascii_case("set-cookie") {
                meta.set_cookie_present = true;
            } else if name.eq_ignore_ascii_case("cache-control") {
                meta.cache_control = Some(match meta.cache_control.take() {
                    Some(prev) => format!("{prev}, {value}"),
                    None => value.to_string(),
                });
            } else if name.eq_ignore_ascii_case("content-type") && meta.content_type.is_none() {
                meta.content_type = Some(value.to_string());
            }
        }
        meta
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub page_id: u64,
    pub site_domain: String,
    pub tag: ImgTagRef,
    pub resolved_url: ParsedUrl,
    pub content_digest: ContentDigest,
    pub mime: MimeType,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub response_meta: HttpResponseMeta,
    pub is_invisible: bool,
    pub is_cross_domain: bool,
    pub is_cross_origin: bool,
}

/// Sampling outcome of one entry of the input domain list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub domain: String,
    pub category: Option<String>,
    pub sampled_ok: bool,
    pub passes_attempted: u8,
    pub successful_pass: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SkipReason {
    EmptySrc,
    DataUri,
    MalformedUrl,
    UnsupportedScheme { scheme: String },
    FetchFailed { code: String },
    HttpStatus { status: u16 },
    /// Body fetched but not recognized as any supported image type.
    Unrecognized,
    /// Recognized image type whose header could not be read.
    ParseFailure { error: ImageError },
}

impl SkipReason {
    pub fn is_parse_failure(&self) -> bool {
        matches!(self, SkipReason::ParseFailure { .. })
    }
}

/// An `<img>` reference that did not become an [`ImageRecord`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedImage {
    pub page_id: u64,
    pub site_domain: String,
    pub src: String,
    pub resolved_url: Option<ParsedUrl>,
    pub content_digest: Option<ContentDigest>,
    pub reason: SkipReason,
}
