//! Per-image feature vectors for beacon classification.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::Float;
use percent_encoding::percent_decode_str;
use serde::{Deserialize, Serialize};

use crate::corpus::{second_level_domain, Corpus, DomainMode, HttpResponseMeta, ImageRecord, PageRecord, ParsedUrl};
use crate::error::FeatureError;
use crate::filter_engine::{blck_feature, FilterSet};
use crate::image_inspect::MimeType;

/// Column names of the feature matrix, in order, without the label.
pub const FEATURE_NAMES: [&str; 21] = [
    "qurl", "qdom", "unum", "corg", "blck", "aalt", "asty", "etag", "cook", "noch", "mage",
    "mime_gif", "mime_jpeg", "mime_png", "mime_svg", "mime_other", "dtop_1", "dtop_2", "dtop_3",
    "dtop_4", "dtop_5",
];

pub const LABEL_NAME: &str = "label";

/// Columns of the reduced "BLCK and DTOP only" model.
pub const BLCK_DTOP_FEATURES: [&str; 6] = ["blck", "dtop_1", "dtop_2", "dtop_3", "dtop_4", "dtop_5"];

pub const TOP_K: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureVector {
    pub qurl: bool,
    pub qdom: bool,
    pub unum: u32,
    pub corg: bool,
    pub blck: bool,
    pub aalt: bool,
    pub asty: bool,
    pub etag: bool,
    pub cook: bool,
    pub noch: bool,
    pub mage: i64,
    /// gif, jpeg, png, svg, other
    pub mime_dummies: [bool; 5],
    pub dtop_dummies: [bool; TOP_K],
    pub label: bool,
}

impl FeatureVector {
    /// Feature values in [`FEATURE_NAMES`] order.
    pub fn values<T: Float>(&self) -> Vec<T> {
        let b = |v: bool| if v { T::one() } else { T::zero() };
        let mut out = vec![
            b(self.qurl),
            b(self.qdom),
            T::from(self.unum).unwrap(),
            b(self.corg),
            b(self.blck),
            b(self.aalt),
            b(self.asty),
            b(self.etag),
            b(self.cook),
            b(self.noch),
            T::from(self.mage).unwrap(),
        ];
        out.extend(self.mime_dummies.iter().map(|&v| b(v)));
        out.extend(self.dtop_dummies.iter().map(|&v| b(v)));
        out
    }

    fn csv_row(&self) -> String {
        let b = |v: bool| if v { "1" } else { "0" };
        let mut row = format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            b(self.qurl),
            b(self.qdom),
            self.unum,
            b(self.corg),
            b(self.blck),
            b(self.aalt),
            b(self.asty),
            b(self.etag),
            b(self.cook),
            b(self.noch),
            self.mage
        );
        for v in self.mime_dummies.iter().chain(&self.dtop_dummies) {
            row.push(',');
            row.push_str(b(*v));
        }
        row.push(',');
        row.push_str(b(self.label));
        row
    }
}

/// The most referenced image domains, most frequent first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopDomains {
    pub entries: Vec<(String, usize)>,
}

impl TopDomains {
    pub fn domains(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(d, _)| d.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopScope {
    #[default]
    CrossDomain1x1,
    AllImages,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnumMode {
    /// Count of `0`-`9` characters.
    #[default]
    Digits,
    /// Count of maximal digit runs.
    NumericTokens,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QdomTarget {
    /// Second-level domains of the sampled sites.
    #[default]
    Sld,
    /// Host names of the visited pages.
    Host,
}

#[derive(Clone, Debug)]
pub struct FeatureConfig {
    pub mode: DomainMode,
    pub unum: UnumMode,
    pub qdom_target: QdomTarget,
    pub qdom_percent_decode: bool,
    pub top_scope: TopScope,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            mode: DomainMode::Naive,
            unum: UnumMode::Digits,
            qdom_target: QdomTarget::Sld,
            qdom_percent_decode: true,
            top_scope: TopScope::CrossDomain1x1,
        }
    }
}

/// A non-empty query component is present.
pub fn qurl(url: &ParsedUrl) -> bool {
    url.query().is_some_and(|q| !q.is_empty())
}

/// The query names one of `referencing` (case-insensitive substring after
/// one round of percent-decoding).
pub fn qdom(url: &ParsedUrl, referencing: &BTreeSet<String>) -> bool {
    qdom_with(url, referencing, true)
}

pub fn qdom_with(url: &ParsedUrl, referencing: &BTreeSet<String>, percent_decode: bool) -> bool {
    if !qurl(url) {
        return false;
    }
    let raw = url.query().unwrap_or("");
    let query = if percent_decode {
        percent_decode_str(raw).decode_utf8_lossy().into_owned()
    } else {
        raw.to_string()
    }
    .to_lowercase();
    referencing
        .iter()
        .any(|d| !d.is_empty() && query.contains(&d.to_lowercase()))
}

/// Number of decimal digits in the serialized URL.
pub fn unum(url: &ParsedUrl) -> u32 {
    url.to_string().bytes().filter(u8::is_ascii_digit).count() as u32
}

/// Number of maximal digit runs in the serialized URL.
pub fn unum_tokens(url: &ParsedUrl) -> u32 {
    let s = url.to_string();
    let b = s.as_bytes();
    (0..b.len())
        .filter(|&i| b[i].is_ascii_digit() && (i == 0 || !b[i - 1].is_ascii_digit()))
        .count() as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeaderFeatures {
    pub etag: bool,
    pub cook: bool,
    pub noch: bool,
    pub mage: i64,
}

/// Splits a `Cache-Control` value into lowercase `(name, value)` directives,
/// honoring quoted strings.
fn cache_directives(raw: &str) -> Vec<(String, Option<String>)> {
    let mut parts = Vec::new();
    let mut current = String::new();
    let mut quoted = false;
    for c in raw.chars() {
        match c {
            '"' => {
                quoted = !quoted;
                current.push(c);
            }
            ',' if !quoted => parts.push(std::mem::take(&mut current)),
            _ => current.push(c),
        }
    }
    parts.push(current);
    parts
        .into_iter()
        .filter_map(|p| {
            let p = p.trim();
            if p.is_empty() {
                return None;
            }
            Some(match p.split_once('=') {
                Some((n, v)) => (
                    n.trim().to_ascii_lowercase(),
                    Some(v.trim().trim_matches('"').to_string()),
                ),
                None => (p.to_ascii_lowercase(), None),
            })
        })
        .collect()
}

fn parse_delta_seconds(v: &str) -> Option<i64> {
    if v.is_empty() || !v.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // Overlong values saturate at 2^31 as caches are told to do.
    Some(v.parse::<i64>().unwrap_or(1 << 31).min(1 << 31))
}

pub fn header_features(meta: &HttpResponseMeta) -> HeaderFeatures {
    let directives = meta
        .cache_control
        .as_deref()
        .map(cache_directives)
        .unwrap_or_default();
    let noch = directives
        .iter()
        .any(|(n, _)| matches!(n.as_str(), "no-cache" | "no-store" | "must-revalidate"));
    let mage = directives
        .iter()
        .find(|(n, _)| n == "max-age")
        .and_then(|(_, v)| v.as_deref().and_then(parse_delta_seconds))
        .unwrap_or(-1);
    HeaderFeatures {
        etag: meta.etag_present,
        cook: meta.set_cookie_present,
        noch,
        mage,
    }
}

fn mime_dummies(mime: &MimeType) -> [bool; 5] {
    let slot = match mime {
        MimeType::Gif => 0,
        MimeType::Jpeg => 1,
        MimeType::Png => 2,
        MimeType::Svg => 3,
        MimeType::Webp | MimeType::Other(_) => 4,
    };
    let mut d = [false; 5];
    d[slot] = true;
    d
}

/// Ranks the second-level domains of image URLs by how many image records
/// reference them. Ties go to the lexicographically smaller domain.
pub fn top_referenced_domains(
    corpus: &Corpus,
    k: usize,
    scope: TopScope,
    mode: &DomainMode,
) -> Result<TopDomains, FeatureError> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for image in &corpus.images {
        let in_scope = match scope {
            TopScope::CrossDomain1x1 => image.is_invisible && image.is_cross_domain,
            TopScope::AllImages => true,
        };
        if in_scope {
            *counts
                .entry(second_level_domain(image.resolved_url.host(), mode))
                .or_default() += 1;
        }
    }
    if counts.len() < k {
        return Err(FeatureError::CorpusTooSmall {
            wanted: k,
            found: counts.len(),
        });
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    Ok(TopDomains { entries: ranked })
}

/// Assembles the feature vector of one image.
pub fn featurize(
    image: &ImageRecord,
    page: &PageRecord,
    filters: &FilterSet,
    top: &TopDomains,
    referencing: &BTreeSet<String>,
    config: &FeatureConfig,
) -> FeatureVector {
    let url = &image.resolved_url;
    let headers = header_features(&image.response_meta);
    let image_sld = second_level_domain(url.host(), &config.mode);
    let mut dtop = [false; TOP_K];
    for (slot, domain) in dtop.iter_mut().zip(top.domains()) {
        *slot = domain == image_sld;
    }
    FeatureVector {
        qurl: qurl(url),
        qdom: qdom_with(url, referencing, config.qdom_percent_decode),
        unum: match config.unum {
            UnumMode::Digits => unum(url),
            UnumMode::NumericTokens => unum_tokens(url),
        },
        corg: image.is_cross_origin,
        blck: blck_feature(filters, image, page, &config.mode),
        aalt: image.tag.alt_present,
        asty: image.tag.style_value.is_some(),
        etag: headers.etag,
        cook: headers.cook,
        noch: headers.noch,
        mage: headers.mage,
        mime_dummies: mime_dummies(&image.mime),
        dtop_dummies: dtop,
        label: image.is_invisible && image.is_cross_domain,
    }
}

/// Feature vectors for every image of a corpus, in corpus order.
#[derive(Clone, Debug)]
pub struct FeatureMatrix {
    pub vectors: Vec<FeatureVector>,
    pub top: TopDomains,
}

impl FeatureMatrix {
    pub fn header() -> String {
        let mut h = FEATURE_NAMES.join(",");
        h.push(',');
        h.push_str(LABEL_NAME);
        h
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::header();
        out.push('\n');
        for v in &self.vectors {
            let _ = writeln!(out, "{}", v.csv_row());
        }
        out
    }
}

/// Featurizes a whole corpus. When fewer than five domains are in the DTOP
/// scope, the available ones are used and the remaining dummies stay zero.
pub fn featurize_corpus(
    corpus: &Corpus,
    filters: &FilterSet,
    config: &FeatureConfig,
) -> Result<FeatureMatrix, FeatureError> {
    let top = match top_referenced_domains(corpus, TOP_K, config.top_scope, &config.mode) {
        Ok(t) => t,
        Err(FeatureError::CorpusTooSmall { found, .. }) => {
            top_referenced_domains(corpus, found, config.top_scope, &config.mode)?
        }
        Err(e) => return Err(e),
    };
    let referencing: BTreeSet<String> = match config.qdom_target {
        QdomTarget::Sld => corpus.referencing_slds(&config.mode),
        QdomTarget::Host => corpus
            .pages
            .iter()
            .filter(|p| p.fetch_status.is_ok())
            .map(|p| p.final_url.host().to_string())
            .collect(),
    };
    let vectors = corpus
        .images
        .iter()
        .map(|image| {
            let page = corpus
                .page(image.page_id)
                .ok_or(FeatureError::MissingPage(image.page_id))?;
            Ok(featurize(image, page, filters, &top, &referencing, config))
        })
        .collect::<Result<Vec<_>, FeatureError>>()?;
    Ok(FeatureMatrix { vectors, top })
}
