//! Domain model shared by every stage: URLs, domain comparison rules, the
//! page/image records and their on-disk layout.

mod domain;
mod records;
pub mod store;
mod url;

use std::collections::{BTreeSet, HashMap, HashSet};

use sha2::{Digest, Sha256};

pub use self::domain::{
    is_cross_domain, is_cross_origin, second_level_domain, DomainMode, SuffixTable,
};
pub use self::records::{
    ContentDigest, FetchStatus, HttpResponseMeta, ImageRecord, ImgTagRef, PageRecord, SiteRecord,
    SkipReason, SkippedImage,
};
pub use self::url::{parse_url, ParsedUrl};

use crate::error::CorpusError;
use crate::image_inspect::{self, MimeType};

/// A collected sample: sites, visited pages, qualified images and the
/// references that were skipped on the way.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub sites: Vec<SiteRecord>,
    pub pages: Vec<PageRecord>,
    pub images: Vec<ImageRecord>,
    pub skipped: Vec<SkippedImage>,
    page_index: HashMap<u64, usize>,
}

impl Corpus {
    pub fn new(
        sites: Vec<SiteRecord>,
        pages: Vec<PageRecord>,
        images: Vec<ImageRecord>,
        skipped: Vec<SkippedImage>,
    ) -> Result<Self, CorpusError> {
        let mut page_index = HashMap::with_capacity(pages.len());
        for (i, page) in pages.iter().enumerate() {
            if page_index.insert(page.id, i).is_some() {
                return Err(CorpusError::Corrupt(format!("duplicate page id {}", page.id)));
            }
            if !page.fetch_status.is_ok() && !page.image_refs.is_empty() {
                return Err(CorpusError::Corrupt(format!(
                    "page {} failed but lists image references",
                    page.id
                )));
            }
        }
        let mut seen = HashSet::with_capacity(images.len());
        for image in &images {
            let Some(&pi) = page_index.get(&image.page_id) else {
                return Err(CorpusError::Corrupt(format!(
                    "image {} references unknown page {}",
                    image.content_digest, image.page_id
                )));
            };
            if pages[pi].site_domain != image.site_domain {
                return Err(CorpusError::Corrupt(format!(
                    "image {} site {} disagrees with its page",
                    image.content_digest, image.site_domain
                )));
            }
            if !seen.insert((image.site_domain.as_str(), image.content_digest)) {
                return Err(CorpusError::Corrupt(format!(
                    "duplicate image {} for site {}",
                    image.content_digest, image.site_domain
                )));
            }
        }
        Ok(Corpus {
            sites,
            pages,
            images,
            skipped,
            page_index,
        })
    }

    pub fn page(&self, id: u64) -> Option<&PageRecord> {
        self.page_index.get(&id).map(|&i| &self.pages[i])
    }

    /// The per-site dedup keys.
    pub fn dedup_keys(&self) -> BTreeSet<(String, ContentDigest)> {
        self.images
            .iter()
            .map(|i| (i.site_domain.clone(), i.content_digest))
            .collect()
    }

    /// Second-level domains of every successfully sampled site.
    pub fn referencing_slds(&self, mode: &DomainMode) -> BTreeSet<String> {
        self.sites
            .iter()
            .filter(|s| s.sampled_ok)
            .map(|s| second_level_domain(&s.domain, mode))
            .collect()
    }

    /// SHA-256 over the serialized page and image records.
    pub fn digest(&self) -> ContentDigest {
        let mut hasher = Sha256::new();
        hasher.update(store::to_jsonl(&self.pages));
        hasher.update(store::to_jsonl(&self.images));
        ContentDigest(hasher.finalize().into())
    }
}

/// Inspects a fetched body and turns it into an [`ImageRecord`], or says why
/// it does not qualify.
pub fn qualify_image(
    page: &PageRecord,
    tag: &ImgTagRef,
    resolved_url: ParsedUrl,
    digest: ContentDigest,
    body: &[u8],
    response_meta: HttpResponseMeta,
    mode: &DomainMode,
) -> Result<ImageRecord, SkipReason> {
    let mime = image_inspect::sniff_mime(body, response_meta.content_type.as_deref());
    let dims = match &mime {
        MimeType::Svg => image_inspect::svg_dimensions(&String::from_utf8_lossy(body)),
        MimeType::Other(_) => return Err(SkipReason::Unrecognized),
        raster => Some(
            image_inspect::raster_dimensions(body, raster)
                .map_err(|error| SkipReason::ParseFailure { error })?,
        ),
    };
    let is_invisible = image_inspect::is_invisible(&mime, dims);
    Ok(ImageRecord {
        page_id: page.id,
        site_domain: page.site_domain.clone(),
        tag: tag.clone(),
        is_cross_domain: is_cross_domain(&page.final_url, &resolved_url, mode),
        is_cross_origin: is_cross_origin(&page.final_url, &resolved_url),
        resolved_url,
        content_digest: digest,
        mime,
        width: dims.map(|d| d.width),
        height: dims.map(|d| d.height),
        response_meta,
        is_invisible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image_inspect::content_digest;

    fn page() -> PageRecord {
        PageRecord {
            id: 1,
            site_domain: "a.com".into(),
            requested_url: parse_url("http://a.com/", None).unwrap(),
            final_url: parse_url("http://www.a.com/", None).unwrap(),
            fetch_status: FetchStatus::Ok,
            image_refs: vec![],
            pass_index: 1,
        }
    }

    fn tag(src: &str) -> ImgTagRef {
        ImgTagRef {
            src: src.into(),
            alt_present: false,
            style_value: None,
        }
    }

    const GIF_1X1: &[u8] = b"GIF89a\x01\x00\x01\x00\x80\x00\x00\xff\xff\xff\x00\x00\x00!\xf9\x04\x01\x00\x00\x00\x00,\x00\x00\x00\x00\x01\x00\x01\x00\x00\x02\x02D\x01\x00;";

    #[test]
    fn qualifies_cross_domain_pixel() {
        let url = parse_url("http://t.net/p.gif", None).unwrap();
        let rec = qualify_image(
            &page(),
            &tag("http://t.net/p.gif"),
            url,
            content_digest(GIF_1X1),
            GIF_1X1,
            HttpResponseMeta::default(),
            &DomainMode::Naive,
        )
        .unwrap();
        assert_eq!(rec.mime, MimeType::Gif);
        assert!(rec.is_invisible && rec.is_cross_domain && rec.is_cross_origin);
        assert_eq!((rec.width, rec.height), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn unrecognized_and_truncated_bodies_skip() {
        let url = parse_url("http://t.net/p", None).unwrap();
        let html = b"<html>not an image</html>";
        let err = qualify_image(
            &page(),
            &tag("p"),
            url.clone(),
            content_digest(html),
            html,
            HttpResponseMeta::default(),
            &DomainMode::Naive,
        )
        .unwrap_err();
        assert_eq!(err, SkipReason::Unrecognized);
        let err = qualify_image(
            &page(),
            &tag("p"),
            url,
            content_digest(&GIF_1X1[..8]),
            &GIF_1X1[..8],
            HttpResponseMeta::default(),
            &DomainMode::Naive,
        )
        .unwrap_err();
        assert!(err.is_parse_failure());
    }

    #[test]
    fn corpus_rejects_duplicate_site_digest() {
        let p = page();
        let url = parse_url("http://t.net/p.gif", None).unwrap();
        let rec = qualify_image(
            &p,
            &tag("x"),
            url,
            content_digest(GIF_1X1),
            GIF_1X1,
            HttpResponseMeta::default(),
            &DomainMode::Naive,
        )
        .unwrap();
        let err = Corpus::new(vec![], vec![p.clone()], vec![rec.clone(), rec.clone()], vec![]);
        assert!(matches!(err, Err(CorpusError::Corrupt(_))));
        let ok = Corpus::new(vec![], vec![p], vec![rec], vec![]).unwrap();
        assert_eq!(ok.dedup_keys().len(), 1);
    }
}
