//! Site crawling, multi-pass merge and DOM snapshot ingestion.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use beacon_core::corpus::{
    parse_url, qualify_image, second_level_domain, store, ContentDigest, Corpus, DomainMode,
    FetchStatus, HttpResponseMeta, ImageRecord, ImgTagRef, PageRecord, ParsedUrl, SiteRecord,
    SkipReason, SkippedImage,
};
use beacon_core::html_extract::{extract, frontier};
use beacon_core::image_inspect::content_digest;

use crate::config::{CrawlConfig, DomainEntry};
use crate::error::{CrawlError, FetchError};
use crate::fetch::{FetchResult, Fetcher};
use crate::robots::RobotsCache;

/// One `<img>` reference after resolution and fetching.
#[derive(Clone, Debug)]
pub enum ImageOutcome {
    Record { record: ImageRecord, body: Vec<u8> },
    Skipped(SkippedImage),
}

/// A visited page with the outcome of each of its image references.
#[derive(Clone, Debug)]
pub struct PageVisit {
    pub page: PageRecord,
    pub images: Vec<ImageOutcome>,
}

/// Per-site result of one pass.
#[derive(Clone, Debug)]
pub struct SiteVisit {
    pub domain: String,
    pub pass: u8,
    pub pages: Vec<PageVisit>,
}

impl SiteVisit {
    /// The primary page was fetched successfully.
    pub fn succeeded(&self) -> bool {
        self.pages.first().is_some_and(|p| p.page.fetch_status.is_ok())
    }
}

/// A merged corpus plus the image bodies to store alongside it.
#[derive(Debug)]
pub struct CrawlOutput {
    pub corpus: Corpus,
    pub blobs: BTreeMap<ContentDigest, Vec<u8>>,
}

impl CrawlOutput {
    /// Writes the corpus atomically: nothing appears at `dir` on failure.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CrawlError> {
        let staging = store::Staging::begin(dir)?;
        for (digest, body) in &self.blobs {
            staging.put_blob(digest, body)?;
        }
        Ok(staging.commit(&self.corpus)?)
    }
}

fn charset_of(content_type: Option<&str>) -> Option<String> {
    content_type?
        .split(';')
        .skip(1)
        .filter_map(|p| p.split_once('='))
        .find(|(k, _)| k.trim().eq_ignore_ascii_case("charset"))
        .map(|(_, v)| v.trim().trim_matches('"').to_string())
}

fn meta_of(r: &FetchResult) -> HttpResponseMeta {
    HttpResponseMeta::from_headers(r.status, r.headers.iter().map(|(k, v)| (k.as_str(), v.as_str())))
}

fn status_of(r: &Result<FetchResult, FetchError>) -> FetchStatus {
    match r {
        Ok(f) if f.is_success() => FetchStatus::Ok,
        Ok(f) => FetchStatus::Error {
            code: format!("http_{}", f.status),
        },
        Err(FetchError::Timeout) => FetchStatus::Timeout,
        Err(e) => FetchStatus::Error {
            code: e.code().to_string(),
        },
    }
}

pub struct Crawler {
    config: CrawlConfig,
    mode: DomainMode,
    fetcher: Fetcher,
    robots: RobotsCache,
    /// Successful image fetches, reused by later passes.
    image_cache: Mutex<HashMap<(String, String), FetchResult>>,
}

impl Crawler {
    pub fn new(config: CrawlConfig) -> Result<Self, CrawlError> {
        config.validate()?;
        Ok(Crawler {
            mode: config.mode.domain_mode(),
            fetcher: Fetcher::new(&config)?,
            robots: RobotsCache::new(&config.user_agent),
            image_cache: Mutex::new(HashMap::new()),
            config,
        })
    }

    pub fn fetcher(&self) -> &Fetcher {
        &self.fetcher
    }

    fn page_allowed(&self, url: &ParsedUrl) -> bool {
        !self.config.respect_robots || self.robots.is_allowed(&self.fetcher, url)
    }

    /// Crawls one site: primary page, then same-site links up to the
    /// configured depth.
    pub fn crawl_site(&self, domain: &str, pass: u8) -> SiteVisit {
        let site_sld = second_level_domain(domain, &self.mode);
        let mut pages = Vec::new();
        let mut fetched_images: HashMap<String, Result<FetchResult, FetchError>> = HashMap::new();
        let primary = match parse_url(&format!("{}://{domain}/", self.config.scheme), None) {
            Ok(u) => u,
            Err(_) => {
                return SiteVisit {
                    domain: domain.to_string(),
                    pass,
                    pages,
                }
            }
        };
        let mut seen: HashSet<String> = HashSet::from([primary.to_string()]);
        let mut level = vec![primary];
        for depth in 0..=self.config.depth {
            let mut next = Vec::new();
            for requested in level {
                if !self.page_allowed(&requested) {
                    if depth == 0 {
                        pages.push(PageVisit {
                            page: PageRecord {
                                id: 0,
                                site_domain: domain.to_string(),
                                final_url: requested.clone(),
                                requested_url: requested,
                                fetch_status: FetchStatus::Error {
                                    code: "robots_disallowed".into(),
                                },
                                image_refs: Vec::new(),
                                pass_index: pass,
                            },
                            images: Vec::new(),
                        });
                    }
                    continue;
                }
                let result = self.fetcher.fetch(&requested);
                let status = status_of(&result);
                let final_url = match &result {
                    Ok(r) => r.final_url.clone(),
                    Err(_) => requested.clone(),
                };
                seen.insert(final_url.to_string());
                let extracted = match (&result, status.is_ok()) {
                    (Ok(r), true) => {
                        let charset = charset_of(r.header("content-type"));
                        Some(extract(r.body.as_deref().unwrap_or_default(), charset.as_deref()))
                    }
                    _ => None,
                };
                let page = PageRecord {
                    id: 0,
                    site_domain: domain.to_string(),
                    requested_url: requested,
                    final_url,
                    fetch_status: status,
                    image_refs: extracted.as_ref().map(|e| e.img_refs.clone()).unwrap_or_default(),
                    pass_index: pass,
                };
                if let Some(e) = &extracted {
                    if depth < self.config.depth {
                        for link in frontier(e, &page.final_url, &self.mode) {
                            let same_site = second_level_domain(link.host(), &self.mode) == site_sld;
                            if same_site && seen.insert(link.to_string()) {
                                next.push(link);
                            }
                        }
                    }
                }
                let images = self.fetch_images(&page, &mut fetched_images);
                pages.push(PageVisit { page, images });
            }
            level = next;
        }
        SiteVisit {
            domain: domain.to_string(),
            pass,
            pages,
        }
    }

    fn fetch_image(&self, site: &str, url: &ParsedUrl) -> Result<FetchResult, FetchError> {
        let key = (site.to_string(), url.to_string());
        if let Some(hit) = self.image_cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let result = self.fetcher.fetch(url)?;
        if result.is_success() {
            self.image_cache.lock().unwrap().insert(key, result.clone());
        }
        Ok(result)
    }

    /// Resolves and fetches every image reference of `page`. `fetched`
    /// holds this site's responses so repeated URLs are requested once.
    pub fn fetch_images(
        &self,
        page: &PageRecord,
        fetched: &mut HashMap<String, Result<FetchResult, FetchError>>,
    ) -> Vec<ImageOutcome> {
        let skip = |tag: &ImgTagRef, url: Option<ParsedUrl>, digest, reason| {
            ImageOutcome::Skipped(SkippedImage {
                page_id: page.id,
                site_domain: page.site_domain.clone(),
                src: tag.src.clone(),
                resolved_url: url,
                content_digest: digest,
                reason,
            })
        };
        let mut out = Vec::with_capacity(page.image_refs.len());
        for tag in &page.image_refs {
            let src = tag.src.trim();
            if src.is_empty() {
                out.push(skip(tag, None, None, SkipReason::EmptySrc));
                continue;
            }
            if src.len() >= 5 && src[..5].eq_ignore_ascii_case("data:") {
                out.push(skip(tag, None, None, SkipReason::DataUri));
                continue;
            }
            let url = match parse_url(src, Some(&page.final_url)) {
                Ok(u) => u,
                Err(_) => {
                    out.push(skip(tag, None, None, SkipReason::MalformedUrl));
                    continue;
                }
            };
            if !url.is_http() {
                let scheme = url.scheme().to_string();
                out.push(skip(tag, Some(url), None, SkipReason::UnsupportedScheme { scheme }));
                continue;
            }
            let result = fetched
                .entry(url.to_string())
                .or_insert_with(|| self.fetch_image(&page.site_domain, &url))
                .clone();
            let response = match result {
                Err(e) => {
                    let code = e.code().to_string();
                    out.push(skip(tag, Some(url), None, SkipReason::FetchFailed { code }));
                    continue;
                }
                Ok(r) if !r.is_success() => {
                    out.push(skip(tag, Some(url), None, SkipReason::HttpStatus { status: r.status }));
                    continue;
                }
                Ok(r) => r,
            };
            let body = response.body.clone().unwrap_or_default();
            let digest = content_digest(&body);
            // The image URL is the one in the tag; redirects only change where the bytes came from.
            match qualify_image(page, tag, url.clone(), digest, &body, meta_of(&response), &self.mode) {
                Ok(record) => out.push(ImageOutcome::Record { record, body }),
                Err(reason) => out.push(skip(tag, Some(url), Some(digest), reason)),
            }
        }
        out
    }

    /// One pass over every listed site, `site_parallelism` at a time.
    pub fn run_pass(&self, pass: u8) -> Vec<SiteVisit> {
        let sites = &self.config.domain_list;
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<(usize, SiteVisit)>> = Mutex::new(Vec::with_capacity(sites.len()));
        let workers = self.config.site_parallelism.min(sites.len()).max(1);
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(entry) = sites.get(i) else { break };
                    let visit = self.crawl_site(&entry.domain, pass);
                    results.lock().unwrap().push((i, visit));
                });
            }
        });
        let mut results = results.into_inner().unwrap();
        results.sort_by_key(|(i, _)| *i);
        results.into_iter().map(|(_, v)| v).collect()
    }

    /// Runs every pass and merges the results into one corpus.
    pub fn run(&self) -> Result<CrawlOutput, CrawlError> {
        let mut by_pass = Vec::new();
        for pass in 1..=self.config.passes {
            by_pass.push(self.run_pass(pass));
        }
        merge(&self.config.domain_list, self.config.passes, by_pass)
    }
}

/// Combines passes. Per site, a page is keyed by its requested URL and the
/// first successful visit wins; images are then deduplicated by digest and
/// skips by `src`. Page ids follow site order, then page order.
pub fn merge(
    sites: &[DomainEntry],
    passes: u8,
    by_pass: Vec<Vec<SiteVisit>>,
) -> Result<CrawlOutput, CrawlError> {
    let mut per_site: Vec<Vec<PageVisit>> = vec![Vec::new(); sites.len()];
    let mut site_records = Vec::with_capacity(sites.len());
    let mut first_ok: Vec<Option<u8>> = vec![None; sites.len()];
    for visits in by_pass {
        for (i, visit) in visits.into_iter().enumerate() {
            if visit.succeeded() && first_ok[i].is_none() {
                first_ok[i] = Some(visit.pass);
            }
            let kept = &mut per_site[i];
            for pv in visit.pages {
                let key = pv.page.requested_url.to_string();
                match kept.iter_mut().find(|k| k.page.requested_url.to_string() == key) {
                    None => kept.push(pv),
                    Some(k) if !k.page.fetch_status.is_ok() && pv.page.fetch_status.is_ok() => *k = pv,
                    Some(_) => {}
                }
            }
        }
    }
    let mut pages = Vec::new();
    let mut images = Vec::new();
    let mut skipped = Vec::new();
    let mut blobs = BTreeMap::new();
    let mut next_id = 1u64;
    for (i, entry) in sites.iter().enumerate() {
        site_records.push(SiteRecord {
            domain: entry.domain.clone(),
            category: entry.category.clone(),
            sampled_ok: first_ok[i].is_some(),
            passes_attempted: passes,
            successful_pass: first_ok[i],
        });
        let mut digests = HashSet::new();
        let mut srcs = HashSet::new();
        for mut pv in std::mem::take(&mut per_site[i]) {
            pv.page.id = next_id;
            next_id += 1;
            for outcome in pv.images {
                match outcome {
                    ImageOutcome::Record { mut record, body } => {
                        if digests.insert(record.content_digest) {
                            record.page_id = pv.page.id;
                            blobs.entry(record.content_digest).or_insert(body);
                            images.push(record);
                        }
                    }
                    ImageOutcome::Skipped(mut s) => {
                        if srcs.insert(s.src.clone()) {
                            s.page_id = pv.page.id;
                            skipped.push(s);
                        }
                    }
                }
            }
            pages.push(pv.page);
        }
    }
    let corpus = Corpus::new(site_records, pages, images, skipped)?;
    Ok(CrawlOutput { corpus, blobs })
}

/// Builds a corpus from pre-rendered pages instead of fetching them.
///
/// Layout: `<dir>/<site>/<page-id>.html` and `<dir>/meta.json`, an object
/// mapping `<page-id>` (or `<site>/<page-id>`) to the page's final URL.
/// Images are still fetched.
pub fn ingest(crawler: &Crawler, dir: &Path) -> Result<CrawlOutput, CrawlError> {
    let err = |path: &Path, message: String| CrawlError::Snapshot {
        path: path.to_path_buf(),
        message,
    };
    let meta_path = dir.join("meta.json");
    let meta_text = std::fs::read_to_string(&meta_path).map_err(|e| err(&meta_path, e.to_string()))?;
    let meta: BTreeMap<String, String> =
        serde_json::from_str(&meta_text).map_err(|e| err(&meta_path, e.to_string()))?;

    let listed: HashMap<&str, &DomainEntry> = crawler
        .config
        .domain_list
        .iter()
        .map(|e| (e.domain.as_str(), e))
        .collect();
    let mut site_dirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| err(dir, e.to_string()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    site_dirs.sort();

    let mut sites = Vec::new();
    let mut visits = Vec::new();
    for site_dir in site_dirs {
        let site = site_dir.file_name().unwrap().to_string_lossy().to_ascii_lowercase();
        let mut files: Vec<PathBuf> = std::fs::read_dir(&site_dir)
            .map_err(|e| err(&site_dir, e.to_string()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "html"))
            .collect();
        files.sort();
        let mut fetched = HashMap::new();
        let mut pages = Vec::new();
        for file in files {
            let stem = file.file_stem().unwrap().to_string_lossy().into_owned();
            let raw_url = meta
                .get(&format!("{site}/{stem}"))
                .or_else(|| meta.get(&stem))
                .ok_or_else(|| err(&file, format!("no meta.json entry for page {stem}")))?;
            let url = parse_url(raw_url, None).map_err(|e| err(&file, e.to_string()))?;
            let html = std::fs::read(&file).map_err(|e| err(&file, e.to_string()))?;
            let page = PageRecord {
                id: 0,
                site_domain: site.clone(),
                requested_url: url.clone(),
                final_url: url,
                fetch_status: FetchStatus::Ok,
                image_refs: extract(&html, None).img_refs,
                pass_index: 1,
            };
            let images = crawler.fetch_images(&page, &mut fetched);
            pages.push(PageVisit { page, images });
        }
        sites.push(listed.get(site.as_str()).map_or_else(
            || DomainEntry {
                domain: site.clone(),
                category: None,
            },
            |e| (*e).clone(),
        ));
        visits.push(SiteVisit {
            domain: site,
            pass: 1,
            pages,
        });
    }
    merge(&sites, 1, vec![visits])
}
