//! Random corpora built through the real image qualification path.

use std::collections::HashSet;

use beacon_core::corpus::{
    parse_url, qualify_image, Corpus, DomainMode, FetchStatus, HttpResponseMeta, ImgTagRef,
    PageRecord, SiteRecord,
};
use beacon_core::image_inspect::content_digest;
use proptest::prelude::*;

pub const SITES: [&str; 4] = ["site0.com", "shop.site1.org", "site2.net", "site3.io"];
pub const FOREIGN_HOSTS: [&str; 5] = ["t.net", "px.u.org", "cdn.site0.com", "v.io", "10.0.0.7"];

/// A GIF whose logical screen is `w` x `h`, made unique by `salt`.
pub fn gif(w: u16, h: u16, salt: u32) -> Vec<u8> {
    let mut b = b"GIF89a".to_vec();
    b.extend_from_slice(&w.to_le_bytes());
    b.extend_from_slice(&h.to_le_bytes());
    b.extend_from_slice(&[0, 0, 0, 0x3b]);
    b.extend_from_slice(&salt.to_le_bytes());
    b
}

#[derive(Clone, Debug)]
pub struct ImgSpec {
    pub site: usize,
    /// Index into the site's own host followed by [`FOREIGN_HOSTS`].
    pub host: usize,
    pub salt: u32,
    pub w: u16,
    pub h: u16,
    pub query: Option<String>,
    pub cookie: bool,
    pub cache_control: Option<String>,
    pub alt: bool,
}

pub fn img_spec() -> impl Strategy<Value = ImgSpec> {
    (
        0..SITES.len(),
        0..=FOREIGN_HOSTS.len(),
        0u32..40,
        prop_oneof![Just(1u16), 1u16..400],
        prop_oneof![Just(1u16), 1u16..400],
        proptest::option::of("[a-z0-9=&%.]{0,12}"),
        any::<bool>(),
        proptest::option::of(prop_oneof![
            Just("no-cache".to_string()),
            Just("max-age=60".to_string()),
            "[a-z-]{1,8}(=[0-9]{1,4})?"
        ]),
        any::<bool>(),
    )
        .prop_map(|(site, host, salt, w, h, query, cookie, cache_control, alt)| ImgSpec {
            site,
            host,
            salt,
            w,
            h,
            query,
            cookie,
            cache_control,
            alt,
        })
}

/// Builds a corpus through the real qualification path. Sites whose bit in
/// `failed` is set have a single timed-out page.
pub fn build_corpus(specs: &[ImgSpec], failed: u8, mode: &DomainMode) -> Corpus {
    let mut sites = Vec::new();
    let mut pages = Vec::new();
    for (i, domain) in SITES.iter().enumerate() {
        let ok = failed & (1 << i) == 0;
        sites.push(SiteRecord {
            domain: domain.to_string(),
            category: Some(if i % 2 == 0 { "news" } else { "shopping" }.to_string()),
            sampled_ok: ok,
            passes_attempted: 1,
            successful_pass: ok.then_some(1),
        });
        let url = parse_url(&format!("http://{domain}/"), None).unwrap();
        pages.push(PageRecord {
            id: i as u64 + 1,
            site_domain: domain.to_string(),
            requested_url: url.clone(),
            final_url: url,
            fetch_status: if ok { FetchStatus::Ok } else { FetchStatus::Timeout },
            image_refs: Vec::new(),
            pass_index: 1,
        });
    }
    let mut images = Vec::new();
    let mut seen = HashSet::new();
    for s in specs {
        if failed & (1 << s.site) != 0 {
            continue;
        }
        let host = if s.host == 0 { SITES[s.site] } else { FOREIGN_HOSTS[s.host - 1] };
        let mut raw = format!("http://{host}/img/{}.gif", s.salt);
        if let Some(q) = &s.query {
            raw.push('?');
            raw.push_str(q);
        }
        let Ok(url) = parse_url(&raw, None) else { continue };
        let body = gif(s.w, s.h, s.salt);
        let digest = content_digest(&body);
        if !seen.insert((s.site, digest)) {
            continue;
        }
        let tag = ImgTagRef {
            src: raw.clone(),
            alt_present: s.alt,
            style_value: None,
        };
        let mut headers = vec![("Content-Type", "image/gif")];
        if s.cookie {
            headers.push(("Set-Cookie", "id=1"));
        }
        if let Some(cc) = &s.cache_control {
            headers.push(("Cache-Control", cc.as_str()));
        }
        let meta = HttpResponseMeta::from_headers(200, headers);
        let page = &mut pages[s.site];
        page.image_refs.push(tag.clone());
        let record = qualify_image(page, &tag, url, digest, &body, meta, mode).unwrap();
        images.push(record);
    }
    Corpus::new(sites, pages, images, Vec::new()).unwrap()
}

pub fn corpus_strategy() -> impl Strategy<Value = (Vec<ImgSpec>, u8)> {
    (proptest::collection::vec(img_spec(), 0..60), 0u8..16)
}
