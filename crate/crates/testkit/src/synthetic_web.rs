//! A deterministic web of 20 synthetic sites (plus one dead listing) served
//! by [`FixtureServer`](crate::fixture_server::FixtureServer).
//!
//! The manifest is tallied from the construction plan, never from a crawl.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::Duration;

use beacon_core::report::SampleSummary;
use serde::{Deserialize, Serialize};

use crate::fixture_server::{Response, Route, Routes};
use crate::imagegen;

pub const SITE_COUNT: usize = 20;
pub const DEAD_SITE: &str = "dead-site.test";
pub const FLAKY_SITE: usize = 7;
pub const ROBOTS_SITE: usize = 5;
/// Delay of the flaky primary page on its first request.
pub const FLAKY_DELAY: Duration = Duration::from_millis(2500);
pub const CATEGORIES: [&str; 4] = ["news", "shopping", "sports", "technology"];
/// Tracker pixel hosts and how many sites embed each.
pub const TRACKERS: [(&str, usize); 6] = [
    ("px.trk-alpha.test", 10),
    ("b.trk-bravo.test", 7),
    ("t.trk-charlie.test", 5),
    ("c.trk-delta.test", 4),
    ("i.trk-echo.test", 3),
    ("x.trk-foxtrot.test", 1),
];
pub const IMAGES_PER_SITE: usize = 30;
pub const EXTERNAL_LINK_HOST: &str = "elsewhere.test";

pub fn site_domain(i: usize) -> String {
    format!("site{i:02}.test")
}

pub fn manifest_path() -> PathBuf {
    crate::data_dir().join("fixture_manifest.json")
}

/// Relation of an image host to the page that references it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HostClass {
    SameHost,
    SameSiteOtherHost,
    ThirdParty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannedImage {
    pub site: String,
    pub page: String,
    pub url: String,
    pub mime: String,
    pub width: f64,
    pub height: f64,
    pub invisible: bool,
    pub class: HostClass,
}

impl PlannedImage {
    pub fn cross_domain(&self) -> bool {
        self.class == HostClass::ThirdParty
    }

    pub fn cross_origin(&self) -> bool {
        self.class != HostClass::SameHost
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannedSkip {
    DataUri,
    EmptySrc,
    ParseFailure,
    HttpStatus,
    Unrecognized,
    UnsupportedScheme,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub sites: usize,
    pub sites_ok: usize,
    pub images: usize,
    pub one_by_one_cross_domain: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureManifest {
    pub domains_listed: usize,
    pub domains_sampled_ok: usize,
    pub pages: usize,
    pub images_total: usize,
    pub cross_domain_images: usize,
    pub cross_origin_images: usize,
    pub one_by_one_images: usize,
    pub one_by_one_cross_domain: usize,
    pub parse_failures: usize,
    pub skipped: usize,
    pub mime: BTreeMap<String, usize>,
    pub categories: BTreeMap<String, CategoryCount>,
    pub top_referenced: Vec<(String, usize)>,
    /// Every host a crawler may legitimately contact.
    pub allowed_hosts: BTreeSet<String>,
    /// Hosts linked from pages that must never be contacted.
    pub forbidden_hosts: BTreeSet<String>,
    /// Pages ruled out by robots.txt, as `host/path`.
    pub disallowed_pages: BTreeSet<String>,
    pub images: Vec<PlannedImage>,
}

pub struct SyntheticWeb {
    pub routes: Routes,
    /// `domain,category` CSV with header.
    pub domain_list: String,
    pub pages: Vec<String>,
    pub skips: Vec<(String, PlannedSkip)>,
    pub manifest: FixtureManifest,
}

/// One `<img>` reference and, when it is served, what the server returns.
struct Img {
    src: String,
    served: Option<(String, String, Response)>,
    hidden: bool,
}

impl Img {
    fn new(src: impl Into<String>) -> Self {
        Img {
            src: src.into(),
            served: None,
            hidden: false,
        }
    }

    fn serve(mut self, host: &str, path: &str, response: Response) -> Self {
        self.served = Some((host.to_string(), path.to_string(), response));
        self
    }

    fn url(&self) -> String {
        let (host, path, _) = self.served.as_ref().expect("served image");
        format!("http://{host}{path}")
    }
}

struct Record {
    img: Img,
    mime: &'static str,
    width: f64,
    height: f64,
    class: HostClass,
}

impl Record {
    fn invisible(&self) -> bool {
        self.width == 1.0 && self.height == 1.0
    }
}

enum Ref {
    /// Yields exactly one image record for the site.
    Record(Record),
    /// A reference that yields nothing new: a repeat or a skip.
    Other(Img),
}

struct Page {
    host: String,
    path: String,
    title: &'static str,
    links: Vec<String>,
    iframes: Vec<String>,
    imgs: Vec<Img>,
    delay: Option<(Duration, usize)>,
}

impl Page {
    fn new(host: &str, path: &str, title: &'static str) -> Self {
        Page {
            host: host.into(),
            path: path.into(),
            title,
            links: Vec::new(),
            iframes: Vec::new(),
            imgs: Vec::new(),
            delay: None,
        }
    }

    fn url(&self) -> String {
        format!("http://{}{}", self.host, self.path)
    }

    fn html(&self) -> String {
        let mut s = format!(
            "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>{}</title>\n<script>var s = '<img src=\"/never.gif\">';</script></head>\n<body>\n",
            self.title
        );
        for l in &self.links {
            s.push_str(&format!("<a href=\"{l}\">link</a>\n"));
        }
        for f in &self.iframes {
            s.push_str(&format!("<iframe src=\"{f}\"></iframe>\n"));
        }
        for (n, img) in self.imgs.iter().enumerate() {
            let src = img.src.replace('&', "&amp;");
            let style = if img.hidden { " style=\"display:none\"" } else { "" };
            // Vary the tag spelling a little.
            match n % 3 {
                0 => s.push_str(&format!("<img src=\"{src}\"{style}>\n")),
                1 => s.push_str(&format!("<IMG alt='' SRC='{src}'{style} />\n")),
                _ if src.is_empty() || src.contains(['"', '\'', ' ', '>']) => {
                    s.push_str(&format!("<p><img width=1 src=\"{src}\"{style}></p>\n"))
                }
                _ => s.push_str(&format!("<p><img width=1 src={src}{style}></p>\n")),
            }
        }
        s.push_str("<!-- <img src=\"/commented-out.gif\"> -->\n</body></html>\n");
        s
    }
}

fn cacheable(salt: u64) -> Response {
    Response::new(200, "", Vec::new())
        .header("Cache-Control", "public, max-age=86400")
        .header("ETag", &format!("\"v{salt}\""))
}

fn image_response(content_type: &str, body: Vec<u8>, base: Response) -> Response {
    let mut r = Response::new(200, content_type, body);
    r.headers.extend(base.headers.into_iter().filter(|(k, _)| k != "Content-Type"));
    r
}

/// Sites that embed tracker `t`.
pub fn tracker_sites(t: usize) -> Vec<usize> {
    (0..TRACKERS[t].1).map(|j| (t * 7 + j * 3) % SITE_COUNT).collect()
}

struct Salt(u64);

impl Salt {
    fn next(&mut self) -> u64 {
        self.0 += 1;
        self.0
    }
}

/// A same-host or cross-host fill image, cycling through six kinds.
fn fill(k: usize, site: usize, domain: &str, page_host: &str, salt: u64) -> Record {
    let same_site = page_host == domain || page_host.ends_with(&format!(".{domain}"));
    match k % 6 {
        0 => {
            let path = format!("/img/photo{k}.jpg");
            Record {
                img: Img::new(path.clone()).serve(page_host, &path, image_response("image/jpeg", imagegen::jpeg(640, 480, salt), cacheable(salt))),
                mime: "image/jpeg",
                width: 640.0,
                height: 480.0,
                class: HostClass::SameHost,
            }
        }
        1 => {
            let host = format!("cdn.{domain}");
            let path = format!("/thumb/{k}.png");
            let base = Response::new(200, "", Vec::new()).header("Cache-Control", "max-age=31536000");
            Record {
                img: Img::new(format!("http://{host}{path}")).serve(&host, &path, image_response("image/png", imagegen::png(120, 90, salt), base)),
                mime: "image/png",
                width: 120.0,
                height: 90.0,
                class: if same_site { HostClass::SameSiteOtherHost } else { HostClass::ThirdParty },
            }
        }
        2 => {
            let host = format!("img.adnet{}.test", site % 3);
            let path = format!("/banner/{site}-{k}.jpg");
            let base = Response::new(200, "", Vec::new()).header("Set-Cookie", "ad=1");
            Record {
                img: Img::new(format!("http://{host}{path}")).serve(&host, &path, image_response("image/jpeg", imagegen::jpeg(300, 250, salt), base)),
                mime: "image/jpeg",
                width: 300.0,
                height: 250.0,
                class: HostClass::ThirdParty,
            }
        }
        3 => {
            // Relative reference without a leading slash.
            let path = format!("/icons/i{k}.gif");
            Record {
                img: Img::new(format!("icons/i{k}.gif")).serve(page_host, &path, image_response("image/gif", imagegen::gif(16, 16, salt), cacheable(salt))),
                mime: "image/gif",
                width: 16.0,
                height: 16.0,
                class: HostClass::SameHost,
            }
        }
        4 => {
            let host = "static.picshare.test";
            let path = format!("/{site}/{k}.webp");
            Record {
                img: Img::new(format!("//{host}{path}")).serve(host, &path, image_response("image/webp", imagegen::webp(200, 150, salt), cacheable(salt))),
                mime: "image/webp",
                width: 200.0,
                height: 150.0,
                class: HostClass::ThirdParty,
            }
        }
        _ => {
            let path = format!("/icons/s{k}.svg");
            Record {
                img: Img::new(path.clone()).serve(page_host, &path, image_response("image/svg+xml", imagegen::svg("24", "24px", salt), cacheable(salt))),
                mime: "image/svg+xml",
                width: 24.0,
                height: 24.0,
                class: HostClass::SameHost,
            }
        }
    }
}

/// The reference on site `i` that is expected to be skipped, if any.
fn skip_for(i: usize, host: &str) -> Option<(Img, PlannedSkip)> {
    let served = |src: &str, ct: &str, body: Vec<u8>| Img::new(src).serve(host, src, Response::new(200, ct, body));
    Some(match i {
        10 => (Img::new("data:image/gif;base64,R0lGODlhAQABAAAAACw="), PlannedSkip::DataUri),
        11 => (Img::new(""), PlannedSkip::EmptySrc),
        12 => {
            let full = imagegen::png(50, 50, 1);
            (served("/img/broken.png", "image/png", full[..20].to_vec()), PlannedSkip::ParseFailure)
        }
        13 => (served("/img/zero.gif", "image/gif", imagegen::gif(0, 5, 2)), PlannedSkip::ParseFailure),
        14 => (Img::new("/img/missing.jpg"), PlannedSkip::HttpStatus),
        15 => (
            served("/img/not-an-image.png", "text/html", b"<html><body>moved</body></html>".to_vec()),
            PlannedSkip::Unrecognized,
        ),
        16 => (Img::new("ftp://files.site16.test/x.gif"), PlannedSkip::UnsupportedScheme),
        17 => {
            let full = imagegen::jpeg(64, 64, 3);
            (served("/img/cut.jpg", "image/jpeg", full[..24].to_vec()), PlannedSkip::ParseFailure)
        }
        18 => (Img::new("http://gone.nowhere.test/x.gif"), PlannedSkip::HttpStatus),
        _ => return None,
    })
}

pub fn build() -> SyntheticWeb {
    let mut routes = Routes::default();
    let mut allowed = BTreeSet::new();
    let mut images = Vec::new();
    let mut skips = Vec::new();
    let mut page_urls = Vec::new();
    let mut salt = Salt(0);
    let mut domain_list = String::from("domain,category\n");

    for i in 0..SITE_COUNT {
        let d = site_domain(i);
        domain_list.push_str(&format!("{d},{}\n", CATEGORIES[i % CATEGORIES.len()]));
        allowed.insert(d.clone());
        let host = if i == 2 { format!("www.{d}") } else { d.clone() };
        if i == 2 {
            routes.add(&d, "/", Response::redirect(301, &format!("http://{host}/")));
        }

        let mut primary = Page::new(&host, "/", "home");
        primary.links = vec![
            "/".into(),
            "/a.html".into(),
            "./b.html".into(),
            "a.html#top".into(),
            format!("http://{EXTERNAL_LINK_HOST}/page"),
            format!("https://secure.{EXTERNAL_LINK_HOST}/"),
            "mailto:info@example.test".into(),
            "javascript:void(0)".into(),
        ];
        if i == FLAKY_SITE {
            primary.delay = Some((FLAKY_DELAY, 1));
        }
        let mut page_a = Page::new(&host, "/a.html", "a");
        page_a.links = vec!["/".into(), "/b.html".into(), "/deep.html".into()];
        let page_b = Page::new(&host, "/b.html", "b");
        let mut pages = vec![primary, page_a, page_b];

        match i {
            3 => {
                pages[0].links.push("/partner".into());
                routes.add(&host, "/partner", Response::redirect(302, "http://landing.partner.test/l.html"));
                pages.push(Page::new("landing.partner.test", "/l.html", "partner"));
            }
            4 => {
                pages[0].links.push("http://blog.site04.test/".into());
                pages.push(Page::new("blog.site04.test", "/", "blog"));
            }
            9 => {
                pages[0].iframes.push("/widget.html".into());
                pages.push(Page::new(&host, "/widget.html", "widget"));
            }
            ROBOTS_SITE => {
                pages[0].links.push("/private/secret.html".into());
                routes.add(&host, "/robots.txt", Response::new(200, "text/plain", "User-agent: *\nDisallow: /private/\n"));
                let s = salt.next();
                routes.add(&host, "/private/img.gif", Response::new(200, "image/gif", imagegen::gif(1, 1, s)));
                routes.add(&host, "/private/secret.html", Response::html("<img src=\"/private/img.gif\">"));
            }
            _ => {}
        }
        // Two links deep; never reached at depth 1.
        routes.add(&host, "/deep.html", Response::html("<img src=\"/deep.gif\">"));

        // (page slot, reference). Slots 0..3 are home, a, b; later slots are extra pages.
        let mut refs: Vec<(usize, Ref)> = Vec::new();
        for (t, (thost, _)) in TRACKERS.iter().enumerate() {
            if !tracker_sites(t).contains(&i) {
                continue;
            }
            // Bytes are shared by every site embedding the tracker.
            let tsalt = 9000 + t as u64;
            let path = format!("/p.gif?sid={d}&r={i}");
            let (body, mime) = match t {
                3 => (imagegen::png(1, 1, tsalt), "image/png"),
                5 => (imagegen::svg("1", "1", tsalt), "image/svg+xml"),
                _ => (imagegen::gif(1, 1, tsalt), "image/gif"),
            };
            let base = Response::new(200, "", Vec::new())
                .header("Cache-Control", "no-cache, no-store, must-revalidate")
                .header("Set-Cookie", &format!("uid={i}; Path=/"));
            let mut img = Img::new(format!("http://{thost}{path}")).serve(thost, &path, image_response(mime, body, base));
            img.hidden = t % 2 == 0;
            refs.push((t % 3, Ref::Record(Record { img, mime, width: 1.0, height: 1.0, class: HostClass::ThirdParty })));
        }
        if i < 8 {
            let s = salt.next();
            let img = Img::new("/img/spacer.gif").serve(&host, "/img/spacer.gif", image_response("image/gif", imagegen::gif(1, 1, s), cacheable(s)));
            refs.push((0, Ref::Record(Record { img, mime: "image/gif", width: 1.0, height: 1.0, class: HostClass::SameHost })));
        }
        if i == 2 {
            let s = salt.next();
            let img = Img::new(format!("http://{d}/px.gif")).serve(&d, "/px.gif", Response::new(200, "image/gif", imagegen::gif(1, 1, s)));
            refs.push((0, Ref::Record(Record { img, mime: "image/gif", width: 1.0, height: 1.0, class: HostClass::SameSiteOtherHost })));
        }
        if i == 3 {
            let h = "img.partner.test";
            let s = salt.next();
            let img = Img::new(format!("http://{h}/s.gif")).serve(h, "/s.gif", Response::new(200, "image/gif", imagegen::gif(1, 1, s)));
            refs.push((3, Ref::Record(Record { img, mime: "image/gif", width: 1.0, height: 1.0, class: HostClass::SameSiteOtherHost })));
            let s = salt.next();
            let img = Img::new(format!("http://{h}/hero.jpg")).serve(h, "/hero.jpg", image_response("image/jpeg", imagegen::jpeg(800, 400, s), cacheable(s)));
            refs.push((3, Ref::Record(Record { img, mime: "image/jpeg", width: 800.0, height: 400.0, class: HostClass::SameSiteOtherHost })));
        }
        // The logo appears on two pages and counts once.
        let s = salt.next();
        let logo = Img::new("/logo.png").serve(&host, "/logo.png", image_response("image/png", imagegen::png(200, 60, s), cacheable(s)));
        refs.push((0, Ref::Record(Record { img: logo, mime: "image/png", width: 200.0, height: 60.0, class: HostClass::SameHost })));
        refs.push((1, Ref::Other(Img::new("logo.png"))));
        if i == 6 {
            // Two URLs, one set of bytes.
            let s = salt.next();
            let bytes = imagegen::jpeg(320, 240, s);
            let one = Img::new("/img/dup1.jpg").serve(&host, "/img/dup1.jpg", image_response("image/jpeg", bytes.clone(), cacheable(s)));
            refs.push((1, Ref::Record(Record { img: one, mime: "image/jpeg", width: 320.0, height: 240.0, class: HostClass::SameHost })));
            let two = Img::new("/img/dup2.jpg").serve(&host, "/img/dup2.jpg", Response::new(200, "image/jpeg", bytes));
            refs.push((2, Ref::Other(two)));
        }
        if let Some((img, kind)) = skip_for(i, &host) {
            skips.push((d.clone(), kind));
            refs.push((2, Ref::Other(img)));
        }

        let records = |refs: &[(usize, Ref)]| refs.iter().filter(|r| matches!(r.1, Ref::Record(_))).count();
        let mut k = 0;
        while records(&refs) < IMAGES_PER_SITE {
            let slot = k % pages.len();
            let r = fill(k, i, &d, &pages[slot].host.clone(), salt.next());
            refs.push((slot, Ref::Record(r)));
            k += 1;
        }

        for (slot, r) in refs {
            match r {
                Ref::Record(rec) => {
                    let (h, _, _) = rec.img.served.as_ref().unwrap();
                    allowed.insert(h.clone());
                    images.push(PlannedImage {
                        site: d.clone(),
                        page: pages[slot].url(),
                        url: rec.img.url(),
                        mime: rec.mime.to_string(),
                        width: rec.width,
                        height: rec.height,
                        invisible: rec.invisible(),
                        class: rec.class,
                    });
                    pages[slot].imgs.push(rec.img);
                }
                Ref::Other(img) => pages[slot].imgs.push(img),
            }
        }
        for page in pages {
            for img in &page.imgs {
                if let Some((h, p, resp)) = &img.served {
                    routes.add(h, p, resp.clone());
                }
            }
            allowed.insert(page.host.clone());
            let mut route = Route::from(Response::html(page.html()));
            if let Some((delay, times)) = page.delay {
                route.delay = delay;
                route.delay_times = times;
            }
            routes.add(&page.host, &page.path, route);
            page_urls.push(page.url());
        }
    }
    // 404s on hosts that exist, 502 for the rest.
    allowed.insert("gone.nowhere.test".into());
    domain_list.push_str(&format!("{DEAD_SITE},news\n"));
    allowed.insert(DEAD_SITE.into());
    page_urls.push(format!("http://{DEAD_SITE}/"));

    let manifest = tally(images, &skips, page_urls.len(), &domain_list, allowed);
    SyntheticWeb {
        routes,
        domain_list,
        pages: page_urls,
        skips,
        manifest,
    }
}

fn naive_sld(host: &str) -> String {
    let labels: Vec<&str> = host.rsplitn(3, '.').collect();
    match labels.as_slice() {
        [tld, name, ..] => format!("{name}.{tld}"),
        _ => host.to_string(),
    }
}

fn tally(
    images: Vec<PlannedImage>,
    skips: &[(String, PlannedSkip)],
    pages: usize,
    domain_list: &str,
    allowed_hosts: BTreeSet<String>,
) -> FixtureManifest {
    let mut mime = BTreeMap::new();
    for img in &images {
        *mime.entry(img.mime.clone()).or_insert(0) += 1;
    }
    let mut categories: BTreeMap<String, CategoryCount> = BTreeMap::new();
    for line in domain_list.lines().skip(1) {
        let (domain, cat) = line.split_once(',').unwrap();
        let c = categories.entry(cat.to_string()).or_default();
        c.sites += 1;
        if domain != DEAD_SITE {
            c.sites_ok += 1;
        }
        let mine = images.iter().filter(|x| x.site == domain);
        c.images += mine.clone().count();
        c.one_by_one_cross_domain += mine.filter(|x| x.invisible && x.cross_domain()).count();
    }
    let mut referenced: BTreeMap<String, usize> = BTreeMap::new();
    for img in images.iter().filter(|x| x.invisible && x.cross_domain()) {
        let host = img.url.split('/').nth(2).unwrap();
        *referenced.entry(naive_sld(host)).or_insert(0) += 1;
    }
    let mut top_referenced: Vec<(String, usize)> = referenced.into_iter().collect();
    top_referenced.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    FixtureManifest {
        domains_listed: SITE_COUNT + 1,
        domains_sampled_ok: SITE_COUNT,
        pages,
        images_total: images.len(),
        cross_domain_images: images.iter().filter(|x| x.cross_domain()).count(),
        cross_origin_images: images.iter().filter(|x| x.cross_origin()).count(),
        one_by_one_images: images.iter().filter(|x| x.invisible).count(),
        one_by_one_cross_domain: images.iter().filter(|x| x.invisible && x.cross_domain()).count(),
        parse_failures: skips.iter().filter(|s| s.1 == PlannedSkip::ParseFailure).count(),
        skipped: skips.len(),
        mime,
        categories,
        top_referenced,
        allowed_hosts,
        forbidden_hosts: [
            EXTERNAL_LINK_HOST.to_string(),
            format!("secure.{EXTERNAL_LINK_HOST}"),
            "files.site16.test".to_string(),
        ]
        .into(),
        disallowed_pages: [format!("{}/private/secret.html", site_domain(ROBOTS_SITE))].into(),
        images,
    }
}

/// Differences between a computed summary and the manifest, one line each.
pub fn compare_summary(m: &FixtureManifest, s: &SampleSummary) -> Vec<String> {
    let mut diffs = Vec::new();
    let mut check = |name: &str, want: usize, got: usize| {
        if want != got {
            diffs.push(format!("{name}: expected {want}, got {got}"));
        }
    };
    check("domains_listed", m.domains_listed, s.domains_listed);
    check("domains_sampled_ok", m.domains_sampled_ok, s.domains_sampled_ok);
    check("pages", m.pages, s.pages);
    check("images_total", m.images_total, s.images_total);
    check("cross_domain_images", m.cross_domain_images, s.cross_domain_images);
    check("cross_origin_images", m.cross_origin_images, s.cross_origin_images);
    check("one_by_one_images", m.one_by_one_images, s.one_by_one_images);
    check("one_by_one_cross_domain", m.one_by_one_cross_domain, s.one_by_one_cross_domain);
    check("parse_failures", m.parse_failures, s.parse_failures);
    check("skipped", m.skipped, s.skipped);
    let mime: BTreeMap<String, usize> = s.mime.iter().map(|r| (r.key.clone(), r.images)).collect();
    if mime != m.mime {
        diffs.push(format!("mime: expected {:?}, got {mime:?}", m.mime));
    }
    let cats: BTreeMap<String, CategoryCount> = s
        .categories
        .iter()
        .map(|r| {
            (
                r.category.clone(),
                CategoryCount {
                    sites: r.sites,
                    sites_ok: r.sites_ok,
                    images: r.images,
                    one_by_one_cross_domain: r.one_by_one_cross_domain,
                },
            )
        })
        .collect();
    if cats != m.categories {
        diffs.push(format!("categories: expected {:?}, got {cats:?}", m.categories));
    }
    let top: Vec<(String, usize)> = s.top_referenced.iter().map(|d| (d.domain.clone(), d.count)).collect();
    if top != m.top_referenced {
        diffs.push(format!("top_referenced: expected {:?}, got {top:?}", m.top_referenced));
    }
    diffs
}

/// Crawl settings for the synthetic web behind `proxy`. The timeout sits
/// below [`FLAKY_DELAY`] so the flaky site fails its first pass.
pub fn crawl_config_toml(proxy: &str, domain_list: &str) -> String {
    format!(
        "domain_list = \"{domain_list}\"\nproxy = \"{proxy}\"\ntimeout_seconds = 1.0\npasses = 3\ndepth = 1\nper_host_parallelism = 2\npoliteness_ms = 20\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_counts() {
        let web = build();
        let m = &web.manifest;
        assert_eq!(m.domains_listed, 21);
        assert_eq!(m.pages, 64);
        assert_eq!(m.images_total, 600);
        assert_eq!(m.one_by_one_images, 40);
        assert_eq!(m.one_by_one_cross_domain, 30);
        assert_eq!(m.skipped, 9);
        assert_eq!(m.parse_failures, 3);
        assert_eq!(m.top_referenced[0], ("trk-alpha.test".to_string(), 10));
        assert_eq!(m.top_referenced.len(), 6);
        for i in 0..SITE_COUNT {
            let d = site_domain(i);
            assert_eq!(m.images.iter().filter(|x| x.site == d).count(), IMAGES_PER_SITE, "{d}");
        }
        let urls: BTreeSet<_> = m.images.iter().map(|x| (&x.site, &x.url)).collect();
        assert_eq!(urls.len(), m.images.len());
    }

    #[test]
    fn served_hosts_are_allowed() {
        let web = build();
        for h in web.routes.hosts() {
            assert!(web.manifest.allowed_hosts.contains(&h), "{h}");
        }
        for h in &web.manifest.forbidden_hosts {
            assert!(!web.routes.hosts().contains(h));
        }
    }

    #[test]
    fn build_is_deterministic() {
        let a = serde_json::to_string(&build().manifest).unwrap();
        let b = serde_json::to_string(&build().manifest).unwrap();
        assert_eq!(a, b);
    }
}
