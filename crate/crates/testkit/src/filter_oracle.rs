//! Reference filter matcher that translates each rule into a regular
//! expression, plus the hand-written conformance cases it labels.

use std::path::PathBuf;

use beacon_core::corpus::{is_cross_domain, parse_url, DomainMode};
use beacon_core::filter_engine::{image_context, CaseMode, Decision, FilterSet};
use regex::Regex;
use serde::{Deserialize, Serialize};

struct OracleRule {
    exception: bool,
    regex: Regex,
    third_party: Option<bool>,
    applies_to_images: bool,
    domains: Vec<(String, bool)>,
}

const SEP_CLASS: &str = r"(?:[^A-Za-z0-9_.%\-]|$)";

fn translate(pattern: &str, case: CaseMode) -> String {
    let mut re = String::new();
    let mut rest = pattern;
    let domain_anchor = rest.starts_with("||");
    if domain_anchor {
        re.push_str(r"^[a-z][a-z0-9+.\-]*://(?:[^/?#:]*\.)?");
        rest = &rest[2..];
    } else if let Some(r) = rest.strip_prefix('|') {
        re.push('^');
        rest = r;
    }
    let end = rest.ends_with('|');
    if end {
        rest = &rest[..rest.len() - 1];
    }
    // The host part of a `||` pattern runs until the first character that
    // cannot belong to a host name.
    let host_len = if domain_anchor && case == CaseMode::HostInsensitive {
        rest.find(['/', '?', ':', '#', '*', '^']).unwrap_or(rest.len())
    } else {
        0
    };
    if host_len > 0 {
        re.push_str(&format!("(?i:{})", regex::escape(&rest[..host_len])));
    }
    for c in rest[host_len..].chars() {
        match c {
            '*' => re.push_str(".*"),
            '^' => re.push_str(SEP_CLASS),
            c => re.push_str(&regex::escape(&c.to_string())),
        }
    }
    if end {
        re.push('$');
    }
    if case == CaseMode::Lowercase {
        format!("(?i){re}")
    } else {
        re
    }
}

fn compile(line: &str, case: CaseMode) -> Option<OracleRule> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('!') || line.starts_with('[') || line.contains("##") || line.contains("#@#") {
        return None;
    }
    let (exception, body) = match line.strip_prefix("@@") {
        Some(b) => (true, b),
        None => (false, line),
    };
    let (pattern, opts) = match body.rfind('$') {
        Some(i) => (&body[..i], &body[i + 1..]),
        None => (body, ""),
    };
    if pattern.len() > 1 && pattern.starts_with('/') && pattern.ends_with('/') {
        return None;
    }
    let mut rule = OracleRule {
        exception,
        regex: Regex::new(&translate(pattern, case)).expect("oracle regex"),
        third_party: None,
        applies_to_images: true,
        domains: Vec::new(),
    };
    let mut saw_positive_type = false;
    let mut image_listed = false;
    let mut image_negated = false;
    for opt in opts.split(',').map(str::trim).filter(|o| !o.is_empty()) {
        let lower = opt.to_ascii_lowercase();
        match lower.as_str() {
            "third-party" | "3p" | "~first-party" | "~1p" => rule.third_party = Some(true),
            "~third-party" | "~3p" | "first-party" | "1p" => rule.third_party = Some(false),
            "image" => {
                saw_positive_type = true;
                image_listed = true;
            }
            "~image" => image_negated = true,
            "script" | "stylesheet" | "subdocument" | "xmlhttprequest" | "object" | "media" | "font" | "other" => {
                saw_positive_type = true
            }
            "~script" | "~stylesheet" | "~subdocument" | "~xmlhttprequest" | "~object" | "~media" | "~font" => {}
            _ if lower.starts_with("domain=") => {
                for d in lower["domain=".len()..].split('|') {
                    match d.strip_prefix('~') {
                        Some(x) => rule.domains.push((x.to_string(), false)),
                        None => rule.domains.push((d.to_string(), true)),
                    }
                }
            }
            // Anything else makes the whole rule unusable.
            _ => return None,
        }
    }
    if image_negated || (saw_positive_type && !image_listed) {
        rule.applies_to_images = false;
    }
    Some(rule)
}

fn on_domain(host: &str, d: &str) -> bool {
    host == d || host.ends_with(&format!(".{d}"))
}

impl OracleRule {
    fn domain_ok(&self, page_host: &str) -> bool {
        let most_specific = self
            .domains
            .iter()
            .filter(|(d, _)| on_domain(page_host, d))
            .max_by_key(|(d, include)| (d.len(), !*include));
        match most_specific {
            Some((_, include)) => *include,
            None => !self.domains.iter().any(|(_, include)| *include),
        }
    }

    fn hits(&self, url: &str, page_host: &str, third_party: bool) -> bool {
        self.applies_to_images
            && self.third_party.is_none_or(|t| t == third_party)
            && self.domain_ok(page_host)
            && self.regex.is_match(url)
    }
}

/// Decision for an image request `url` made from `page`.
pub fn oracle_decision(rules: &[String], url: &str, page: &str, case: CaseMode) -> Decision {
    let mode = DomainMode::Naive;
    let u = parse_url(url, None).expect("case url");
    let p = parse_url(page, None).expect("case page");
    let third_party = is_cross_domain(&p, &u, &mode);
    let serialized = u.to_string();
    let compiled: Vec<OracleRule> = rules.iter().filter_map(|r| compile(r, case)).collect();
    let hit = |exception: bool| {
        compiled
            .iter()
            .filter(|r| r.exception == exception)
            .any(|r| r.hits(&serialized, p.host(), third_party))
    };
    if hit(true) {
        Decision::Allowlisted
    } else if hit(false) {
        Decision::Blocked
    } else {
        Decision::NoMatch
    }
}

/// Decision of the real matcher for the same inputs as [`oracle_decision`].
pub fn engine_decision(rules: &str, url: &str, page: &str, case: CaseMode) -> Decision {
    let mode = DomainMode::Naive;
    let set = FilterSet::parse(rules, case);
    let u = parse_url(url, None).expect("case url");
    let p = parse_url(page, None).expect("case page");
    set.matches(&image_context(&u, &p, &mode))
}

/// Rows where the matcher disagrees with the recorded expectation.
pub fn disagreements(rows: &[ConformanceRow]) -> Vec<(usize, String, String)> {
    rows.iter()
        .filter_map(|r| {
            let got = decision_name(engine_decision(&r.rules, &r.url, &r.page, case_mode_from_name(&r.case_mode)));
            (got != r.expected).then(|| (r.id, r.expected.clone(), got.to_string()))
        })
        .collect()
}

pub fn decision_name(d: Decision) -> &'static str {
    match d {
        Decision::Blocked => "blocked",
        Decision::Allowlisted => "allowlisted",
        Decision::NoMatch => "no_match",
    }
}

pub fn parse_decision(s: &str) -> Option<Decision> {
    match s {
        "blocked" => Some(Decision::Blocked),
        "allowlisted" => Some(Decision::Allowlisted),
        "no_match" => Some(Decision::NoMatch),
        _ => None,
    }
}

/// One row of the conformance table. `rules` holds one rule per line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformanceRow {
    pub id: usize,
    pub rules: String,
    pub url: String,
    pub page: String,
    pub case_mode: String,
    pub expected: String,
    pub note: String,
}

pub fn conformance_path() -> PathBuf {
    crate::data_dir().join("filter_conformance.csv")
}

pub fn case_mode_from_name(s: &str) -> CaseMode {
    match s {
        "lowercase" => CaseMode::Lowercase,
        _ => CaseMode::HostInsensitive,
    }
}

const P: &str = "http://news.example.com/article";

/// (rules, url, page, lowercase?, note)
fn cases() -> Vec<(&'static [&'static str], &'static str, &'static str, bool, &'static str)> {
    vec![
        (&["||tracker.net^"], "http://tracker.net/p.gif", P, false, "domain anchor exact host"),
        (&["||tracker.net^"], "http://px.tracker.net/p.gif", P, false, "domain anchor subdomain"),
        (&["||tracker.net^"], "http://nottracker.net/p.gif", P, false, "domain anchor label boundary"),
        (&["||tracker.net^"], "http://tracker.network/p.gif", P, false, "separator after host"),
        (&["||tracker.net^"], "http://tracker.net", P, false, "separator at end of url"),
        (&["||tracker.net^"], "http://tracker.net:8080/x", P, false, "port colon is a separator"),
        (&["||tracker.net/px/"], "http://tracker.net/px/1.gif", P, false, "domain anchor with path"),
        (&["||tracker.net/px/"], "http://tracker.net/img/px/1.gif", P, false, "path must follow host"),
        (&["||TRACKER.net^"], "http://tracker.net/a", P, false, "host part is case-insensitive"),
        (&["||tracker.net/PX"], "http://tracker.net/px", P, false, "path part is case-sensitive"),
        (&["||tracker.net/PX"], "http://tracker.net/px", P, true, "lowercase mode folds the path"),
        (&["/pixel.gif"], "http://a.org/img/pixel.gif", P, false, "unanchored substring"),
        (&["/pixel.gif"], "http://a.org/img/pixel.gifx", P, false, "unanchored allows trailing text"),
        (&["/Pixel.gif"], "http://a.org/img/pixel.gif", P, false, "unanchored is case-sensitive"),
        (&["/Pixel.gif"], "http://a.org/img/pixel.gif", P, true, "lowercase mode"),
        (&["|http://ads."], "http://ads.example.org/x.gif", P, false, "start anchor"),
        (&["|http://ads."], "http://www.ads.example.org/x.gif", P, false, "start anchor mismatch"),
        (&["|https://"], "http://ads.example.org/x.gif", P, false, "scheme mismatch"),
        (&[".gif|"], "http://a.org/b.gif", P, false, "end anchor"),
        (&[".gif|"], "http://a.org/b.gif?x=1", P, false, "end anchor with query"),
        (&["|http://a.org/b.gif|"], "http://a.org/b.gif", P, false, "both anchors"),
        (&["/ads/*/banner"], "http://a.org/ads/x/y/banner.png", P, false, "wildcard spans slashes"),
        (&["/ads/*/banner"], "http://a.org/ads/banner.png", P, false, "wildcard needs the slashes"),
        (&["/ads/**banner"], "http://a.org/ads/banner", P, false, "double wildcard"),
        (&["*"], "http://a.org/x", P, false, "match-all"),
        (&["track^id="], "http://a.org/track?id=5", P, false, "separator question mark"),
        (&["track^id="], "http://a.org/trackid=5", P, false, "separator requires a character"),
        (&["track^"], "http://a.org/track.gif", P, false, "dot is not a separator"),
        (&["track^"], "http://a.org/track-1", P, false, "dash is not a separator"),
        (&["track^"], "http://a.org/track%20x", P, false, "percent is not a separator"),
        (&["track^"], "http://a.org/track/", P, false, "slash is a separator"),
        (&["^uid="], "http://a.org/p?uid=1", P, false, "leading separator"),
        (&["&uid="], "http://a.org/p?a=1&uid=2", P, false, "ampersand literal"),
        (&["?uid="], "http://a.org/p?uid=2", P, false, "question mark literal"),
        (&["||a.org^", "@@||a.org/ok/"], "http://a.org/ok/1.gif", P, false, "exception wins"),
        (&["||a.org^", "@@||a.org/ok/"], "http://a.org/bad/1.gif", P, false, "exception not matching"),
        (&["@@||a.org^"], "http://a.org/x.gif", P, false, "exception without block"),
        (&["/px.", "@@/px.$third-party"], "http://t.net/px.gif", P, false, "third-party exception"),
        (&["/px.", "@@/px.$third-party"], "http://cdn.example.com/px.gif", P, false, "first-party so exception skipped"),
        (&["||t.net^$third-party"], "http://t.net/a.gif", P, false, "third-party blocks"),
        (&["||t.net^$third-party"], "http://t.net/a.gif", "http://www.t.net/", false, "first-party not blocked"),
        (&["||t.net^$~third-party"], "http://t.net/a.gif", "http://shop.t.net/", false, "first-party rule"),
        (&["||t.net^$~third-party"], "http://t.net/a.gif", P, false, "first-party rule on third-party"),
        (&["||t.net^$1p"], "http://t.net/a.gif", "http://t.net/", false, "1p alias"),
        (&["||t.net^$3p"], "http://t.net/a.gif", P, false, "3p alias"),
        (&["||t.net^$image"], "http://t.net/a.gif", P, false, "image type"),
        (&["||t.net^$script"], "http://t.net/a.gif", P, false, "script only"),
        (&["||t.net^$script,image"], "http://t.net/a.gif", P, false, "script or image"),
        (&["||t.net^$~image"], "http://t.net/a.gif", P, false, "not image"),
        (&["||t.net^$~script"], "http://t.net/a.gif", P, false, "negated other type"),
        (&["||t.net^$image,third-party"], "http://t.net/a.gif", P, false, "combined options"),
        (&["||t.net^$domain=example.com"], "http://t.net/a.gif", P, false, "domain include via parent"),
        (&["||t.net^$domain=other.com"], "http://t.net/a.gif", P, false, "domain include miss"),
        (&["||t.net^$domain=~example.com"], "http://t.net/a.gif", P, false, "domain exclude"),
        (&["||t.net^$domain=example.com|~news.example.com"], "http://t.net/a.gif", P, false, "more specific exclude"),
        (&["||t.net^$domain=~example.com|news.example.com"], "http://t.net/a.gif", P, false, "more specific include"),
        (&["||t.net^$domain=~other.com"], "http://t.net/a.gif", P, false, "exclude elsewhere"),
        (&["||t.net^", "@@||t.net^$domain=example.com"], "http://t.net/a.gif", P, false, "exception scoped to site"),
        (&["||t.net^", "@@||t.net^$domain=other.com"], "http://t.net/a.gif", P, false, "exception scoped elsewhere"),
        (&["||t.net^", "@@||t.net^$image"], "http://t.net/a.gif", P, false, "image exception"),
        (&["||t.net^", "@@||t.net^$script"], "http://t.net/a.gif", P, false, "script exception ignored"),
        (&["||t.net^$popup"], "http://t.net/a.gif", P, false, "unsupported option drops rule"),
        (&["||t.net^$redirect=1x1.gif"], "http://t.net/a.gif", P, false, "redirect option drops rule"),
        (&["example.com##.ad"], "http://example.com/x", P, false, "element hiding ignored"),
        (&["! ||t.net^"], "http://t.net/x", P, false, "comment ignored"),
        (&["[Adblock Plus 2.0]", "/ads/"], "http://a.org/ads/x", P, false, "header line"),
        (&["/banner\\d+/"], "http://a.org/banner12/", P, false, "regex literal ignored"),
        (&["||10.0.0.7^"], "http://10.0.0.7/p.gif", P, false, "ip host"),
        (&["||0.0.7^"], "http://10.0.0.7/p.gif", P, false, "ip suffix after a dot"),
        (&["/p.gif$image", "@@||cdn.example.com^"], "http://cdn.example.com/p.gif", P, false, "first-party exception"),
        (&["||example.com^"], "http://cdn.example.com/x", P, false, "block subdomain of page site"),
        (&["$image,third-party"], "http://t.net/x.png", P, false, "options-only rule"),
        (&["$image,third-party"], "http://img.example.com/x.png", P, false, "options-only rule first-party"),
        (&["||t.net^*uid=", "@@*uid=0"], "http://t.net/p?uid=07", P, false, "wildcard then exception substring"),
        (&["||t.net/p?uid=*&ts="], "http://t.net/p?uid=1&ts=2", P, false, "query wildcard"),
        (&["||t.net/p?uid=*&ts="], "http://t.net/p?ts=2&uid=1", P, false, "query order matters"),
        (&["|http://t.net/a^"], "http://t.net/a?", P, false, "empty query keeps marker"),
        (&["||t.net^", "@@||t.net^$third-party,domain=example.com"], "http://t.net/x", P, false, "exception with two options"),
    ]
}

/// Labels every case with the oracle.
pub fn generate_rows() -> Vec<ConformanceRow> {
    cases()
        .into_iter()
        .enumerate()
        .map(|(i, (rules, url, page, lower, note))| {
            let case = if lower { CaseMode::Lowercase } else { CaseMode::HostInsensitive };
            let rules_vec: Vec<String> = rules.iter().map(|s| s.to_string()).collect();
            ConformanceRow {
                id: i + 1,
                rules: rules_vec.join("\n"),
                url: url.to_string(),
                page: page.to_string(),
                case_mode: if lower { "lowercase" } else { "host_insensitive" }.to_string(),
                expected: decision_name(oracle_decision(&rules_vec, url, page, case)).to_string(),
                note: note.to_string(),
            }
        })
        .collect()
}

pub fn write_rows(rows: &[ConformanceRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

pub fn read_rows(text: &str) -> Result<Vec<ConformanceRow>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}
