//! Image references and crawl links from HTML.
//!
//! A small error-recovering tokenizer: it only understands tags, attributes,
//! comments and raw-text elements, which is all that image and link
//! collection needs. Tags cut off by the end of input are still emitted, so
//! partially downloaded documents keep their trailing `<img>`.

use std::collections::HashSet;

use encoding_rs::{Encoding, UTF_8};

use crate::corpus::{is_cross_domain, parse_url, DomainMode, ImgTagRef, ParsedUrl};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtractionResult {
    pub img_refs: Vec<ImgTagRef>,
    pub anchor_hrefs: Vec<String>,
    pub frame_srcs: Vec<String>,
}

/// Elements whose content is text up to the matching end tag.
const RAW_TEXT: &[&str] = &[
    "script", "style", "textarea", "title", "xmp", "iframe", "noembed", "noframes",
];

fn decode(html: &[u8], charset_hint: Option<&str>) -> String {
    let encoding = charset_hint
        .and_then(|l| Encoding::for_label(l.trim().as_bytes()))
        .or_else(|| sniff_meta_charset(html))
        .unwrap_or(UTF_8);
    // A byte-order mark still wins over labels.
    let (text, _, _) = encoding.decode(html);
    text.into_owned()
}

fn sniff_meta_charset(html: &[u8]) -> Option<&'static Encoding> {
    let head = &html[..html.len().min(1024)];
    let lower: Vec<u8> = head.iter().map(u8::to_ascii_lowercase).collect();
    let mut from = 0;
    while let Some(off) = find(&lower[from..], b"<meta") {
        let start = from + off;
        let end = find(&lower[start..], b">").map_or(lower.len(), |e| start + e);
        let tag = &lower[start..end];
        if let Some(cs) = find(tag, b"charset") {
            let rest = &tag[cs + 7..];
            let rest = rest
                .iter()
                .position(|&b| b != b' ' && b != b'=')
                .map_or(&rest[rest.len()..], |p| &rest[p..]);
            let rest = rest
                .strip_prefix(b"\"")
                .or_else(|| rest.strip_prefix(b"'"))
                .unwrap_or(rest);
            let label_end = rest
                .iter()
                .position(|b| matches!(b, b'"' | b'\'' | b';' | b' ' | b'/' | b'>'))
                .unwrap_or(rest.len());
            if let Some(enc) = Encoding::for_label(&rest[..label_end]) {
                return Some(enc);
            }
        }
        from = end;
    }
    None
}

fn find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

struct Tag {
    name: String,
    attrs: Vec<(String, String)>,
}

impl Tag {
    fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }
}

struct Tokenizer<'a> {
    s: &'a str,
    b: &'a [u8],
    pos: usize,
}

impl<'a> Tokenizer<'a> {
    fn new(s: &'a str) -> Self {
        Tokenizer {
            s,
            b: s.as_bytes(),
            pos: 0,
        }
    }

    fn skip_past(&mut self, needle: &str) {
        match self.s[self.pos..].find(needle) {
            Some(i) => self.pos += i + needle.len(),
            None => self.pos = self.b.len(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.b.len() && self.b[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn take_while(&mut self, keep: impl Fn(u8) -> bool) -> &'a str {
        let start = self.pos;
        while self.pos < self.b.len() && keep(self.b[self.pos]) {
            self.pos += 1;
        }
        &self.s[start..self.pos]
    }

    /// Skips raw text up to (not including) `</name`, case-insensitively.
    fn skip_raw_text(&mut self, name: &str) {
        let close = format!("</{name}");
        while self.pos < self.b.len() {
            match self.s[self.pos..].find("</") {
                Some(i) => {
                    let at = self.pos + i;
                    let end = (at + close.len()).min(self.b.len());
                    if self.s.is_char_boundary(end)
                        && self.s[at..end].eq_ignore_ascii_case(&close)
                        && self
                            .b
                            .get(end)
                            .is_none_or(|c| c.is_ascii_whitespace() || *c == b'>' || *c == b'/')
                    {
                        self.pos = at;
                        return;
                    }
                    self.pos = at + 2;
                }
                None => self.pos = self.b.len(),
            }
        }
    }

    fn start_tag(&mut self) -> Tag {
        let name = self
            .take_while(|c| !c.is_ascii_whitespace() && c != b'/' && c != b'>')
            .to_ascii_lowercase();
        let mut attrs: Vec<(String, String)> = Vec::new();
        loop {
            while self.pos < self.b.len()
                && (self.b[self.pos].is_ascii_whitespace() || self.b[self.pos] == b'/')
            {
                self.pos += 1;
            }
            if self.pos >= self.b.len() {
                break;
            }
            if self.b[self.pos] == b'>' {
                self.pos += 1;
                break;
            }
            let first = self.pos;
            // A leading '=' belongs to the name.
            self.pos += self.s[first..].chars().next().map_or(1, char::len_utf8);
            self.take_while(|c| !c.is_ascii_whitespace() && !matches!(c, b'/' | b'>' | b'='));
            let attr_name = self.s[first..self.pos].to_ascii_lowercase();
            self.skip_ws();
            let mut value = String::new();
            if self.b.get(self.pos) == Some(&b'=') {
                self.pos += 1;
                self.skip_ws();
                value = match self.b.get(self.pos) {
                    Some(&q @ (b'"' | b'\'')) => {
                        self.pos += 1;
                        let v = self.take_while(|c| c != q);
                        if self.pos < self.b.len() {
                            self.pos += 1;
                        }
                        v.to_string()
                    }
                    _ => self
                        .take_while(|c| !c.is_ascii_whitespace() && c != b'>')
                        .to_string(),
                };
                value = html_escape::decode_html_entities(&value).into_owned();
            }
            // First occurrence of an attribute wins.
            if !attrs.iter().any(|(n, _)| *n == attr_name) {
                attrs.push((attr_name, value));
            }
        }
        Tag { name, attrs }
    }

    fn next_tag(&mut self) -> Option<Tag> {
        while self.pos < self.b.len() {
            let Some(i) = self.s[self.pos..].find('<') else {
                self.pos = self.b.len();
                return None;
            };
            self.pos += i + 1;
            let rest = &self.s[self.pos..];
            if rest.starts_with("!--") {
                self.pos += 3;
                self.skip_past("-->");
            } else if rest.starts_with('!') || rest.starts_with('?') {
                self.skip_past(">");
            } else if let Some(after) = rest.strip_prefix('/') {
                if after.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    self.skip_past(">");
                }
            } else if rest.starts_with(|c: char| c.is_ascii_alphabetic()) {
                let tag = self.start_tag();
                if RAW_TEXT.contains(&tag.name.as_str()) {
                    self.skip_raw_text(&tag.name);
                }
                return Some(tag);
            }
        }
        None
    }
}

/// Collects `<img>` references, `<a href>` values and frame sources in
/// document order. Never fails: garbage in gives an empty or partial result.
pub fn extract(html: &[u8], charset_hint: Option<&str>) -> ExtractionResult {
    let text = decode(html, charset_hint);
    let mut tok = Tokenizer::new(&text);
    let mut out = ExtractionResult::default();
    while let Some(tag) = tok.next_tag() {
        match tag.name.as_str() {
            "img" => out.img_refs.push(ImgTagRef {
                src: tag.attr("src").unwrap_or("").to_string(),
                alt_present: tag.attr("alt").is_some(),
                style_value: tag.attr("style").map(str::to_string),
            }),
            "a" => {
                if let Some(href) = tag.attr("href") {
                    out.anchor_hrefs.push(href.to_string());
                }
            }
            "frame" | "iframe" => {
                if let Some(src) = tag.attr("src") {
                    out.frame_srcs.push(src.to_string());
                }
            }
            _ => {}
        }
    }
    out
}

/// Same-site HTTP(S) links (anchors first, then frames), resolved against
/// the page's final URL and deduplicated in first-seen order.
pub fn frontier(result: &ExtractionResult, page_final: &ParsedUrl, mode: &DomainMode) -> Vec<ParsedUrl> {
    let mut seen = HashSet::new();
    result
        .anchor_hrefs
        .iter()
        .chain(&result.frame_srcs)
        .filter_map(|raw| parse_url(raw, Some(page_final)).ok())
        .filter(|u| u.is_http() && !is_cross_domain(page_final, u, mode))
        .filter(|u| seen.insert(u.to_string()))
        .collect()
}
