//! Adblock-Plus style network filters: parsing, compilation and the
//! request-blocking decision behind the BLCK feature.
//!
//! Supported: `||` domain anchors, `|` start/end anchors, `*` wildcards,
//! `^` separators, `@@` exceptions and the options `third-party`
//! (`first-party`, `1p`, `3p`), `domain=` and resource-type options.
//! Element hiding, regex literals and modifier options such as `redirect`,
//! `csp`, `popup` or `match-case` are counted and skipped.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use crate::corpus::{is_cross_domain, ContentDigest, DomainMode, ImageRecord, PageRecord, ParsedUrl};
use crate::image_inspect::content_digest;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternToken {
    Literal(String),
    /// `*`
    Wildcard,
    /// `^`
    Separator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartAnchor {
    None,
    /// `|` at the start: the URL must begin here.
    Start,
    /// `||`: start of the host or just after a dot inside it.
    Domain,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub start: StartAnchor,
    pub tokens: Vec<PatternToken>,
    /// `|` at the end: the URL must end here.
    pub end_anchor: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleOptions {
    pub third_party: Option<bool>,
    /// `Some(true)`: applies to images; `Some(false)`: never applies to images.
    pub image_type: Option<bool>,
    pub include_domains: Vec<String>,
    pub exclude_domains: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilterRule {
    pub raw: String,
    pub pattern: Pattern,
    pub is_exception: bool,
    pub options: RuleOptions,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SkipReason {
    Empty,
    Comment,
    Header,
    ElementHiding,
    RegexLiteral,
    UnsupportedOption(String),
    ConflictingDomains,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::Empty => f.write_str("empty"),
            SkipReason::Comment => f.write_str("comment"),
            SkipReason::Header => f.write_str("header"),
            SkipReason::ElementHiding => f.write_str("element_hiding"),
            SkipReason::RegexLiteral => f.write_str("regex_literal"),
            SkipReason::UnsupportedOption(o) => write!(f, "unsupported_option:{o}"),
            SkipReason::ConflictingDomains => f.write_str("conflicting_domains"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedLine {
    Rule(FilterRule),
    Skipped(SkipReason),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CaseMode {
    /// Host part of domain-anchored patterns folded to lowercase; the rest
    /// of the URL compared case-sensitively.
    #[default]
    HostInsensitive,
    /// Pattern and URL both lowercased.
    Lowercase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResourceType {
    Image,
}

#[derive(Clone, Debug)]
pub struct MatchContext {
    pub request_url: ParsedUrl,
    pub page_host: String,
    pub page_sld: String,
    pub is_third_party: bool,
    pub resource_type: ResourceType,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    Blocked,
    Allowlisted,
    NoMatch,
}

const ELEMENT_HIDING_MARKERS: &[&str] = &["##", "#@#", "#?#", "#$#", "#@?#", "#@$#", "#%#"];

const TYPE_OPTIONS: &[&str] = &[
    "image",
    "script",
    "stylesheet",
    "css",
    "object",
    "object-subrequest",
    "xmlhttprequest",
    "xhr",
    "subdocument",
    "frame",
    "document",
    "doc",
    "media",
    "font",
    "other",
    "ping",
    "websocket",
    "webrtc",
];

/// Parses one filter-list line.
pub fn parse_rule(line: &str) -> ParsedLine {
    use ParsedLine::Skipped;
    let line = line.trim();
    if line.is_empty() {
        return Skipped(SkipReason::Empty);
    }
    if line.starts_with('!') {
        return Skipped(SkipReason::Comment);
    }
    if line.starts_with('[') && line.ends_with(']') {
        return Skipped(SkipReason::Header);
    }
    if ELEMENT_HIDING_MARKERS.iter().any(|m| line.contains(m)) {
        return Skipped(SkipReason::ElementHiding);
    }
    let (is_exception, body) = match line.strip_prefix("@@") {
        Some(rest) => (true, rest),
        None => (false, line),
    };
    let (pattern_text, options_text) = match body.rfind('$') {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    if pattern_text.len() >= 2 && pattern_text.starts_with('/') && pattern_text.ends_with('/') {
        return Skipped(SkipReason::RegexLiteral);
    }
    let options = match options_text {
        Some(text) => match parse_options(text) {
            Ok(o) => o,
            Err(reason) => return Skipped(reason),
        },
        None => RuleOptions::default(),
    };
    ParsedLine::Rule(FilterRule {
        raw: line.to_string(),
        pattern: parse_pattern(pattern_text),
        is_exception,
        options,
    })
}

fn parse_pattern(text: &str) -> Pattern {
    let (start, rest) = if let Some(r) = text.strip_prefix("||") {
        (StartAnchor::Domain, r)
    } else if let Some(r) = text.strip_prefix('|') {
        (StartAnchor::Start, r)
    } else {
        (StartAnchor::None, text)
    };
    let (end_anchor, rest) = match rest.strip_suffix('|') {
        Some(r) => (true, r),
        None => (false, rest),
    };
    let mut tokens = Vec::new();
    let mut literal = String::new();
    for c in rest.chars() {
        let special = match c {
            '*' => Some(PatternToken::Wildcard),
            '^' => Some(PatternToken::Separator),
            _ => None,
        };
        match special {
            Some(tok) => {
                if !literal.is_empty() {
                    tokens.push(PatternToken::Literal(std::mem::take(&mut literal)));
                }
                if !(tok == PatternToken::Wildcard && tokens.last() == Some(&PatternToken::Wildcard)) {
                    tokens.push(tok);
                }
            }
            None => literal.push(c),
        }
    }
    if !literal.is_empty() {
        tokens.push(PatternToken::Literal(literal));
    }
    Pattern {
        start,
        tokens,
        end_anchor,
    }
}

fn parse_options(text: &str) -> Result<RuleOptions, SkipReason> {
    let mut opts = RuleOptions::default();
    let mut positive_types = HashSet::new();
    let mut negative_types = HashSet::new();
    for raw in text.split(',') {
        let opt = raw.trim().to_ascii_lowercase();
        if opt.is_empty() {
            continue;
        }
        let (negated, name) = match opt.strip_prefix('~') {
            Some(n) => (true, n),
            None => (false, opt.as_str()),
        };
        match name {
            "third-party" | "3p" => opts.third_party = Some(!negated),
            "first-party" | "1p" => opts.third_party = Some(negated),
            _ if TYPE_OPTIONS.contains(&name) => {
                if negated {
                    negative_types.insert(name.to_string());
                } else {
                    positive_types.insert(name.to_string());
                }
            }
            _ if !negated && name.starts_with("domain=") => {
                // Domain values keep their own case-insensitive handling.
                for d in raw.trim()["domain=".len()..].split('|') {
                    let d = d.trim().to_ascii_lowercase();
                    match d.strip_prefix('~') {
                        Some(ex) if !ex.is_empty() => opts.exclude_domains.push(ex.to_string()),
                        None if !d.is_empty() => opts.include_domains.push(d),
                        _ => {}
                    }
                }
            }
            _ => return Err(SkipReason::UnsupportedOption(opt.clone())),
        }
    }
    if opts
        .include_domains
        .iter()
        .any(|d| opts.exclude_domains.contains(d))
    {
        return Err(SkipReason::ConflictingDomains);
    }
    if !positive_types.is_empty() {
        opts.image_type =
            Some(positive_types.contains("image") && !negative_types.contains("image"));
    } else if negative_types.contains("image") {
        opts.image_type = Some(false);
    }
    Ok(opts)
}

/// One pattern position after expansion to single-byte units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Unit {
    Byte(u8),
    Sep,
    Star,
}

fn is_separator(b: u8) -> bool {
    !(b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.' | b'%'))
}

#[derive(Clone, Debug)]
struct CompiledRule {
    rule: FilterRule,
    start: StartAnchor,
    units: Vec<Unit>,
}

impl CompiledRule {
    fn new(rule: FilterRule, case: CaseMode) -> Self {
        let mut units = Vec::new();
        if rule.pattern.start == StartAnchor::None {
            units.push(Unit::Star);
        }
        for (i, tok) in rule.pattern.tokens.iter().enumerate() {
            match tok {
                PatternToken::Wildcard if units.last() == Some(&Unit::Star) => {}
                PatternToken::Wildcard => units.push(Unit::Star),
                PatternToken::Separator => units.push(Unit::Sep),
                PatternToken::Literal(s) => {
                    let text = match case {
                        CaseMode::Lowercase => s.to_lowercase(),
                        CaseMode::HostInsensitive
                            if i == 0 && rule.pattern.start == StartAnchor::Domain =>
                        {
                            let host_end = s.find(['/', '?', ':', '#']).unwrap_or(s.len());
                            format!("{}{}", s[..host_end].to_lowercase(), &s[host_end..])
                        }
                        CaseMode::HostInsensitive => s.clone(),
                    };
                    units.extend(text.bytes().map(Unit::Byte));
                }
            }
        }
        if !rule.pattern.end_anchor && units.last() != Some(&Unit::Star) {
            units.push(Unit::Star);
        }
        CompiledRule {
            start: rule.pattern.start,
            rule,
            units,
        }
    }

    fn matches_url(&self, url: &[u8], host: std::ops::Range<usize>) -> bool {
        match self.start {
            StartAnchor::Start | StartAnchor::None => glob(&self.units, url),
            StartAnchor::Domain => {
                std::iter::once(host.start)
                    .chain(
                        (host.start..host.end)
                            .filter(|&i| url[i] == b'.')
                            .map(|i| i + 1),
                    )
                    .any(|i| glob(&self.units, &url[i..]))
            }
        }
    }

    fn options_allow(&self, ctx: &MatchContext) -> bool {
        let o = &self.rule.options;
        if o.image_type == Some(false) && ctx.resource_type == ResourceType::Image {
            return false;
        }
        if let Some(tp) = o.third_party {
            if tp != ctx.is_third_party {
                return false;
            }
        }
        domain_option_allows(o, &ctx.page_host)
    }
}

fn domain_matches(host: &str, domain: &str) -> bool {
    host == domain
        || (host.len() > domain.len()
            && host.ends_with(domain)
            && host.as_bytes()[host.len() - domain.len() - 1] == b'.')
}

/// The most specific listed domain decides; unlisted pages pass only when
/// the rule has no include list.
fn domain_option_allows(o: &RuleOptions, page_host: &str) -> bool {
    let best_include = o
        .include_domains
        .iter()
        .filter(|d| domain_matches(page_host, d))
        .map(String::len)
        .max();
    let best_exclude = o
        .exclude_domains
        .iter()
        .filter(|d| domain_matches(page_host, d))
        .map(String::len)
        .max();
    match (best_include, best_exclude) {
        (_, Some(ex)) if best_include.is_none_or(|inc| ex >= inc) => false,
        (Some(_), _) => true,
        (None, _) => o.include_domains.is_empty(),
    }
}

/// Anchored wildcard match of `units` against the whole of `text`.
fn glob(units: &[Unit], text: &[u8]) -> bool {
    let (mut p, mut t) = (0, 0);
    let mut backtrack: Option<(usize, usize)> = None;
    while t < text.len() {
        let step = match units.get(p) {
            Some(Unit::Byte(b)) => *b == text[t],
            Some(Unit::Sep) => is_separator(text[t]),
            _ => false,
        };
        if step {
            p += 1;
            t += 1;
        } else if units.get(p) == Some(&Unit::Star) {
            backtrack = Some((p, t));
            p += 1;
        } else if let Some((sp, st)) = backtrack {
            backtrack = Some((sp, st + 1));
            p = sp + 1;
            t = st + 1;
        } else {
            return false;
        }
    }
    // `^` also matches the end of the URL.
    units[p..].iter().all(|u| matches!(u, Unit::Star | Unit::Sep))
}

fn alnum_runs(s: &str) -> impl Iterator<Item = (usize, usize)> + '_ {
    let b = s.as_bytes();
    let mut i = 0;
    std::iter::from_fn(move || {
        while i < b.len() && !b[i].is_ascii_alphanumeric() {
            i += 1;
        }
        if i >= b.len() {
            return None;
        }
        let start = i;
        while i < b.len() && b[i].is_ascii_alphanumeric() {
            i += 1;
        }
        Some((start, i))
    })
}

/// Alphanumeric runs of the pattern that must appear as whole tokens in any
/// matching URL.
fn index_tokens(p: &Pattern) -> Vec<String> {
    let mut out = Vec::new();
    let n = p.tokens.len();
    for (i, tok) in p.tokens.iter().enumerate() {
        let PatternToken::Literal(s) = tok else { continue };
        let left_bounded = if i == 0 {
            p.start != StartAnchor::None
        } else {
            p.tokens[i - 1] == PatternToken::Separator
        };
        let right_bounded = if i + 1 == n {
            p.end_anchor
        } else {
            p.tokens[i + 1] == PatternToken::Separator
        };
        for (a, b) in alnum_runs(s) {
            if (a > 0 || left_bounded) && (b < s.len() || right_bounded) {
                out.push(s[a..b].to_ascii_lowercase());
            }
        }
    }
    out
}

#[derive(Clone, Debug, Default)]
struct RuleIndex {
    by_token: HashMap<String, Vec<usize>>,
    untokenized: Vec<usize>,
}

impl RuleIndex {
    fn build(rules: &[CompiledRule]) -> Self {
        let mut index = RuleIndex::default();
        for (i, rule) in rules.iter().enumerate() {
            let tokens = index_tokens(&rule.rule.pattern);
            let best = tokens
                .into_iter()
                .filter(|t| t.len() >= 2)
                .min_by_key(|t| (index.by_token.get(t).map_or(0, Vec::len), usize::MAX - t.len()));
            match best {
                Some(t) => index.by_token.entry(t).or_default().push(i),
                None => index.untokenized.push(i),
            }
        }
        index
    }

    fn any_match(&self, rules: &[CompiledRule], url_tokens: &HashSet<String>, mut f: impl FnMut(&CompiledRule) -> bool) -> bool {
        self.untokenized.iter().any(|&i| f(&rules[i]))
            || url_tokens
                .iter()
                .filter_map(|t| self.by_token.get(t))
                .flatten()
                .any(|&i| f(&rules[i]))
    }
}

/// Compiled blocking and exception rules.
#[derive(Clone, Debug)]
pub struct FilterSet {
    blocking: Vec<CompiledRule>,
    exceptions: Vec<CompiledRule>,
    blocking_index: RuleIndex,
    exception_index: RuleIndex,
    skipped: BTreeMap<SkipReason, usize>,
    case_mode: CaseMode,
    digest: ContentDigest,
}

impl Default for FilterSet {
    fn default() -> Self {
        FilterSet::parse("", CaseMode::default())
    }
}

impl FilterSet {
    pub fn parse(text: &str, case_mode: CaseMode) -> Self {
        let mut blocking = Vec::new();
        let mut exceptions = Vec::new();
        let mut skipped = BTreeMap::new();
        for line in text.lines() {
            match parse_rule(line) {
                ParsedLine::Rule(rule) if rule.is_exception => {
                    exceptions.push(CompiledRule::new(rule, case_mode))
                }
                ParsedLine::Rule(rule) => blocking.push(CompiledRule::new(rule, case_mode)),
                ParsedLine::Skipped(reason) => *skipped.entry(reason).or_insert(0) += 1,
            }
        }
        FilterSet {
            blocking_index: RuleIndex::build(&blocking),
            exception_index: RuleIndex::build(&exceptions),
            blocking,
            exceptions,
            skipped,
            case_mode,
            digest: content_digest(text.as_bytes()),
        }
    }

    pub fn load(path: &Path, case_mode: CaseMode) -> std::io::Result<Self> {
        let bytes = std::fs::read(path)?;
        let mut set = FilterSet::parse(&String::from_utf8_lossy(&bytes), case_mode);
        set.digest = content_digest(&bytes);
        Ok(set)
    }

    pub fn blocking(&self) -> impl Iterator<Item = &FilterRule> {
        self.blocking.iter().map(|c| &c.rule)
    }

    pub fn exceptions(&self) -> impl Iterator<Item = &FilterRule> {
        self.exceptions.iter().map(|c| &c.rule)
    }

    /// Lines that did not become rules (comments, cosmetic rules, ...).
    pub fn skipped(&self) -> usize {
        self.skipped.values().sum()
    }

    pub fn skipped_by_reason(&self) -> &BTreeMap<SkipReason, usize> {
        &self.skipped
    }

    /// SHA-256 of the filter-list bytes.
    pub fn digest(&self) -> ContentDigest {
        self.digest
    }

    pub fn matches(&self, ctx: &MatchContext) -> Decision {
        let mut url = ctx.request_url.to_string();
        if self.case_mode == CaseMode::Lowercase {
            url = url.to_lowercase();
        }
        let host = ctx.request_url.host_span();
        let tokens: HashSet<String> = alnum_runs(&url)
            .map(|(a, b)| url[a..b].to_ascii_lowercase())
            .collect();
        let hit = |r: &CompiledRule| r.options_allow(ctx) && r.matches_url(url.as_bytes(), host.clone());
        if self.exception_index.any_match(&self.exceptions, &tokens, hit) {
            Decision::Allowlisted
        } else if self.blocking_index.any_match(&self.blocking, &tokens, hit) {
            Decision::Blocked
        } else {
            Decision::NoMatch
        }
    }
}

/// Decision for an image request made from `page`.
pub fn matches(set: &FilterSet, ctx: &MatchContext) -> Decision {
    set.matches(ctx)
}

pub fn image_context(image_url: &ParsedUrl, page_final: &ParsedUrl, mode: &DomainMode) -> MatchContext {
    MatchContext {
        request_url: image_url.clone(),
        page_host: page_final.host().to_string(),
        page_sld: crate::corpus::second_level_domain(page_final.host(), mode),
        is_third_party: is_cross_domain(page_final, image_url, mode),
        resource_type: ResourceType::Image,
    }
}

/// True iff the image request would be blocked.
pub fn blck_feature(set: &FilterSet, image: &ImageRecord, page: &PageRecord, mode: &DomainMode) -> bool {
    set.matches(&image_context(&image.resolved_url, &page.final_url, mode)) == Decision::Blocked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_url;

    fn ctx(url: &str, page: &str) -> MatchContext {
        image_context(
            &parse_url(url, None).unwrap(),
            &parse_url(page, None).unwrap(),
            &DomainMode::Naive,
        )
    }

    fn rule(line: &str) -> FilterRule {
        match parse_rule(line) {
            ParsedLine::Rule(r) => r,
            other => panic!("{line}: {other:?}"),
        }
    }

    #[test]
    fn parses_domain_anchor() {
        let r = rule("||ads.example.com^");
        assert_eq!(r.pattern.start, StartAnchor::Domain);
        assert_eq!(
            r.pattern.tokens,
            vec![
                PatternToken::Literal("ads.example.com".into()),
                PatternToken::Separator
            ]
        );
        assert!(!r.is_exception);
        assert_eq!(r.options, RuleOptions::default());
    }

    #[test]
    fn parses_exception_with_image_option() {
        let r = rule("@@||cdn.example.com^$image");
        assert!(r.is_exception);
        assert_eq!(r.options.image_type, Some(true));
    }

    #[test]
    fn option_variants() {
        assert_eq!(rule("x$~third-party").options.third_party, Some(false));
        assert_eq!(rule("x$1p").options.third_party, Some(false));
        assert_eq!(rule("x$script").options.image_type, Some(false));
        assert_eq!(rule("x$script,image").options.image_type, Some(true));
        assert_eq!(rule("x$~image").options.image_type, Some(false));
        assert_eq!(rule("x$~script").options.image_type, None);
        let r = rule("x$domain=A.com|~b.a.com");
        assert_eq!(r.options.include_domains, vec!["a.com"]);
        assert_eq!(r.options.exclude_domains, vec!["b.a.com"]);
        assert_eq!(
            parse_rule("x$domain=a.com|~a.com"),
            ParsedLine::Skipped(SkipReason::ConflictingDomains)
        );
    }

    #[test]
    fn skipped_lines() {
        let cases = [
            ("! comment", SkipReason::Comment),
            ("[Adblock Plus 2.0]", SkipReason::Header),
            ("", SkipReason::Empty),
            ("example.com##.ad", SkipReason::ElementHiding),
            ("example.com#@#.ad", SkipReason::ElementHiding),
            ("/banner\\d+/", SkipReason::RegexLiteral),
            ("||a.com^$popup", SkipReason::UnsupportedOption("popup".into())),
            ("||a.com^$match-case", SkipReason::UnsupportedOption("match-case".into())),
            ("||a.com^$redirect=noop.js", SkipReason::UnsupportedOption("redirect=noop.js".into())),
        ];
        for (line, reason) in cases {
            assert_eq!(parse_rule(line), ParsedLine::Skipped(reason), "{line}");
        }
    }

    #[test]
    fn domain_anchor_blocks_third_party_pixel() {
        let set = FilterSet::parse("||ads.net^", CaseMode::default());
        assert_eq!(set.matches(&ctx("http://ads.net/px.gif", "http://a.com/")), Decision::Blocked);
        assert_eq!(set.matches(&ctx("http://x.ads.net/px.gif", "http://a.com/")), Decision::Blocked);
        assert_eq!(set.matches(&ctx("http://bads.net/px.gif", "http://a.com/")), Decision::NoMatch);
        assert_eq!(set.matches(&ctx("http://ads.network/", "http://a.com/")), Decision::NoMatch);
        assert_eq!(set.matches(&ctx("http://a.com/?u=ads.net", "http://a.com/")), Decision::NoMatch);
    }

    #[test]
    fn third_party_gate() {
        let set = FilterSet::parse("/pixel.gif$third-party", CaseMode::default());
        assert_eq!(
            set.matches(&ctx("http://stats.a.com/pixel.gif", "http://www.a.com/")),
            Decision::NoMatch
        );
        assert_eq!(
            set.matches(&ctx("http://t.net/pixel.gif", "http://www.a.com/")),
            Decision::Blocked
        );
    }

    #[test]
    fn empty_set_never_matches() {
        let set = FilterSet::default();
        assert_eq!(set.matches(&ctx("http://ads.net/p.gif", "http://a.com/")), Decision::NoMatch);
        assert_eq!(set.skipped(), 0);
    }

    #[test]
    fn exceptions_take_precedence() {
        let set = FilterSet::parse("||cdn.example.com^\n@@||cdn.example.com^$image", CaseMode::default());
        assert_eq!(
            set.matches(&ctx("http://cdn.example.com/a.png", "http://a.com/")),
            Decision::Allowlisted
        );
    }

    #[test]
    fn separator_and_end_anchor() {
        let set = FilterSet::parse("/ad.gif|\n&adid=^", CaseMode::default());
        assert_eq!(set.matches(&ctx("http://t.net/x/ad.gif", "http://a.com/")), Decision::Blocked);
        assert_eq!(set.matches(&ctx("http://t.net/x/ad.gif?x", "http://a.com/")), Decision::NoMatch);
        assert_eq!(set.matches(&ctx("http://t.net/p?x=1&adid=", "http://a.com/")), Decision::Blocked);
        assert_eq!(set.matches(&ctx("http://t.net/p?x=1&adid=7", "http://a.com/")), Decision::NoMatch);
    }

    #[test]
    fn case_modes() {
        let default = FilterSet::parse("||Ads.Net/Pixel", CaseMode::HostInsensitive);
        assert_eq!(default.matches(&ctx("http://ads.net/Pixel.gif", "http://a.com/")), Decision::Blocked);
        assert_eq!(default.matches(&ctx("http://ads.net/pixel.gif", "http://a.com/")), Decision::NoMatch);
        let lower = FilterSet::parse("||Ads.Net/Pixel", CaseMode::Lowercase);
        assert_eq!(lower.matches(&ctx("http://ads.net/pIXEL.gif", "http://a.com/")), Decision::Blocked);
    }

    #[test]
    fn domain_option_most_specific_wins() {
        let set = FilterSet::parse("/px.gif$domain=a.com|~shop.a.com", CaseMode::default());
        assert_eq!(set.matches(&ctx("http://t.net/px.gif", "http://www.a.com/")), Decision::Blocked);
        assert_eq!(set.matches(&ctx("http://t.net/px.gif", "http://shop.a.com/")), Decision::NoMatch);
        assert_eq!(set.matches(&ctx("http://t.net/px.gif", "http://b.com/")), Decision::NoMatch);
        let only_ex = FilterSet::parse("/px.gif$domain=~b.com", CaseMode::default());
        assert_eq!(only_ex.matches(&ctx("http://t.net/px.gif", "http://a.com/")), Decision::Blocked);
        assert_eq!(only_ex.matches(&ctx("http://t.net/px.gif", "http://b.com/")), Decision::NoMatch);
    }

    #[test]
    fn wildcards_and_untokenized_rules() {
        let set = FilterSet::parse("||t.net/*/px*.gif\n-ad-\n$image,third-party,domain=z.com", CaseMode::default());
        assert_eq!(set.matches(&ctx("http://t.net/a/b/px12.gif", "http://a.com/")), Decision::Blocked);
        assert_eq!(set.matches(&ctx("http://u.net/top-ad-1.png", "http://a.com/")), Decision::Blocked);
        assert_eq!(set.matches(&ctx("http://u.net/x.png", "http://www.z.com/")), Decision::Blocked);
        assert_eq!(set.matches(&ctx("http://u.net/x.png", "http://www.y.com/")), Decision::NoMatch);
    }

    #[test]
    fn glob_engine() {
        let units = |s: &str| -> Vec<Unit> {
            s.bytes()
                .map(|b| match b {
                    b'*' => Unit::Star,
                    b'^' => Unit::Sep,
                    b => Unit::Byte(b),
                })
                .collect()
        };
        assert!(glob(&units("a*c"), b"abbbc"));
        assert!(!glob(&units("a*c"), b"abbbcd"));
        assert!(glob(&units("a^"), b"a"));
        assert!(glob(&units("a^"), b"a/"));
        assert!(!glob(&units("a^"), b"ab"));
        assert!(glob(&units("a^*"), b"a"));
        assert!(glob(&units("*"), b""));
        assert!(!glob(&units("a"), b""));
    }

    #[test]
    fn index_tokens_respect_boundaries() {
        let p = |s: &str| match parse_rule(s) {
            ParsedLine::Rule(r) => index_tokens(&r.pattern),
            _ => unreachable!(),
        };
        assert_eq!(p("||ads.example.com^"), vec!["ads", "example", "com"]);
        assert_eq!(p("banner"), Vec::<String>::new());
        assert_eq!(p("/banner/*"), vec!["banner"]);
        assert_eq!(p("*ad.gif|"), vec!["gif"]);
    }

    #[test]
    fn blck_projection() {
        use crate::corpus::{FetchStatus, HttpResponseMeta, ImgTagRef};
        use crate::image_inspect::MimeType;
        let page = PageRecord {
            id: 0,
            site_domain: "a.com".into(),
            requested_url: parse_url("http://a.com/", None).unwrap(),
            final_url: parse_url("http://a.com/", None).unwrap(),
            fetch_status: FetchStatus::Ok,
            image_refs: vec![],
            pass_index: 1,
        };
        let image = |url: &str| ImageRecord {
            page_id: 0,
            site_domain: "a.com".into(),
            tag: ImgTagRef { src: url.into(), alt_present: false, style_value: None },
            resolved_url: parse_url(url, None).unwrap(),
            content_digest: content_digest(url.as_bytes()),
            mime: MimeType::Gif,
            width: Some(1.0),
            height: Some(1.0),
            response_meta: HttpResponseMeta::default(),
            is_invisible: true,
            is_cross_domain: true,
            is_cross_origin: true,
        };
        let set = FilterSet::parse("||t.net^\n||ok.net^\n@@||ok.net^", CaseMode::default());
        let m = DomainMode::Naive;
        assert!(blck_feature(&set, &image("http://t.net/p.gif"), &page, &m));
        assert!(!blck_feature(&set, &image("http://ok.net/p.gif"), &page, &m));
        assert!(!blck_feature(&set, &image("http://none.net/p.gif"), &page, &m));
    }
}
