use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use super::url::{host_is_ip, ParsedUrl};

static BUNDLED_PSL: &str = include_str!("../../data/public_suffix_list.dat");

/// Public-suffix rules in the `public_suffix_list.dat` text format.
#[derive(Debug, Default)]
pub struct SuffixTable {
    normal: HashSet<String>,
    wildcard: HashSet<String>,
    exception: HashSet<String>,
}

impl SuffixTable {
    pub fn parse(text: &str) -> Self {
        let mut table = SuffixTable::default();
        for line in text.lines() {
            // Rules end at the first whitespace.
            let rule = line.split_whitespace().next().unwrap_or("");
            if rule.is_empty() || rule.starts_with("//") {
                continue;
            }
            let rule = rule.to_lowercase();
            if let Some(rest) = rule.strip_prefix('!') {
                table.exception.insert(rest.to_string());
            } else if let Some(rest) = rule.strip_prefix("*.") {
                table.wildcard.insert(rest.to_string());
            } else {
                table.normal.insert(rule);
            }
        }
        table
    }

    /// The snapshot shipped with the crate.
    pub fn bundled() -> Arc<SuffixTable> {
        static TABLE: OnceLock<Arc<SuffixTable>> = OnceLock::new();
        TABLE
            .get_or_init(|| Arc::new(SuffixTable::parse(BUNDLED_PSL)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.normal.len() + self.wildcard.len() + self.exception.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of trailing labels that make up the public suffix of `labels`.
    fn suffix_label_count(&self, labels: &[&str]) -> usize {
        let n = labels.len();
        let mut best = 1; // implicit "*" rule
        for take in 1..=n {
            let candidate = labels[n - take..].join(".");
            if self.exception.contains(&candidate) {
                return take - 1;
            }
            if self.normal.contains(&candidate) {
                best = best.max(take);
            }
            if take < n {
                let parent = labels[n - take..].join(".");
                if self.wildcard.contains(&parent) {
                    best = best.max(take + 1);
                }
            }
        }
        best
    }

    /// Public suffix of `host` (lowercase, no trailing dot).
    pub fn public_suffix(&self, host: &str) -> String {
        let labels: Vec<&str> = host.split('.').collect();
        let take = self.suffix_label_count(&labels).min(labels.len());
        labels[labels.len() - take..].join(".")
    }
}

/// How second-level domains are extracted from host names.
#[derive(Clone, Debug, Default)]
pub enum DomainMode {
    /// Last two DNS labels.
    #[default]
    Naive,
    /// Registrable domain under a public-suffix table.
    SuffixList(Arc<SuffixTable>),
}

impl DomainMode {
    pub fn psl() -> Self {
        DomainMode::SuffixList(SuffixTable::bundled())
    }

    pub fn name(&self) -> &'static str {
        match self {
            DomainMode::Naive => "naive",
            DomainMode::SuffixList(_) => "psl",
        }
    }
}

/// Second-level (or registrable) domain of `host`.
///
/// Single-label hosts and IP literals come back unchanged.
pub fn second_level_domain(host: &str, mode: &DomainMode) -> String {
    let host = host.trim_end_matches('.').to_ascii_lowercase();
    if host_is_ip(&host) || !host.contains('.') {
        return host;
    }
    let labels: Vec<&str> = host.split('.').collect();
    let keep = match mode {
        DomainMode::Naive => 2,
        DomainMode::SuffixList(table) => table.suffix_label_count(&labels) + 1,
    };
    if keep >= labels.len() {
        return host;
    }
    labels[labels.len() - keep..].join(".")
}

/// True when the image's second-level domain differs from the page's.
///
/// IP literals only ever equal themselves.
pub fn is_cross_domain(page_final: &ParsedUrl, image: &ParsedUrl, mode: &DomainMode) -> bool {
    if page_final.host_is_ip() || image.host_is_ip() {
        return !page_final.host().eq_ignore_ascii_case(image.host());
    }
    second_level_domain(page_final.host(), mode) != second_level_domain(image.host(), mode)
}

/// Same-origin comparison on (scheme, host, port).
pub fn is_cross_origin(page_final: &ParsedUrl, image: &ParsedUrl) -> bool {
    page_final.origin() != image.origin()
}
