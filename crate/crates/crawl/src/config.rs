//! Crawl settings, read from TOML.

use std::path::{Path, PathBuf};
use std::time::Duration;

use beacon_core::corpus::DomainMode;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

pub const DEFAULT_USER_AGENT: &str = "beacon-crawler/0.1 (image survey; no tracking)";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainEntry {
    pub domain: String,
    #[serde(default, deserialize_with = "empty_as_none")]
    pub category: Option<String>,
}

fn empty_as_none<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let v: Option<String> = Option::deserialize(d)?;
    Ok(v.map(|s| s.trim().to_string()).filter(|s| !s.is_empty()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    #[default]
    Naive,
    Psl,
}

impl ModeName {
    pub fn domain_mode(self) -> DomainMode {
        match self {
            ModeName::Naive => DomainMode::Naive,
            ModeName::Psl => DomainMode::psl(),
        }
    }
}

/// On-disk form. `domain_list` names a `domain,category` CSV, relative
/// to the config file; `domains` lists entries inline. Both may be given.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain_list: Option<PathBuf>,
    #[serde(default)]
    domains: Vec<DomainEntry>,
    timeout_seconds: Option<f64>,
    passes: Option<u8>,
    depth: Option<u32>,
    per_host_parallelism: Option<usize>,
    site_parallelism: Option<usize>,
    user_agent: Option<String>,
    scheme: Option<String>,
    politeness_ms: Option<u64>,
    respect_robots: Option<bool>,
    proxy: Option<String>,
    max_redirects: Option<usize>,
    mode: Option<ModeName>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrawlConfig {
    pub domain_list: Vec<DomainEntry>,
    pub timeout_seconds: f64,
    pub passes: u8,
    pub depth: u32,
    pub per_host_parallelism: usize,
    /// Sites crawled at the same time.
    pub site_parallelism: usize,
    pub user_agent: String,
    /// Scheme used for the primary page of each listed domain.
    pub scheme: String,
    /// Minimum gap between request starts to one host.
    pub politeness_ms: u64,
    pub respect_robots: bool,
    /// HTTP proxy every request goes through, if any.
    pub proxy: Option<String>,
    pub max_redirects: usize,
    pub mode: ModeName,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        CrawlConfig {
            domain_list: Vec::new(),
            timeout_seconds: 30.0,
            passes: 3,
            depth: 1,
            per_host_parallelism: 2,
            site_parallelism: 16,
            user_agent: DEFAULT_USER_AGENT.to_string(),
            scheme: "http".to_string(),
            politeness_ms: 200,
            respect_robots: true,
            proxy: None,
            max_redirects: 10,
            mode: ModeName::Naive,
        }
    }
}

pub fn parse_domain_list(text: &str) -> Result<Vec<DomainEntry>, ConfigError> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let mut entry: DomainEntry = row?;
        entry.domain = entry.domain.to_ascii_lowercase();
        if !entry.domain.is_empty() {
            out.push(entry);
        }
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl CrawlConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&read(path)?, base)
    }

    /// Parses TOML; a relative `domain_list` is resolved against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let d = CrawlConfig::default();
        let mut domain_list = match &raw.domain_list {
            Some(p) => parse_domain_list(&read(&base.join(p))?)?,
            None => Vec::new(),
        };
        domain_list.extend(raw.domains);
        let cfg = CrawlConfig {
            domain_list,
            timeout_seconds: raw.timeout_seconds.unwrap_or(d.timeout_seconds),
            passes: raw.passes.unwrap_or(d.passes),
            depth: raw.depth.unwrap_or(d.depth),
            per_host_parallelism: raw.per_host_parallelism.unwrap_or(d.per_host_parallelism),
            site_parallelism: raw.site_parallelism.unwrap_or(d.site_parallelism),
            user_agent: raw.user_agent.unwrap_or(d.user_agent),
            scheme: raw.scheme.unwrap_or(d.scheme).to_ascii_lowercase(),
            politeness_ms: raw.politeness_ms.unwrap_or(d.politeness_ms),
            respect_robots: raw.respect_robots.unwrap_or(d.respect_robots),
            proxy: raw.proxy,
            max_redirects: raw.max_redirects.unwrap_or(d.max_redirects),
            mode: raw.mode.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.timeout_seconds > 0.0 && self.timeout_seconds.is_finite()) {
            return bad("timeout_seconds must be positive");
        }
        if self.passes < 1 {
            return bad("passes must be at least 1");
        }
        if self.per_host_parallelism < 1 || self.site_parallelism < 1 {
            return bad("parallelism must be at least 1");
        }
        if self.scheme != "http" && self.scheme != "https" {
            return bad("scheme must be http or https");
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_seconds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_inline_domains() {
        let cfg = CrawlConfig::from_toml(
            "passes = 2\n[[domains]]\ndomain = \"A.test\"\ncategory = \"news\"\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(cfg.passes, 2);
        assert_eq!(cfg.timeout_seconds, 30.0);
        assert_eq!(cfg.domain_list[0].category.as_deref(), Some("news"));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(CrawlConfig::from_toml("timeout_seconds = 0", Path::new(".")).is_err());
        assert!(CrawlConfig::from_toml("passes = 0", Path::new(".")).is_err());
        assert!(CrawlConfig::from_toml("bogus = 1", Path::new(".")).is_err());
    }

    #[test]
    fn domain_list_csv() {
        let list = parse_domain_list("domain,category\nA.test,news\nb.test,\nc.test\n").unwrap();
        assert_eq!(list.len(), 3);
        assert_eq!(list[0].domain, "a.test");
        assert_eq!(list[1].category, None);
        assert_eq!(list[2].category, None);
    }
}
