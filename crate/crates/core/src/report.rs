//! Sample summaries of a corpus: headline counts, MIME and category
//! breakdowns and the top-15 domain tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{second_level_domain, Corpus, DomainMode};

pub const TOP_N: usize = 15;

/// Percentage with one decimal; zero when the denominator is zero.
pub fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        return 0.0;
    }
    (part as f64 * 1000.0 / whole as f64).round() / 10.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub key: String,
    pub images: usize,
    pub one_by_one: usize,
    pub one_by_one_cross_domain: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: String,
    pub sites: usize,
    pub sites_ok: usize,
    pub images: usize,
    pub one_by_one_cross_domain: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainCount {
    pub domain: String,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub mode: String,
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
    pub mime: Vec<BreakdownRow>,
    pub categories: Vec<CategoryRow>,
    /// Sites referencing the most 1x1 cross-domain images.
    pub top_referencing: Vec<DomainCount>,
    /// Second-level domains serving the most 1x1 cross-domain images.
    pub top_referenced: Vec<DomainCount>,
}

fn top(counts: HashMap<String, usize>, n: usize) -> Vec<DomainCount> {
    let mut v: Vec<DomainCount> = counts
        .into_iter()
        .map(|(domain, count)| DomainCount { domain, count })
        .collect();
    v.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.domain.cmp(&b.domain)));
    v.truncate(n);
    v
}

impl SampleSummary {
    pub fn compute(corpus: &Corpus, mode: &DomainMode) -> Self {
        let mut s = SampleSummary {
            mode: mode.name().to_string(),
            domains_listed: corpus.sites.len(),
            domains_sampled_ok: corpus.sites.iter().filter(|x| x.sampled_ok).count(),
            pages: corpus.pages.len(),
            images_total: corpus.images.len(),
            parse_failures: corpus.skipped.iter().filter(|x| x.reason.is_parse_failure()).count(),
            skipped: corpus.skipped.len(),
            ..Default::default()
        };
        let mut mime: BTreeMap<String, BreakdownRow> = BTreeMap::new();
        let mut site_images: HashMap<&str, (usize, usize)> = HashMap::new();
        let mut referencing: HashMap<String, usize> = HashMap::new();
        let mut referenced: HashMap<String, usize> = HashMap::new();
        for img in &corpus.images {
            let beacon = img.is_invisible && img.is_cross_domain;
            s.cross_domain_images += img.is_cross_domain as usize;
            s.cross_origin_images += img.is_cross_origin as usize;
            s.one_by_one_images += img.is_invisible as usize;
            s.one_by_one_cross_domain += beacon as usize;
            let row = mime.entry(img.mime.as_str().to_string()).or_default();
            row.images += 1;
            row.one_by_one += img.is_invisible as usize;
            row.one_by_one_cross_domain += beacon as usize;
            let per_site = site_images.entry(img.site_domain.as_str()).or_default();
            per_site.0 += 1;
            per_site.1 += beacon as usize;
            if beacon {
                *referencing.entry(img.site_domain.clone()).or_default() += 1;
                *referenced
                    .entry(second_level_domain(img.resolved_url.host(), mode))
                    .or_default() += 1;
            }
        }
        s.mime = mime
            .into_iter()
            .map(|(key, row)| BreakdownRow { key, ..row })
            .collect();
        s.mime.sort_by(|a, b| b.images.cmp(&a.images).then_with(|| a.key.cmp(&b.key)));

        if corpus.sites.iter().any(|x| x.category.is_some()) {
            let mut cats: BTreeMap<String, CategoryRow> = BTreeMap::new();
            for site in &corpus.sites {
                let name = site.category.clone().unwrap_or_else(|| "uncategorized".into());
                let row = cats.entry(name.clone()).or_insert_with(|| CategoryRow {
                    category: name,
                    ..Default::default()
                });
                row.sites += 1;
                row.sites_ok += site.sampled_ok as usize;
                let (images, beacons) = site_images.get(site.domain.as_str()).copied().unwrap_or_default();
                row.images += images;
                row.one_by_one_cross_domain += beacons;
            }
            s.categories = cats.into_values().collect();
        }
        s.top_referencing = top(referencing, TOP_N);
        s.top_referenced = top(referenced, TOP_N);
        s
    }

    /// Share of listed domains sampled successfully, in percent.
    pub fn success_rate(&self) -> f64 {
        percent(self.domains_sampled_ok, self.domains_listed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let t = self.images_total;
        let _ = writeln!(out, "Sample characteristics ({} domain mode)", self.mode);
        let _ = writeln!(
            out,
            "{:<46} {:>8}  ({:.1}% of {})",
            "Domains sampled successfully",
            self.domains_sampled_ok,
            self.success_rate(),
            self.domains_listed
        );
        let _ = writeln!(out, "{:<46} {:>8}", "All images from <img> tags", t);
        for (label, n) in [
            ("  - cross-domain images", self.cross_domain_images),
            ("  - 1x1 images", self.one_by_one_images),
            ("  - 1x1 cross-domain images", self.one_by_one_cross_domain),
        ] {
            let _ = writeln!(out, "{label:<46} {n:>8}  ({:.1}%)", percent(n, t));
        }
        let _ = writeln!(out, "{:<46} {:>8}", "Cross-origin images", self.cross_origin_images);
        let _ = writeln!(out, "{:<46} {:>8}", "Image parse failures", self.parse_failures);
        let _ = writeln!(out, "{:<46} {:>8}", "Skipped image references", self.skipped);

        let _ = writeln!(out, "\nMIME types");
        let _ = writeln!(out, "{:<24} {:>8} {:>7} {:>8} {:>8}", "type", "images", "%", "1x1", "1x1 xd");
        for r in &self.mime {
            let _ = writeln!(
                out,
                "{:<24} {:>8} {:>7.1} {:>8} {:>8}",
                r.key,
                r.images,
                percent(r.images, t),
                r.one_by_one,
                r.one_by_one_cross_domain
            );
        }
        if !self.categories.is_empty() {
            let _ = writeln!(out, "\nCategories");
            let _ = writeln!(out, "{:<24} {:>6} {:>6} {:>8} {:>8}", "category", "sites", "ok", "images", "1x1 xd");
            for r in &self.categories {
                let _ = writeln!(
                    out,
                    "{:<24} {:>6} {:>6} {:>8} {:>8}",
                    r.category, r.sites, r.sites_ok, r.images, r.one_by_one_cross_domain
                );
            }
        }
        for (title, rows) in [
            ("Top referencing domains (1x1 cross-domain)", &self.top_referencing),
            ("Top referenced second-level domains (1x1 cross-domain)", &self.top_referenced),
        ] {
            let _ = writeln!(out, "\n{title}");
            for (i, r) in rows.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{:>2}. {:<40} {:>6} {:>6.1}%",
                    i + 1,
                    r.domain,
                    r.count,
                    percent(r.count, self.one_by_one_cross_domain)
                );
            }
        }
        out
    }

    /// Machine-readable twins of the text tables, as (file name, CSV text).
    pub fn csv_tables(&self) -> Result<Vec<(&'static str, String)>, csv::Error> {
        fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, csv::Error> {
            let bytes = w.into_inner().map_err(|e| e.into_error())?;
            Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
        }
        let t = self.images_total;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["metric", "count", "percent"])?;
        let pct = |n| format!("{:.1}", percent(n, t));
        let rows: [(&str, usize, String); 9] = [
            ("domains_listed", self.domains_listed, String::new()),
            ("domains_sampled_ok", self.domains_sampled_ok, format!("{:.1}", self.success_rate())),
            ("pages", self.pages, String::new()),
            ("images_total", t, pct(t)),
            ("cross_domain_images", self.cross_domain_images, pct(self.cross_domain_images)),
            ("one_by_one_images", self.one_by_one_images, pct(self.one_by_one_images)),
            ("one_by_one_cross_domain", self.one_by_one_cross_domain, pct(self.one_by_one_cross_domain)),
            ("cross_origin_images", self.cross_origin_images, pct(self.cross_origin_images)),
            ("parse_failures", self.parse_failures, String::new()),
        ];
        for (k, n, p) in rows {
            w.write_record([k, &n.to_string(), &p])?;
        }
        let summary = finish(w)?;

        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["mime", "images", "percent", "one_by_one", "one_by_one_cross_domain"])?;
        for r in &self.mime {
            w.write_record([
                r.key.clone(),
                r.images.to_string(),
                format!("{:.1}", percent(r.images, t)),
                r.one_by_one.to_string(),
                r.one_by_one_cross_domain.to_string(),
            ])?;
        }
        let mime = finish(w)?;

        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["category", "sites", "sites_ok", "images", "one_by_one_cross_domain"])?;
        for r in &self.categories {
            w.write_record([
                r.category.clone(),
                r.sites.to_string(),
                r.sites_ok.to_string(),
                r.images.to_string(),
                r.one_by_one_cross_domain.to_string(),
            ])?;
        }
        let categories = finish(w)?;

        let domain_table = |rows: &[DomainCount]| -> Result<String, csv::Error> {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["rank", "domain", "count", "percent"])?;
            for (i, r) in rows.iter().enumerate() {
                w.write_record([
                    (i + 1).to_string(),
                    r.domain.clone(),
                    r.count.to_string(),
                    format!("{:.1}", percent(r.count, self.one_by_one_cross_domain)),
                ])?;
            }
            finish(w)
        };
        Ok(vec![
            ("summary.csv", summary),
            ("mime.csv", mime),
            ("categories.csv", categories),
            ("top_referencing.csv", domain_table(&self.top_referencing)?),
            ("top_referenced.csv", domain_table(&self.top_referenced)?),
        ])
    }
}
