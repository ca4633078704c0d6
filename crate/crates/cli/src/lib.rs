//! The `beacon` command line: crawl, ingest, report, featurize, experiment.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use beacon_core::classifier::{
    permute_labels, render_table, Aggregation, CvConfig, Dataset, ExperimentConfig, ExperimentReport,
    FeatureSubset, TreeConfig,
};
use beacon_core::corpus::{store, DomainMode};
use beacon_core::features::{featurize_corpus, FeatureConfig, FeatureMatrix, QdomTarget, UnumMode};
use beacon_core::filter_engine::{CaseMode, FilterSet};
use beacon_core::report::SampleSummary;
use beacon_core::{ClassifierError, CorpusError};
use beacon_crawl::{ingest, CrawlConfig, CrawlError, Crawler, ModeName};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Environment variable naming the base output directory.
pub const OUT_DIR_ENV: &str = "BEACON_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "beacon", version, about = "Survey of invisible third-party images")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Second-level domain rule.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Naive)]
    pub mode: Mode,
    /// Adblock-style filter list used by `featurize`.
    #[arg(long, global = true)]
    pub filter_list: Option<PathBuf>,
    /// Link depth override for `crawl`.
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    /// Per-fetch timeout override in seconds.
    #[arg(long, global = true)]
    pub timeout: Option<f64>,
    /// Number of crawl passes override.
    #[arg(long, global = true)]
    pub passes: Option<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Naive,
    Psl,
}

impl Mode {
    fn domain_mode(self) -> DomainMode {
        match self {
            Mode::Naive => DomainMode::Naive,
            Mode::Psl => DomainMode::psl(),
        }
    }

    fn name(self) -> ModeName {
        match self {
            Mode::Naive => ModeName::Naive,
            Mode::Psl => ModeName::Psl,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Panel {
    All,
    BlckDtop,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QdomArg {
    Sld,
    Host,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum UnumArg {
    Digits,
    NumericTokens,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FilterCase {
    HostInsensitive,
    Lowercase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AggregationArg {
    Pooled,
    PerResample,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Crawl the sites of a config file into a corpus directory.
    Crawl {
        config: PathBuf,
        out_dir: Option<PathBuf>,
        /// Fetch pages even where robots.txt disallows them.
        #[arg(long)]
        ignore_robots: bool,
    },
    /// Build a corpus from pre-rendered page snapshots.
    Ingest {
        snapshot_dir: PathBuf,
        out_dir: Option<PathBuf>,
        /// Crawl config supplying network settings and categories.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print sample characteristics and write their CSV tables.
    Report { corpus_dir: PathBuf, out_dir: Option<PathBuf> },
    /// Compute the feature matrix of a corpus.
    Featurize {
        corpus_dir: PathBuf,
        out_csv: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FilterCase::HostInsensitive)]
        filter_case: FilterCase,
        /// What a query string must mention to set qdom.
        #[arg(long, value_enum, default_value_t = QdomArg::Sld)]
        qdom: QdomArg,
        /// Match qdom against the raw query instead of the percent-decoded one.
        #[arg(long)]
        no_percent_decode: bool,
        #[arg(long, value_enum, default_value_t = UnumArg::Digits)]
        unum: UnumArg,
    },
    /// Cross-validated decision-tree experiment over a feature matrix.
    Experiment {
        features_csv: PathBuf,
        out_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 250)]
        resamples: usize,
        /// Folds per resample.
        #[arg(long, short = 'k', default_value_t = 10)]
        folds: usize,
        #[arg(long, value_enum, default_value_t = Panel::Both)]
        panel: Panel,
        /// Explicit feature columns, comma separated; overrides --panel.
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = AggregationArg::Pooled)]
        aggregation: AggregationArg,
        #[arg(long)]
        max_depth: Option<usize>,
        /// Shuffle labels before running (null model).
        #[arg(long)]
        permute_labels: bool,
        /// Assign folds without preserving class proportions.
        #[arg(long)]
        no_stratify: bool,
        #[arg(long, value_enum, default_value_t = Precision::F64)]
        precision: Precision,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Crawl(#[from] CrawlError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    /// 1 for usage, config and input problems; 2 for corrupt data.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Corpus(CorpusError::Io { .. }) => 1,
            CliError::Corpus(_) => 2,
            CliError::Crawl(CrawlError::Corpus(CorpusError::Io { .. })) => 1,
            CliError::Crawl(CrawlError::Corpus(_)) => 2,
            CliError::Classifier(ClassifierError::Parse { .. } | ClassifierError::RaggedRow { .. }) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, text: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    std::fs::write(path, text).map_err(io_err(path))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

/// Explicit argument, else `$BEACON_OUT_DIR/<name>`, else `beacon-out/<name>`.
pub fn out_path(explicit: Option<PathBuf>, name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("beacon-out"))
            .join(name)
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

/// Provenance written next to a feature matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub corpus_digest: String,
    pub filter_digest: String,
    pub filter_rules: usize,
    pub filter_skipped: usize,
    pub filter_case: String,
    pub mode: String,
    pub qdom: String,
    pub qdom_percent_decode: bool,
    pub unum: String,
    pub rows: usize,
    pub positives: usize,
    pub top_domains: Vec<(String, usize)>,
    pub features_sha256: String,
}

fn value_name(v: impl ValueEnum) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

pub fn manifest_path_for(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

fn apply_overrides(cfg: &mut CrawlConfig, g: &Global) {
    if let Some(d) = g.depth {
        cfg.depth = d;
    }
    if let Some(t) = g.timeout {
        cfg.timeout_seconds = t;
    }
    if let Some(p) = g.passes {
        cfg.passes = p;
    }
    cfg.mode = g.mode.name();
}

fn print_outcome(out: &beacon_crawl::CrawlOutput) {
    let c = &out.corpus;
    for s in &c.sites {
        let status = match s.successful_pass {
            Some(p) => format!("ok (pass {p})"),
            None => "failed".to_string(),
        };
        println!("{:<40} {status}", s.domain);
    }
    println!(
        "{} sites, {} sampled ok, {} pages, {} images, {} skipped references",
        c.sites.len(),
        c.sites.iter().filter(|s| s.sampled_ok).count(),
        c.pages.len(),
        c.images.len(),
        c.skipped.len()
    );
}

fn crawl(g: &Global, config: &Path, out: Option<PathBuf>, ignore_robots: bool) -> Result<(), CliError> {
    let mut cfg = CrawlConfig::load(config).map_err(CrawlError::from)?;
    apply_overrides(&mut cfg, g);
    if ignore_robots {
        cfg.respect_robots = false;
    }
    cfg.validate().map_err(CrawlError::from)?;
    let out = out_path(out, "corpus");
    let result = Crawler::new(cfg)?.run()?;
    let dir = result.write(&out)?;
    print_outcome(&result);
    println!("corpus written to {}", dir.display());
    Ok(())
}

fn ingest_cmd(g: &Global, snapshots: &Path, out: Option<PathBuf>, config: Option<PathBuf>) -> Result<(), CliError> {
    let mut cfg = match config {
        Some(p) => CrawlConfig::load(&p).map_err(CrawlError::from)?,
        None => CrawlConfig::default(),
    };
    apply_overrides(&mut cfg, g);
    cfg.validate().map_err(CrawlError::from)?;
    let out = out_path(out, "corpus");
    let result = ingest(&Crawler::new(cfg)?, snapshots)?;
    let dir = result.write(&out)?;
    print_outcome(&result);
    println!("corpus written to {}", dir.display());
    Ok(())
}

fn report(g: &Global, corpus_dir: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let corpus = store::load(corpus_dir)?;
    let summary = SampleSummary::compute(&corpus, &g.mode.domain_mode());
    let out = out_path(out, "report");
    let text = summary.to_text();
    write(&out.join("report.txt"), &text)?;
    write(&out.join("summary.json"), json(&summary))?;
    for (name, table) in summary.csv_tables().map_err(|e| CliError::Other(e.to_string()))? {
        write(&out.join(name), table)?;
    }
    print!("{text}");
    Ok(())
}

struct FeaturizeArgs {
    case: FilterCase,
    qdom: QdomArg,
    percent_decode: bool,
    unum: UnumArg,
}

fn featurize(g: &Global, corpus_dir: &Path, out: Option<PathBuf>, a: FeaturizeArgs) -> Result<(), CliError> {
    let case = a.case;
    let filter_path = g
        .filter_list
        .as_deref()
        .ok_or_else(|| CliError::Usage("featurize needs --filter-list".into()))?;
    let case_mode = match case {
        FilterCase::HostInsensitive => CaseMode::HostInsensitive,
        FilterCase::Lowercase => CaseMode::Lowercase,
    };
    let filters = FilterSet::parse(&read(filter_path)?, case_mode);
    let corpus = store::load(corpus_dir)?;
    let config = FeatureConfig {
        mode: g.mode.domain_mode(),
        qdom_target: match a.qdom {
            QdomArg::Sld => QdomTarget::Sld,
            QdomArg::Host => QdomTarget::Host,
        },
        qdom_percent_decode: a.percent_decode,
        unum: match a.unum {
            UnumArg::Digits => UnumMode::Digits,
            UnumArg::NumericTokens => UnumMode::NumericTokens,
        },
        ..FeatureConfig::default()
    };
    let matrix: FeatureMatrix =
        featurize_corpus(&corpus, &filters, &config).map_err(|e| CliError::Corpus(CorpusError::Corrupt(e.to_string())))?;
    let csv = matrix.to_csv();
    let out = out_path(out, "features.csv");
    write(&out, &csv)?;
    let manifest = FeatureManifest {
        corpus_digest: corpus.digest().to_hex(),
        filter_digest: filters.digest().to_hex(),
        filter_rules: filters.blocking().count() + filters.exceptions().count(),
        filter_skipped: filters.skipped(),
        filter_case: value_name(case),
        mode: config.mode.name().to_string(),
        qdom: value_name(a.qdom),
        qdom_percent_decode: a.percent_decode,
        unum: value_name(a.unum),
        rows: matrix.vectors.len(),
        positives: matrix.vectors.iter().filter(|v| v.label).count(),
        top_domains: matrix.top.entries.clone(),
        features_sha256: sha256_hex(csv.as_bytes()),
    };
    write(&manifest_path_for(&out), json(&manifest))?;
    println!(
        "{} rows ({} positive) written to {}",
        manifest.rows,
        manifest.positives,
        out.display()
    );
    Ok(())
}

struct ExperimentArgs {
    resamples: usize,
    folds: usize,
    panel: Panel,
    features: Option<Vec<String>>,
    aggregation: AggregationArg,
    max_depth: Option<usize>,
    permute: bool,
    stratified: bool,
}

fn run_experiment<T: beacon_core::classifier::Scalar>(
    text: &str,
    seed: u64,
    a: &ExperimentArgs,
) -> Result<Vec<ExperimentReport>, CliError> {
    let mut data: Dataset<T> = Dataset::from_csv(text)?;
    if a.permute {
        data = data.with_labels(permute_labels(data.labels(), seed))?;
    }
    let subsets = match (&a.features, a.panel) {
        (Some(cols), _) => vec![FeatureSubset::Columns(cols.clone())],
        (None, Panel::All) => vec![FeatureSubset::All],
        (None, Panel::BlckDtop) => vec![FeatureSubset::BlckDtop],
        (None, Panel::Both) => vec![FeatureSubset::All, FeatureSubset::BlckDtop],
    };
    let base = ExperimentConfig {
        resamples: a.resamples,
        seed,
        cv: CvConfig {
            folds: a.folds,
            stratified: a.stratified,
            tree: TreeConfig {
                max_depth: a.max_depth,
                seed,
                ..TreeConfig::default()
            },
        },
        aggregation: match a.aggregation {
            AggregationArg::Pooled => Aggregation::Pooled,
            AggregationArg::PerResample => Aggregation::PerResampleMean,
        },
        subset: FeatureSubset::All,
    };
    let mut reports = Vec::new();
    for subset in subsets {
        let mut r = beacon_core::classifier::experiment(&data, &ExperimentConfig { subset, ..base.clone() })?;
        if a.permute {
            r.panel.push_str(" (permuted labels)");
        }
        reports.push(r);
    }
    Ok(reports)
}

fn experiment(g: &Global, csv: &Path, out: Option<PathBuf>, a: ExperimentArgs, precision: Precision) -> Result<(), CliError> {
    let text = read(csv)?;
    if a.resamples == 0 || a.folds < 2 {
        return Err(CliError::Usage("need --resamples >= 1 and --folds >= 2".into()));
    }
    let mut reports = match precision {
        Precision::F32 => run_experiment::<f32>(&text, g.seed, &a)?,
        Precision::F64 => run_experiment::<f64>(&text, g.seed, &a)?,
    };
    if let Ok(m) = read(&manifest_path_for(csv)) {
        let m: FeatureManifest = serde_json::from_str(&m).map_err(|e| CliError::Other(e.to_string()))?;
        for r in &mut reports {
            r.filter_digest = Some(m.filter_digest.clone());
            r.corpus_digest = Some(m.corpus_digest.clone());
        }
    }
    let out = out_path(out, "experiment");
    let table = render_table(&reports);
    write(&out.join("experiment.json"), json(&reports))?;
    write(&out.join("experiment.txt"), &table)?;
    print!("{table}");
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    match cli.command {
        Command::Crawl {
            config,
            out_dir,
            ignore_robots,
        } => crawl(g, &config, out_dir, ignore_robots),
        Command::Ingest {
            snapshot_dir,
            out_dir,
            config,
        } => ingest_cmd(g, &snapshot_dir, out_dir, config),
        Command::Report { corpus_dir, out_dir } => report(g, &corpus_dir, out_dir),
        Command::Featurize {
            corpus_dir,
            out_csv,
            filter_case,
            qdom,
            no_percent_decode,
            unum,
        } => featurize(
            g,
            &corpus_dir,
            out_csv,
            FeaturizeArgs {
                case: filter_case,
                qdom,
                percent_decode: !no_percent_decode,
                unum,
            },
        ),
        Command::Experiment {
            features_csv,
            out_dir,
            resamples,
            folds,
            panel,
            features,
            aggregation,
            max_depth,
            permute_labels,
            no_stratify,
            precision,
        } => experiment(
            g,
            &features_csv,
            out_dir,
            ExperimentArgs {
                resamples,
                folds,
                panel,
                features,
                aggregation,
                max_depth,
                permute: permute_labels,
                stratified: !no_stratify,
            },
            precision,
        ),
    }
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["beacon", "experiment", "f.csv", "--seed", "7", "--panel", "both"]).unwrap();
        assert_eq!(cli.global.seed, 7);
        assert!(matches!(cli.command, Command::Experiment { panel: Panel::Both, .. }));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["beacon", "nonsense"]), 1);
        assert_eq!(run(["beacon", "--help"]), 0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Corpus(CorpusError::Corrupt("x".into())).exit_code(), 2);
        assert_eq!(CliError::Classifier(ClassifierError::SingleClass).exit_code(), 1);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
    }

    #[test]
    fn manifest_path_sits_next_to_csv() {
        assert_eq!(manifest_path_for(Path::new("out/features.csv")), PathBuf::from("out/features.manifest.json"));
    }
}
