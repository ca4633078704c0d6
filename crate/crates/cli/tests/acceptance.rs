//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use beacon_core::report::SampleSummary;
use beacon_testkit::corpus_gen::corpus_strategy;
use beacon_testkit::filter_oracle::{disagreements, generate_rows};
use beacon_testkit::fixture_server::FixtureServer;
use beacon_testkit::invariants::{
    feature_vector_invariants, html_extract_total, image_inspect_total, prefixed_image_bytes, summary_inequalities,
    tag_soup, url_round_trip, url_string,
};
use beacon_testkit::planted::PlantedMatrix;
use beacon_testkit::synthetic_web::{build, compare_summary, crawl_config_toml};
use beacon_testkit::tree_oracle::{check_best_split, check_fit, separable_toys, small_table, training_accuracy};
use beacon_testkit::{check_image_fixture, image_fixtures};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRng, TestRunner};

const CRAWL_BUDGET: Duration = Duration::from_secs(30);
const FIXTURE_BUDGET: Duration = Duration::from_secs(1);
const FILTER_BUDGET: Duration = Duration::from_secs(1);
const TREE_BUDGET: Duration = Duration::from_secs(30);
const EXPERIMENT_BUDGET: Duration = Duration::from_secs(60);
const INVARIANT_BUDGET: Duration = Duration::from_secs(60);

const MIN_IMAGE_FIXTURES: usize = 25;
const MIN_CONFORMANCE_ROWS: usize = 60;
const TREE_CASES: u32 = 500;
const TREE_MAX_ROWS: usize = 12;
const INVARIANT_CASES: u32 = 256;
const FUZZ_CASES: u32 = 2000;

const EXPERIMENT_SEED: u64 = 7;
const ALL_FEATURES_MIN_ACCURACY: f64 = 0.95;
const BLCK_DTOP_TOLERANCE: f64 = 0.08;
const NULL_TOLERANCE: f64 = 0.05;

fn beacon(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_beacon"))
        .args(args)
        .env_remove("BEACON_OUT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!("beacon {} exited with {}: {}", args.join(" "), out.status, String::from_utf8_lossy(&out.stderr)))
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
}

fn within(budget: Duration, t: Instant) -> Result<(), String> {
    let e = t.elapsed();
    if e <= budget {
        Ok(())
    } else {
        Err(format!("took {e:.2?}, budget {budget:?}"))
    }
}

/// Crawl the synthetic web twice through the binary and compare each summary
/// with the construction manifest.
fn synthetic_crawl() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut digests = Vec::new();
    let mut times = Vec::new();
    for run in 0..2 {
        let web = build();
        let server = FixtureServer::start(web.routes).map_err(|e| e.to_string())?;
        std::fs::write(dir.path().join("domains.csv"), &web.domain_list).map_err(|e| e.to_string())?;
        let cfg = dir.path().join("crawl.toml");
        std::fs::write(&cfg, crawl_config_toml(&server.proxy_url(), "domains.csv")).map_err(|e| e.to_string())?;
        let corpus = dir.path().join(format!("corpus{run}"));
        let report = dir.path().join(format!("report{run}"));

        let t = Instant::now();
        beacon(&["crawl", path(&cfg), path(&corpus)])?;
        within(CRAWL_BUDGET, t)?;
        times.push(t.elapsed());
        beacon(&["report", path(&corpus), path(&report)])?;

        let json = std::fs::read_to_string(report.join("summary.json")).map_err(|e| e.to_string())?;
        let summary: SampleSummary = serde_json::from_str(&json).map_err(|e| e.to_string())?;
        let diffs = compare_summary(&web.manifest, &summary);
        if !diffs.is_empty() {
            return Err(format!("run {run}: {}", diffs.join("; ")));
        }
        let outside: Vec<_> = server.requested_hosts().difference(&web.manifest.allowed_hosts).cloned().collect();
        if !outside.is_empty() {
            return Err(format!("requests outside the fixture: {outside:?}"));
        }
        digests.push(std::fs::read(corpus.join("images.jsonl")).map_err(|e| e.to_string())?);
    }
    if digests[0] != digests[1] {
        return Err("image records differ between runs".into());
    }
    Ok(format!("crawl times {:.2?} and {:.2?}", times[0], times[1]))
}

fn image_fixture_suite() -> Result<String, String> {
    let t = Instant::now();
    let fixtures = image_fixtures().map_err(|e| e.to_string())?;
    if fixtures.len() < MIN_IMAGE_FIXTURES {
        return Err(format!("{} fixtures, need {MIN_IMAGE_FIXTURES}", fixtures.len()));
    }
    let failures: Vec<String> = fixtures
        .iter()
        .filter_map(|f| check_image_fixture(f).err().map(|e| format!("{}: {e}", f.filename)))
        .collect();
    if !failures.is_empty() {
        return Err(failures.join("; "));
    }
    within(FIXTURE_BUDGET, t)?;
    Ok(format!("{} fixtures", fixtures.len()))
}

fn filter_conformance() -> Result<String, String> {
    let t = Instant::now();
    let rows = generate_rows();
    if rows.len() < MIN_CONFORMANCE_ROWS {
        return Err(format!("{} rows, need {MIN_CONFORMANCE_ROWS}", rows.len()));
    }
    for needle in ["@@", "third-party", "image"] {
        if !rows.iter().any(|r| r.rules.contains(needle)) {
            return Err(format!("no row exercises {needle}"));
        }
    }
    let bad = disagreements(&rows);
    if !bad.is_empty() {
        return Err(format!("{} disagreements, first {:?}", bad.len(), bad[0]));
    }
    within(FILTER_BUDGET, t)?;
    Ok(format!("{} rows, 0 disagreements", rows.len()))
}

fn tree_oracle() -> Result<String, String> {
    let t = Instant::now();
    runner(TREE_CASES)
        .run(&small_table(TREE_MAX_ROWS), |(rows, labels)| check_best_split(&rows, &labels))
        .map_err(|e| format!("split search: {e}"))?;
    runner(TREE_CASES)
        .run(&(small_table(TREE_MAX_ROWS), 1usize..4), |((rows, labels), m)| check_fit(&rows, &labels, m))
        .map_err(|e| format!("tree growth: {e}"))?;
    for (name, (rows, labels)) in separable_toys() {
        let acc = training_accuracy(&rows, &labels);
        if acc != 1.0 {
            return Err(format!("{name}: training accuracy {acc}"));
        }
    }
    within(TREE_BUDGET, t)?;
    Ok(format!("{TREE_CASES} split cases and {TREE_CASES} tree cases, <= {TREE_MAX_ROWS} rows"))
}

fn mean_accuracy(report: &serde_json::Value) -> Result<f64, String> {
    report["summary"]["accuracy"]["mean"].as_f64().ok_or_else(|| "missing accuracy".to_string())
}

fn planted_experiment() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let csv = dir.path().join("planted.csv");
    std::fs::write(&csv, PlantedMatrix::generate(EXPERIMENT_SEED).to_csv()).map_err(|e| e.to_string())?;
    let seed = EXPERIMENT_SEED.to_string();
    let t = Instant::now();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("exp{run}"));
        beacon(&["experiment", path(&csv), path(&out), "--panel", "both", "--seed", &seed])?;
        outputs.push(std::fs::read(out.join("experiment.json")).map_err(|e| e.to_string())?);
    }
    let null_out = dir.path().join("null");
    beacon(&["experiment", path(&csv), path(&null_out), "--panel", "all", "--permute-labels", "--seed", &seed])?;
    within(EXPERIMENT_BUDGET, t)?;
    if outputs[0] != outputs[1] {
        return Err("experiment output differs between runs".into());
    }
    let panels: Vec<serde_json::Value> = serde_json::from_slice(&outputs[0]).map_err(|e| e.to_string())?;
    let all = mean_accuracy(&panels[0])?;
    let pair = mean_accuracy(&panels[1])?;
    let null: Vec<serde_json::Value> =
        serde_json::from_slice(&std::fs::read(null_out.join("experiment.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let null = mean_accuracy(&null[0])?;
    let detail = format!("all {all:.3}, blck+dtop {pair:.3}, permuted {null:.3}");
    if all < ALL_FEATURES_MIN_ACCURACY {
        return Err(format!("{detail}: all-features accuracy below {ALL_FEATURES_MIN_ACCURACY}"));
    }
    if (pair - 0.5).abs() > BLCK_DTOP_TOLERANCE {
        return Err(format!("{detail}: blck+dtop outside 0.5 +- {BLCK_DTOP_TOLERANCE}"));
    }
    if (null - 0.5).abs() > NULL_TOLERANCE {
        return Err(format!("{detail}: permuted outside 0.5 +- {NULL_TOLERANCE}"));
    }
    Ok(detail)
}

fn invariants() -> Result<String, String> {
    let t = Instant::now();
    runner(INVARIANT_CASES)
        .run(&corpus_strategy(), |(specs, failed)| feature_vector_invariants(&specs, failed))
        .map_err(|e| format!("feature vectors: {e}"))?;
    runner(INVARIANT_CASES)
        .run(&(corpus_strategy(), any::<bool>()), |((specs, failed), psl)| summary_inequalities(&specs, failed, psl))
        .map_err(|e| format!("summary: {e}"))?;
    runner(FUZZ_CASES)
        .run(&url_string(), |raw| url_round_trip(&raw))
        .map_err(|e| format!("url round trip: {e}"))?;
    runner(FUZZ_CASES)
        .run(&proptest::collection::vec(any::<u8>(), 0..512), |b| html_extract_total(&b))
        .map_err(|e| format!("html bytes: {e}"))?;
    runner(FUZZ_CASES)
        .run(&tag_soup(), |s| html_extract_total(s.as_bytes()))
        .map_err(|e| format!("html tag soup: {e}"))?;
    runner(FUZZ_CASES)
        .run(&prefixed_image_bytes(), |b| image_inspect_total(&b))
        .map_err(|e| format!("image headers: {e}"))?;
    within(INVARIANT_BUDGET, t)?;
    Ok(format!("{INVARIANT_CASES} corpus cases per property, {FUZZ_CASES} fuzz cases per target"))
}

type Check = fn() -> Result<String, String>;

fn main() {
    let criteria: [(&str, Check); 6] = [
        ("synthetic crawl matches manifest", synthetic_crawl),
        ("image fixtures", image_fixture_suite),
        ("filter conformance", filter_conformance),
        ("tree oracle", tree_oracle),
        ("planted experiment", planted_experiment),
        ("invariants and fuzzing", invariants),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = check();
        let elapsed = t.elapsed();
        match result {
            Ok(detail) => println!("PASS {} {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} ({elapsed:.2?}): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
