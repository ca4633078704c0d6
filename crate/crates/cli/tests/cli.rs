use std::path::Path;
use std::process::{Command, Output};

use beacon_core::corpus::{store, DomainMode};
use beacon_core::report::SampleSummary;
use beacon_testkit::corpus_gen::{build_corpus, ImgSpec};

fn beacon(args: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beacon"))
        .args(args)
        .env_remove("BEACON_OUT_DIR")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn visible_corpus(dir: &Path) {
    let specs: Vec<ImgSpec> = (0..6)
        .map(|i| ImgSpec {
            site: i % 3,
            host: i % 2,
            salt: i as u32,
            w: 40,
            h: 30,
            query: None,
            cookie: false,
            cache_control: None,
            alt: true,
        })
        .collect();
    store::save(&build_corpus(&specs, 0, &DomainMode::Naive), dir).unwrap();
}

#[test]
fn empty_domain_list_crawls_to_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("domains.csv"), "domain,category\n").unwrap();
    let cfg = dir.path().join("crawl.toml");
    std::fs::write(&cfg, "domain_list = \"domains.csv\"\n").unwrap();
    let out = dir.path().join("corpus");
    let o = beacon(&[Path::new("crawl"), &cfg, &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(store::load(&out).unwrap().sites.is_empty());
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    visible_corpus(&corpus);
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let o = beacon(&[Path::new("report"), &corpus, &file.join("sub")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn corrupt_corpus_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    visible_corpus(&corpus);
    std::fs::write(corpus.join("images.jsonl"), "{not json\n").unwrap();
    let o = beacon(&[Path::new("report"), &corpus, &dir.path().join("r")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_corpus_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = beacon(&[Path::new("report"), &dir.path().join("nope"), &dir.path().join("r")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn featurize_requires_filter_list() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    visible_corpus(&corpus);
    let o = beacon(&[Path::new("featurize"), &corpus, &dir.path().join("f.csv")]);
    assert_eq!(code(&o), 1);
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
}

#[test]
fn report_without_invisible_images() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    visible_corpus(&corpus);
    let out = dir.path().join("r");
    let o = beacon(&[Path::new("report"), &corpus, &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s: SampleSummary = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s.images_total, 6);
    assert_eq!(s.one_by_one_images, 0);
    assert!(s.top_referenced.is_empty());
    let text = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(!text.contains("NaN"));
}

#[test]
fn featurize_then_experiment_on_single_class_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    visible_corpus(&corpus);
    let rules = dir.path().join("rules.txt");
    std::fs::write(&rules, "||t.net^\n").unwrap();
    let csv = dir.path().join("f.csv");
    let o = beacon(&[Path::new("featurize"), &corpus, &csv, Path::new("--filter-list"), &rules]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("f.manifest.json").exists());
    let o = beacon(&[Path::new("experiment"), &csv, &dir.path().join("e")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn feature_knobs_are_recorded_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    visible_corpus(&corpus);
    let rules = dir.path().join("rules.txt");
    std::fs::write(&rules, "||t.net^\n").unwrap();
    let csv = dir.path().join("f.csv");
    let args: Vec<&Path> = ["featurize", "--qdom", "host", "--no-percent-decode", "--unum", "numeric-tokens", "--filter-list"]
        .iter()
        .map(Path::new)
        .chain([rules.as_path(), corpus.as_path(), csv.as_path()])
        .collect();
    let o = beacon(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["qdom"], "host");
    assert_eq!(m["qdom_percent_decode"], false);
    assert_eq!(m["unum"], "numeric-tokens");
    assert_eq!(m["filter_case"], "host-insensitive");
}

#[test]
fn unstratified_experiment_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    std::fs::write(&csv, beacon_testkit::planted::PlantedMatrix::generate(3).to_csv()).unwrap();
    let out = dir.path().join("e");
    let args: Vec<&Path> = [csv.as_path(), out.as_path()]
        .into_iter()
        .chain(["--no-stratify", "--resamples", "3", "--panel", "all"].iter().map(Path::new))
        .collect();
    let o = beacon(&[&[Path::new("experiment")], args.as_slice()].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("experiment.json")).unwrap()).unwrap();
    assert_eq!(r[0]["config"]["cv"]["stratified"], false);
}
