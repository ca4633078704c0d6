use beacon_core::corpus::{store, DomainMode};
use beacon_testkit::corpus_gen::{build_corpus, corpus_strategy};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn save_load_identity((specs, failed) in corpus_strategy()) {
        let corpus = build_corpus(&specs, failed, &DomainMode::Naive);
        let dir = tempfile::tempdir().unwrap();
        store::save(&corpus, dir.path()).unwrap();
        let back = store::load(dir.path()).unwrap();
        prop_assert_eq!(&back.sites, &corpus.sites);
        prop_assert_eq!(&back.pages, &corpus.pages);
        prop_assert_eq!(&back.images, &corpus.images);
        prop_assert_eq!(back.dedup_keys(), corpus.dedup_keys());
        prop_assert_eq!(back.dedup_keys().len(), back.images.len());
        prop_assert_eq!(back.digest(), corpus.digest());
    }
}

#[test]
fn staging_commit_and_abort() {
    let corpus = build_corpus(&[], 0, &DomainMode::Naive);
    let root = tempfile::tempdir().unwrap();
    let dest = root.path().join("out");
    {
        let staging = store::Staging::begin(&dest).unwrap();
        staging.put_blob(&beacon_core::image_inspect::content_digest(b"x"), b"x").unwrap();
    }
    assert!(!dest.exists());
    assert_eq!(std::fs::read_dir(root.path()).unwrap().count(), 0);
    let staging = store::Staging::begin(&dest).unwrap();
    let d = beacon_core::image_inspect::content_digest(b"abc");
    staging.put_blob(&d, b"abc").unwrap();
    staging.commit(&corpus).unwrap();
    assert_eq!(store::read_blob(&dest, &d).unwrap(), b"abc");
    assert_eq!(store::load(&dest).unwrap().sites.len(), 4);
}

#[test]
fn corrupt_lines_are_reported() {
    let corpus = build_corpus(&[], 0, &DomainMode::Naive);
    let dir = tempfile::tempdir().unwrap();
    store::save(&corpus, dir.path()).unwrap();
    std::fs::write(dir.path().join("pages.jsonl"), "{not json}\n").unwrap();
    assert!(store::load(dir.path()).is_err());
}
