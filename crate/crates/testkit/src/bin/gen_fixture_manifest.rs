//! Rewrites `data/fixture_manifest.json` from the synthetic web construction.

use beacon_testkit::synthetic_web::{build, manifest_path};

fn main() {
    let web = build();
    let text = serde_json::to_string_pretty(&web.manifest).expect("serialize manifest");
    std::fs::write(manifest_path(), text + "\n").expect("write manifest");
    println!("{}", manifest_path().display());
}
