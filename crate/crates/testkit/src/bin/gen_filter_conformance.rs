//! Rewrites `data/filter_conformance.csv` from the regex oracle.

use beacon_testkit::filter_oracle::{conformance_path, generate_rows, write_rows};

fn main() {
    let rows = generate_rows();
    let text = write_rows(&rows).expect("serialize rows");
    std::fs::write(conformance_path(), text).expect("write conformance file");
    println!("{} rows -> {}", rows.len(), conformance_path().display());
}
