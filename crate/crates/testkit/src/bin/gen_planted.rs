//! Writes a planted-signal feature matrix: `gen_planted <seed> <out.csv>`.

use beacon_testkit::planted::PlantedMatrix;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let (Some(seed), Some(out)) = (args.get(1).and_then(|s| s.parse().ok()), args.get(2)) else {
        eprintln!("usage: gen_planted <seed> <out.csv>");
        std::process::exit(1);
    };
    std::fs::write(out, PlantedMatrix::generate(seed).to_csv()).expect("write matrix");
}
