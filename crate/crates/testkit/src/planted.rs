//! Feature matrices with a planted label signal.
//!
//! Positives have `unum` in 8..=20 and `mage` of -1 or 0. Every negative
//! falls outside that box: either `unum <= 5` or `mage >= 600`. All other
//! columns, `blck` and `dtop_*` included, are drawn independently of the label.

use beacon_core::features::{FEATURE_NAMES, LABEL_NAME};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const POSITIVES: usize = 235;
pub const NEGATIVES: usize = 705;

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedMatrix {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

fn column(name: &str) -> usize {
    FEATURE_NAMES.iter().position(|n| *n == name).expect("known feature")
}

fn row(rng: &mut ChaCha8Rng, positive: bool) -> Vec<f64> {
    let mut v = vec![0.0; FEATURE_NAMES.len()];
    let bit = |rng: &mut ChaCha8Rng| if rng.random_bool(0.5) { 1.0 } else { 0.0 };
    let qurl = bit(rng);
    v[column("qurl")] = qurl;
    v[column("qdom")] = qurl * bit(rng);
    for name in ["corg", "blck", "aalt", "asty", "etag", "cook", "noch"] {
        v[column(name)] = bit(rng);
    }
    let mime = rng.random_range(0..5);
    v[column("mime_gif") + mime] = 1.0;
    // dtop: at most one of the five is set.
    let top = rng.random_range(0..6);
    if top < 5 {
        v[column("dtop_1") + top] = 1.0;
    }
    let (unum, mage) = if positive {
        (rng.random_range(8..=20), rng.random_range(-1..=0))
    } else if rng.random_bool(0.5) {
        (rng.random_range(0..=5), rng.random_range(-1..=100_000))
    } else {
        (rng.random_range(0..=30), rng.random_range(600..=100_000))
    };
    v[column("unum")] = unum as f64;
    v[column("mage")] = mage as f64;
    v
}

impl PlantedMatrix {
    pub fn generate(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels: Vec<bool> = (0..POSITIVES + NEGATIVES).map(|i| i < POSITIVES).collect();
        labels.shuffle(&mut rng);
        let rows = labels.iter().map(|&l| row(&mut rng, l)).collect();
        PlantedMatrix { rows, labels }
    }

    /// Same rows with the labels shuffled.
    pub fn permuted(&self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels = self.labels.clone();
        labels.shuffle(&mut rng);
        PlantedMatrix {
            rows: self.rows.clone(),
            labels,
        }
    }

    /// CSV in the featurize layout: feature columns then `label`.
    pub fn to_csv(&self) -> String {
        let mut out = FEATURE_NAMES.join(",");
        out.push(',');
        out.push_str(LABEL_NAME);
        out.push('\n');
        for (r, l) in self.rows.iter().zip(&self.labels) {
            for x in r {
                out.push_str(&format!("{x},"));
            }
            out.push_str(if *l { "1\n" } else { "0\n" });
        }
        out
    }
}
