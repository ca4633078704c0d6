//! Brute-force reference implementations for the split search and the
//! greedy tree, plus the property checks that compare against them.

use beacon_core::classifier::{best_split, fit, Dataset, TreeConfig, TreeNode};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

const TIE: f64 = 1e-12;

/// Feature rows and their labels.
pub type Table = (Vec<Vec<f64>>, Vec<bool>);

pub fn impurity(labels: &[bool]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let p = labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

/// Every (feature, midpoint) pair, scored from scratch. With `allow_zero`,
/// splits that leave the impurity unchanged are admissible too.
pub fn oracle_split(rows: &[Vec<f64>], labels: &[bool], min_leaf: usize, allow_zero: bool) -> Option<(usize, f64, f64)> {
    let n = rows.len() as f64;
    let parent = impurity(labels);
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..rows[0].len() {
        let mut vals: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left: Vec<bool> = (0..rows.len()).filter(|&i| rows[i][f] <= t).map(|i| labels[i]).collect();
            let right: Vec<bool> = (0..rows.len()).filter(|&i| rows[i][f] > t).map(|i| labels[i]).collect();
            if left.len() < min_leaf || right.len() < min_leaf {
                continue;
            }
            let dec = parent
                - left.len() as f64 / n * impurity(&left)
                - right.len() as f64 / n * impurity(&right);
            if dec <= TIE && !(allow_zero && dec > -TIE) {
                continue;
            }
            match best {
                Some((_, _, b)) if dec <= b + TIE => {}
                _ => best = Some((f, t, dec)),
            }
        }
    }
    best
}

pub fn oracle_tree(rows: &[Vec<f64>], labels: &[bool], min_leaf: usize) -> TreeNode<f64> {
    let pos = labels.iter().filter(|&&l| l).count();
    let leaf = TreeNode::Leaf {
        predicted_label: pos * 2 > labels.len(),
        class_counts: [labels.len() - pos, pos],
    };
    if pos == 0 || pos == labels.len() || labels.len() < 2 * min_leaf {
        return leaf;
    }
    let Some((f, t, _)) = oracle_split(rows, labels, min_leaf, true) else { return leaf };
    let side = |left: bool| -> (Vec<Vec<f64>>, Vec<bool>) {
        (0..rows.len())
            .filter(|&i| (rows[i][f] <= t) == left)
            .map(|i| (rows[i].clone(), labels[i]))
            .unzip()
    };
    let (lr, ll) = side(true);
    let (rr, rl) = side(false);
    TreeNode::Split {
        feature_index: f,
        threshold: t,
        left: Box::new(oracle_tree(&lr, &ll, min_leaf)),
        right: Box::new(oracle_tree(&rr, &rl, min_leaf)),
    }
}

/// Tables of 2..=`max_rows` rows and 1 to 4 features on a coarse grid, so
/// ties and repeated values are common.
pub fn small_table(max_rows: usize) -> impl Strategy<Value = Table> {
    (1usize..=4, 2usize..=max_rows).prop_flat_map(|(f, n)| {
        (
            proptest::collection::vec(
                proptest::collection::vec(prop_oneof![(0i32..4).prop_map(f64::from), (-8i32..8).prop_map(|v| v as f64 / 2.0)], f),
                n,
            ),
            proptest::collection::vec(any::<bool>(), n),
        )
    })
}

pub fn dataset(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Dataset<f64> {
    let names = (0..rows[0].len()).map(|i| format!("x{i}")).collect();
    Dataset::new(names, rows, labels).unwrap()
}

pub fn check_best_split(rows: &[Vec<f64>], labels: &[bool]) -> Result<(), TestCaseError> {
    let features: Vec<usize> = (0..rows[0].len()).collect();
    let got = best_split(rows, labels, &features);
    let want = oracle_split(rows, labels, 1, false);
    match (got, want) {
        (None, None) => {}
        (Some(g), Some((f, t, d))) => {
            prop_assert_eq!(g.feature, f);
            prop_assert_eq!(g.threshold, t);
            prop_assert!((g.impurity_decrease - d).abs() < 1e-9);
        }
        (g, w) => prop_assert!(false, "got {:?}, want {:?}", g, w),
    }
    Ok(())
}

pub fn check_fit(rows: &[Vec<f64>], labels: &[bool], min_leaf: usize) -> Result<(), TestCaseError> {
    let d = dataset(rows.to_vec(), labels.to_vec());
    let config = TreeConfig {
        min_samples_leaf: min_leaf,
        ..Default::default()
    };
    let tree = fit(&d, &config).unwrap();
    prop_assert_eq!(&tree, &oracle_tree(rows, labels, min_leaf));
    for leaf in tree.leaves() {
        let TreeNode::Leaf { class_counts, .. } = leaf else { unreachable!() };
        prop_assert!(class_counts[0] + class_counts[1] >= min_leaf.min(rows.len()));
    }
    Ok(())
}

/// Labels that are a function of the row keep the table consistent, so a
/// fully grown tree must classify every training row correctly.
pub fn check_consistent_fit(rows: &[Vec<f64>], seed: u64) -> Result<(), TestCaseError> {
    let labels: Vec<bool> = rows
        .iter()
        .map(|r| (r.iter().map(|v| (v * 2.0) as i64).sum::<i64>() + seed as i64 % 3).rem_euclid(3) == 0)
        .collect();
    prop_assert!(training_accuracy(rows, &labels) == 1.0);
    Ok(())
}

pub fn training_accuracy(rows: &[Vec<f64>], labels: &[bool]) -> f64 {
    let tree = fit(&dataset(rows.to_vec(), labels.to_vec()), &TreeConfig::default()).unwrap();
    let hits = rows.iter().zip(labels).filter(|(r, l)| tree.predict(r) == **l).count();
    hits as f64 / rows.len() as f64
}

/// Hand-made separable tables: a threshold, an interval, XOR and a diagonal.
pub fn separable_toys() -> Vec<(&'static str, Table)> {
    let xor = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
    let diag: Vec<Vec<f64>> = (0..6).flat_map(|i| (0..6).map(move |j| vec![i as f64, j as f64])).collect();
    let diag_labels = diag.iter().map(|r| r[0] > r[1]).collect();
    vec![
        ("threshold", ((0..10).map(|i| vec![i as f64]).collect(), (0..10).map(|i| i >= 6).collect())),
        ("interval", ((0..12).map(|i| vec![i as f64]).collect(), (0..12).map(|i| (4..8).contains(&i)).collect())),
        ("xor", (xor, vec![false, true, true, false])),
        ("diagonal", (diag, diag_labels)),
    ]
}
