//! CART decision trees and the resampled, under-sampled cross-validation
//! experiment.
//!
//! Feature values are generic over the float type `T`; metrics are always
//! reported as `f64`.

use std::cmp::Ordering;
use std::fmt::{Debug, Write as _};
use std::str::FromStr;

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::ClassifierError;
use crate::features::{FeatureMatrix, BLCK_DTOP_FEATURES, FEATURE_NAMES, LABEL_NAME};

/// Float types usable as feature values.
pub trait Scalar:
    Float + Debug + FromStr + Send + Sync + Serialize + DeserializeOwned + 'static
{
}

impl<T> Scalar for T where
    T: Float + Debug + FromStr + Send + Sync + Serialize + DeserializeOwned + 'static
{
}

/// Margin under which two impurity decreases count as equal.
pub fn tie_epsilon<T: Float>() -> T {
    T::epsilon() * T::from(64.0).unwrap()
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    feature_names: Vec<String>,
    rows: Vec<Vec<T>>,
    labels: Vec<bool>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<T>>,
        labels: Vec<bool>,
    ) -> Result<Self, ClassifierError> {
        if rows.len() != labels.len() {
            return Err(ClassifierError::Parse {
                line: 0,
                message: format!("{} rows but {} labels", rows.len(), labels.len()),
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(ClassifierError::RaggedRow {
                    row: i,
                    expected: feature_names.len(),
                    found: row.len(),
                });
            }
        }
        Ok(Dataset {
            feature_names,
            rows,
            labels,
        })
    }

    pub fn from_matrix(matrix: &FeatureMatrix) -> Self {
        Dataset {
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            rows: matrix.vectors.iter().map(|v| v.values()).collect(),
            labels: matrix.vectors.iter().map(|v| v.label).collect(),
        }
    }

    /// Reads a feature CSV whose last column is the 0/1 label.
    pub fn from_csv(text: &str) -> Result<Self, ClassifierError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(ClassifierError::EmptyDataset)?;
        let mut names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        if names.last().map(String::as_str) != Some(LABEL_NAME) {
            return Err(ClassifierError::Parse {
                line: 1,
                message: format!("last column must be `{LABEL_NAME}`"),
            });
        }
        names.pop();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in lines {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != names.len() + 1 {
                return Err(ClassifierError::RaggedRow {
                    row: rows.len(),
                    expected: names.len() + 1,
                    found: cells.len(),
                });
            }
            let bad = |c: &str| ClassifierError::Parse {
                line: i + 1,
                message: format!("not a number: {c:?}"),
            };
            let row = cells[..names.len()]
                .iter()
                .map(|c| c.parse::<T>().map_err(|_| bad(c)))
                .collect::<Result<Vec<T>, _>>()?;
            let label = match cells[names.len()] {
                "0" => false,
                "1" => true,
                other => return Err(bad(other)),
            };
            rows.push(row);
            labels.push(label);
        }
        Ok(Dataset {
            feature_names: names,
            rows,
            labels,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (negatives, positives)
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l).count();
        (self.labels.len() - pos, pos)
    }

    /// Same rows with replaced labels.
    pub fn with_labels(&self, labels: Vec<bool>) -> Result<Self, ClassifierError> {
        Dataset::new(self.feature_names.clone(), self.rows.clone(), labels)
    }

    /// Keeps the named columns, in the given order.
    pub fn select<S: AsRef<str>>(&self, columns: &[S]) -> Result<Self, ClassifierError> {
        let idx = columns
            .iter()
            .map(|c| {
                self.feature_names
                    .iter()
                    .position(|n| n == c.as_ref())
                    .ok_or_else(|| ClassifierError::UnknownFeature(c.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Dataset {
            feature_names: idx.iter().map(|&i| self.feature_names[i].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&i| r[i]).collect())
                .collect(),
            labels: self.labels.clone(),
        })
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Dataset {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Gini impurity `1 - sum(p_i^2)` of a two-class node.
pub fn gini<T: Float>(neg: usize, pos: usize) -> T {
    let n = neg + pos;
    if n == 0 {
        return T::zero();
    }
    let n = T::from(n).unwrap();
    let p = T::from(pos).unwrap() / n;
    let q = T::from(neg).unwrap() / n;
    T::one() - (p * p + q * q)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Split<T> {
    pub feature: usize,
    pub threshold: T,
    pub impurity_decrease: T,
}

fn midpoint<T: Float>(lo: T, hi: T) -> T {
    let mid = lo + (hi - lo) / (T::one() + T::one());
    if mid >= hi {
        lo
    } else {
        mid
    }
}

fn cmp<T: Float>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

fn best_split_among<T: Scalar>(
    rows: &[Vec<T>],
    labels: &[bool],
    idx: &[usize],
    features: &[usize],
    min_leaf: usize,
    allow_zero: bool,
) -> Option<Split<T>> {
    let n = idx.len();
    if n < 2 {
        return None;
    }
    let pos = idx.iter().filter(|&&i| labels[i]).count();
    let parent: T = gini(n - pos, pos);
    let nf = T::from(n).unwrap();
    let eps = tie_epsilon::<T>();
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut best: Option<Split<T>> = None;
    let mut order = idx.to_vec();
    for &f in &features {
        order.sort_by(|&a, &b| cmp(&rows[a][f], &rows[b][f]));
        let (mut left_pos, mut left_n) = (0usize, 0usize);
        for w in 0..n - 1 {
            let i = order[w];
            left_n += 1;
            left_pos += labels[i] as usize;
            let (v, next) = (rows[i][f], rows[order[w + 1]][f]);
            if v >= next {
                continue;
            }
            let right_n = n - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let right_pos = pos - left_pos;
            let weighted = T::from(left_n).unwrap() / nf * gini(left_n - left_pos, left_pos)
                + T::from(right_n).unwrap() / nf * gini(right_n - right_pos, right_pos);
            let decrease = parent - weighted;
            if decrease <= eps && !(allow_zero && decrease > -eps) {
                continue;
            }
            if best.is_none_or(|b| decrease > b.impurity_decrease + eps) {
                best = Some(Split {
                    feature: f,
                    threshold: midpoint(v, next),
                    impurity_decrease: decrease,
                });
            }
        }
    }
    best
}

/// Exhaustive best split over midpoints of consecutive distinct values.
///
/// Ties within [`tie_epsilon`] go to the lowest feature index, then the
/// lowest threshold. `None` when no split lowers the impurity.
pub fn best_split<T: Scalar>(rows: &[Vec<T>], labels: &[bool], features: &[usize]) -> Option<Split<T>> {
    let idx: Vec<usize> = (0..rows.len()).collect();
    best_split_among(rows, labels, &idx, features, 1, false)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Number of features drawn per node; all when `None`.
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: DeserializeOwned"))]
pub enum TreeNode<T> {
    Leaf {
        predicted_label: bool,
        /// [negatives, positives]
        class_counts: [usize; 2],
    },
    Split {
        feature_index: usize,
        threshold: T,
        left: Box<TreeNode<T>>,
        right: Box<TreeNode<T>>,
    },
}

impl<T: Scalar> TreeNode<T> {
    pub fn predict(&self, row: &[T]) -> bool {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf {
                    predicted_label, ..
                } => return *predicted_label,
                TreeNode::Split {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature_index] <= *threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> Vec<&TreeNode<T>> {
        match self {
            TreeNode::Leaf { .. } => vec![self],
            TreeNode::Split { left, right, .. } => {
                let mut v = left.leaves();
                v.extend(right.leaves());
                v
            }
        }
    }
}

struct Builder<'a, T> {
    rows: &'a [Vec<T>],
    labels: &'a [bool],
    config: &'a TreeConfig,
    n_features: usize,
    rng: ChaCha8Rng,
}

impl<T: Scalar> Builder<'_, T> {
    fn leaf(&self, idx: &[usize]) -> TreeNode<T> {
        let pos = idx.iter().filter(|&&i| self.labels[i]).count();
        let neg = idx.len() - pos;
        TreeNode::Leaf {
            predicted_label: pos > neg,
            class_counts: [neg, pos],
        }
    }

    fn features(&mut self) -> Vec<usize> {
        match self.config.max_features {
            Some(m) if m < self.n_features => {
                let mut f = rand::seq::index::sample(&mut self.rng, self.n_features, m.max(1)).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..self.n_features).collect(),
        }
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize) -> TreeNode<T> {
        let pos = idx.iter().filter(|&&i| self.labels[i]).count();
        let min_leaf = self.config.min_samples_leaf.max(1);
        if pos == 0
            || pos == idx.len()
            || self.config.max_depth.is_some_and(|d| depth >= d)
            || idx.len() < 2 * min_leaf
        {
            return self.leaf(&idx);
        }
        let features = self.features();
        let Some(split) = best_split_among(self.rows, self.labels, &idx, &features, min_leaf, true) else {
            return self.leaf(&idx);
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][split.feature] <= split.threshold);
        TreeNode::Split {
            feature_index: split.feature,
            threshold: split.threshold,
            left: Box::new(self.build(l, depth + 1)),
            right: Box::new(self.build(r, depth + 1)),
        }
    }
}

/// Greedy CART with Gini impurity. Leaves predict the majority class,
/// ties predict `false`. An impure node is split even when the best split
/// leaves the impurity unchanged, so XOR-like patterns are still separated.
pub fn fit<T: Scalar>(dataset: &Dataset<T>, config: &TreeConfig) -> Result<TreeNode<T>, ClassifierError> {
    if dataset.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let mut b = Builder {
        rows: &dataset.rows,
        labels: &dataset.labels,
        config,
        n_features: dataset.feature_names.len(),
        rng: rng(config.seed, 2),
    };
    Ok(b.build((0..dataset.len()).collect(), 0))
}

/// Keeps every minority row and an equal-sized uniform sample (without
/// replacement) of the majority class, in shuffled order.
pub fn under_sample<T: Scalar>(dataset: &Dataset<T>, seed: u64) -> Result<Dataset<T>, ClassifierError> {
    Ok(dataset.subset(&under_sample_indices(dataset.labels(), seed)?))
}

pub fn under_sample_indices(labels: &[bool], seed: u64) -> Result<Vec<usize>, ClassifierError> {
    if labels.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i]);
    if pos.is_empty() || neg.is_empty() {
        return Err(ClassifierError::SingleClass);
    }
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    let mut r = rng(seed, 0);
    let mut chosen = minority.clone();
    chosen.extend(
        rand::seq::index::sample(&mut r, majority.len(), minority.len())
            .into_iter()
            .map(|i| majority[i]),
    );
    chosen.shuffle(&mut r);
    Ok(chosen)
}

/// Fold index for every row.
pub fn fold_assignment(
    labels: &[bool],
    k: usize,
    stratified: bool,
    seed: u64,
) -> Result<Vec<usize>, ClassifierError> {
    if labels.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let mut r = rng(seed, 1);
    let mut folds = vec![0; labels.len()];
    let groups: Vec<Vec<usize>> = if stratified {
        let (pos, neg): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i]);
        let have = pos.len().min(neg.len());
        if have < k {
            return Err(ClassifierError::TooFewRows { have, folds: k });
        }
        vec![pos, neg]
    } else {
        if labels.len() < k {
            return Err(ClassifierError::TooFewRows {
                have: labels.len(),
                folds: k,
            });
        }
        vec![(0..labels.len()).collect()]
    };
    let mut counter = 0;
    for mut group in groups {
        group.shuffle(&mut r);
        for i in group {
            folds[i] = counter % k;
            counter += 1;
        }
    }
    Ok(folds)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    fn ratio(num: usize, den: usize) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    pub fn recall(&self) -> f64 {
        Self::ratio(self.tp, self.tp + self.fn_)
    }

    pub fn precision(&self) -> f64 {
        Self::ratio(self.tp, self.tp + self.fp)
    }

    pub fn accuracy(&self) -> f64 {
        Self::ratio(self.tp + self.tn, self.tp + self.tn + self.fp + self.fn_)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub resample: usize,
    pub fold: usize,
    pub confusion: Confusion,
    pub recall: f64,
    pub precision: f64,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub stratified: bool,
    pub tree: TreeConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 10,
            stratified: true,
            tree: TreeConfig::default(),
        }
    }
}

/// k-fold cross-validation of [`fit`]; the positive class is `true`.
pub fn cross_validate<T: Scalar>(
    dataset: &Dataset<T>,
    config: &CvConfig,
    seed: u64,
) -> Result<Vec<FoldMetrics>, ClassifierError> {
    let k = config.folds;
    let assignment = fold_assignment(dataset.labels(), k, config.stratified, seed)?;
    (0..k)
        .map(|fold| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..dataset.len()).partition(|&i| assignment[i] == fold);
            let tree_config = TreeConfig {
                seed: config.tree.seed.wrapping_add(seed).wrapping_add(fold as u64),
                ..config.tree.clone()
            };
            let tree = fit(&dataset.subset(&train), &tree_config)?;
            let mut c = Confusion::default();
            for &i in &test {
                c.add(tree.predict(&dataset.rows[i]), dataset.labels[i]);
            }
            Ok(FoldMetrics {
                resample: 0,
                fold,
                confusion: c,
                recall: c.recall(),
                precision: c.precision(),
                accuracy: c.accuracy(),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Mean and std over every resample x fold value.
    #[default]
    Pooled,
    /// Mean and std over per-resample fold means.
    PerResampleMean,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubset {
    #[default]
    All,
    BlckDtop,
    Columns(Vec<String>),
}

impl FeatureSubset {
    pub fn label(&self) -> String {
        match self {
            FeatureSubset::All => "all features".into(),
            FeatureSubset::BlckDtop => "blck+dtop only".into(),
            FeatureSubset::Columns(c) => c.join("+"),
        }
    }

    pub fn apply<T: Scalar>(&self, dataset: &Dataset<T>) -> Result<Dataset<T>, ClassifierError> {
        match self {
            FeatureSubset::All => Ok(dataset.clone()),
            FeatureSubset::BlckDtop => dataset.select(&BLCK_DTOP_FEATURES),
            FeatureSubset::Columns(c) => dataset.select(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub resamples: usize,
    pub seed: u64,
    pub cv: CvConfig,
    pub aggregation: Aggregation,
    pub subset: FeatureSubset,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            resamples: 250,
            seed: 0,
            cv: CvConfig::default(),
            aggregation: Aggregation::Pooled,
            subset: FeatureSubset::All,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return MeanStd::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanStd {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub recall: MeanStd,
    pub precision: MeanStd,
    pub accuracy: MeanStd,
}

/// Recomputes the aggregate from per-fold records.
pub fn aggregate(folds: &[FoldMetrics], mode: Aggregation) -> Summary {
    let pick = |f: fn(&FoldMetrics) -> f64| -> MeanStd {
        match mode {
            Aggregation::Pooled => MeanStd::of(&folds.iter().map(f).collect::<Vec<_>>()),
            Aggregation::PerResampleMean => {
                let mut means = Vec::new();
                let mut start = 0;
                while start < folds.len() {
                    let r = folds[start].resample;
                    let end = start + folds[start..].iter().take_while(|m| m.resample == r).count();
                    means.push(MeanStd::of(&folds[start..end].iter().map(f).collect::<Vec<_>>()).mean);
                    start = end;
                }
                MeanStd::of(&means)
            }
        }
    };
    Summary {
        recall: pick(|m| m.recall),
        precision: pick(|m| m.precision),
        accuracy: pick(|m| m.accuracy),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub panel: String,
    pub config: ExperimentConfig,
    pub features: Vec<String>,
    pub rows: usize,
    pub positives: usize,
    pub filter_digest: Option<String>,
    pub corpus_digest: Option<String>,
    pub fold_metrics: Vec<FoldMetrics>,
    pub summary: Summary,
}

/// Runs `resamples` rounds of under-sampling plus k-fold cross-validation.
/// Round `r` is seeded with `seed + r`.
pub fn experiment<T: Scalar>(
    dataset: &Dataset<T>,
    config: &ExperimentConfig,
) -> Result<ExperimentReport, ClassifierError> {
    let data = config.subset.apply(dataset)?;
    let (neg, pos) = data.class_counts();
    if data.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    if neg == 0 || pos == 0 {
        return Err(ClassifierError::SingleClass);
    }
    let per_resample = (0..config.resamples)
        .into_par_iter()
        .map(|r| {
            let seed = config.seed.wrapping_add(r as u64);
            let balanced = under_sample(&data, seed)?;
            let mut folds = cross_validate(&balanced, &config.cv, seed)?;
            for f in &mut folds {
                f.resample = r;
            }
            Ok(folds)
        })
        .collect::<Result<Vec<_>, ClassifierError>>()?;
    let fold_metrics: Vec<FoldMetrics> = per_resample.into_iter().flatten().collect();
    Ok(ExperimentReport {
        panel: config.subset.label(),
        config: config.clone(),
        features: data.feature_names().to_vec(),
        rows: data.len(),
        positives: pos,
        filter_digest: None,
        corpus_digest: None,
        summary: aggregate(&fold_metrics, config.aggregation),
        fold_metrics,
    })
}

/// Both panels: all features and BLCK+DTOP only.
pub fn run_panels<T: Scalar>(
    dataset: &Dataset<T>,
    config: &ExperimentConfig,
) -> Result<Vec<ExperimentReport>, ClassifierError> {
    [FeatureSubset::All, FeatureSubset::BlckDtop]
        .into_iter()
        .map(|subset| {
            experiment(
                dataset,
                &ExperimentConfig {
                    subset,
                    ..config.clone()
                },
            )
        })
        .collect()
}

/// Metric rows by panel columns, three decimals.
pub fn render_table(reports: &[ExperimentReport]) -> String {
    let mut out = format!("{:<10}", "");
    for r in reports {
        let _ = write!(out, " | {:^17}", r.panel);
    }
    out.push('\n');
    let _ = write!(out, "{:<10}", "");
    for _ in reports {
        let _ = write!(out, " | {:>8} {:>8}", "mean", "std");
    }
    out.push('\n');
    let metrics: [(&str, fn(&Summary) -> MeanStd); 3] = [
        ("recall", |s| s.recall),
        ("precision", |s| s.precision),
        ("accuracy", |s| s.accuracy),
    ];
    for (name, get) in metrics {
        let _ = write!(out, "{name:<10}");
        for r in reports {
            let m = get(&r.summary);
            let _ = write!(out, " | {:>8.3} {:>8.3}", m.mean, m.std);
        }
        out.push('\n');
    }
    out
}

/// Random labels drawn with probability `p`, for null-model runs.
pub fn random_labels(n: usize, p: f64, seed: u64) -> Vec<bool> {
    let mut r = rng(seed, 3);
    (0..n).map(|_| r.random_bool(p)).collect()
}

/// The same labels in a seeded random order, for label-permutation null runs.
pub fn permute_labels(labels: &[bool], seed: u64) -> Vec<bool> {
    let mut out = labels.to_vec();
    out.shuffle(&mut rng(seed, 4));
    out
}
