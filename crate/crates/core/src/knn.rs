//! Exact brute-force k-nearest-neighbours classification, the seeded
//! stratified holdout split and the accuracy metric.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            stratified: true,
            seed: 0,
        }
    }
}

/// Rows assigned to the training side for `n` rows at `fraction`:
/// round-half-up, then forced into `1..=n-1` so both sides are non-empty.
fn train_count(n: usize, fraction: f64) -> usize {
    let raw = (fraction * n as f64 + 0.5).floor() as usize;
    raw.clamp(1, n - 1)
}

/// Seeded train/test split. In stratified mode every class is shuffled on
/// its own and contributes `round(train_fraction * n_class)` rows to the
/// training side (at least one row to each side). Both outputs keep the
/// original row order.
pub fn stratified_split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::config(format!(
            "train_fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut is_train = vec![false; data.n_rows()];
    if spec.stratified {
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.class_count()];
        for (i, &l) in data.labels().iter().enumerate() {
            by_class[l].push(i);
        }
        for (class, rows) in by_class.iter_mut().enumerate() {
            if rows.is_empty() {
                continue;
            }
            if rows.len() < 2 {
                return Err(Error::data(format!(
                    "class {class} ({}) has {} row; stratified split needs at least 2",
                    data.class_names()[class],
                    rows.len()
                )));
            }
            rows.shuffle(&mut rng);
            for &r in &rows[..train_count(rows.len(), spec.train_fraction)] {
                is_train[r] = true;
            }
        }
    } else {
        if data.n_rows() < 2 {
            return Err(Error::data("split needs at least 2 rows"));
        }
        let mut rows: Vec<usize> = (0..data.n_rows()).collect();
        rows.shuffle(&mut rng);
        for &r in &rows[..train_count(rows.len(), spec.train_fraction)] {
            is_train[r] = true;
        }
    }
    let (train, test): (Vec<usize>, Vec<usize>) = (0..data.n_rows()).partition(|&i| is_train[i]);
    Ok((data.select_rows(&train), data.select_rows(&test)))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Majority class among the `k` nearest training rows (Euclidean distance).
/// Equal distances rank the lower row index nearer; equal votes go to the
/// smallest class id.
pub fn knn_predict(train: &Dataset, query: &[f64], k: usize) -> Result<usize> {
    if query.len() != train.n_features() {
        return Err(Error::invalid(format!(
            "query has {} features, training data has {}",
            query.len(),
            train.n_features()
        )));
    }
    if k == 0 || k > train.n_rows() {
        return Err(Error::invalid(format!(
            "k = {k} outside 1..={}",
            train.n_rows()
        )));
    }
    Ok(predict_unchecked(train, query, k))
}

fn predict_unchecked(train: &Dataset, query: &[f64], k: usize) -> usize {
    let mut dist: Vec<(f64, usize)> = train
        .rows()
        .enumerate()
        .map(|(i, row)| (squared_distance(row, query), i))
        .collect();
    let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dist.len() {
        dist.select_nth_unstable_by(k - 1, order);
    }
    let mut votes = vec![0usize; train.class_count()];
    for &(_, i) in &dist[..k] {
        votes[train.labels()[i]] += 1;
    }
    // max_by_key keeps the last maximum, so scan manually for the first
    let mut best = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = c;
        }
    }
    best
}

/// Percentage of matching entries.
pub fn accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() || predictions.is_empty() {
        return Err(Error::invalid(format!(
            "accuracy needs equal non-empty inputs, got {} and {}",
            predictions.len(),
            truth.len()
        )));
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(100.0 * hits as f64 / truth.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub k: usize,
    pub execution: Execution,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            k: 5,
            execution: Execution::Parallel,
        }
    }
}

/// KNN over a fixed training set.
#[derive(Clone, Debug)]
pub struct KnnClassifier<'a> {
    train: &'a Dataset,
    k: usize,
}

impl<'a> KnnClassifier<'a> {
    /// `k` larger than the training set is reduced to its size.
    pub fn new(train: &'a Dataset, k: usize) -> Result<Self> {
        if train.n_rows() == 0 {
            return Err(Error::invalid("training set is empty"));
        }
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        Ok(Self {
            train,
            k: k.min(train.n_rows()),
        })
    }

    pub fn predict(&self, query: &[f64]) -> Result<usize> {
        knn_predict(self.train, query, self.k)
    }

    /// Predicts every row of `test`, in order.
    pub fn predict_all(&self, test: &Dataset, exec: Execution) -> Result<Vec<usize>> {
        if test.n_features() != self.train.n_features() {
            return Err(Error::invalid(format!(
                "test set has {} features, training set has {}",
                test.n_features(),
                self.train.n_features()
            )));
        }
        Ok(exec.map_range(test.n_rows(), |i| {
            predict_unchecked(self.train, test.row(i), self.k)
        }))
    }

    /// Accuracy percentage on `test`.
    pub fn score(&self, test: &Dataset, exec: Execution) -> Result<f64> {
        accuracy(&self.predict_all(test, exec)?, test.labels())
    }
}
