//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use lfwa_fs::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// Majority label of the k nearest rows by full sort on (squared distance,
/// row index); vote ties go to the smallest label.
pub fn brute_force_knn(rows: &[Vec<f64>], labels: &[usize], query: &[f64], k: usize) -> usize {
    let mut order: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let d: f64 = r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            (d, i)
        })
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for &(_, i) in order.iter().take(k) {
        *votes.entry(labels[i]).or_default() += 1;
    }
    let top = *votes.values().max().unwrap();
    *votes.iter().find(|(_, &v)| v == top).unwrap().0
}

pub fn rows_of(data: &Dataset) -> Vec<Vec<f64>> {
    data.rows().map(|r| r.to_vec()).collect()
}

/// Accuracy (percent) of the brute-force classifier on `test` using only
/// `columns` (0-based).
pub fn oracle_accuracy(train: &Dataset, test: &Dataset, columns: &[usize], k: usize) -> f64 {
    let project = |d: &Dataset| -> Vec<Vec<f64>> {
        d.rows().map(|r| columns.iter().map(|&c| r[c]).collect()).collect()
    };
    let (tr, te) = (project(train), project(test));
    let k = k.min(tr.len());
    let hits = te
        .iter()
        .zip(test.labels())
        .filter(|(q, &y)| brute_force_knn(&tr, train.labels(), q, k) == y)
        .count();
    100.0 * hits as f64 / te.len() as f64
}

/// All k-subsets of 0..d in lexicographic order.
pub fn combinations(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, k, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive best k-subset by oracle accuracy: (accuracy, columns), first
/// in lexicographic order on ties.
pub fn exhaustive_best(train: &Dataset, test: &Dataset, k: usize, knn_k: usize) -> (f64, Vec<usize>) {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for cols in combinations(train.n_features(), k) {
        let acc = oracle_accuracy(train, test, &cols, knn_k);
        if acc > best.0 {
            best = (acc, cols);
        }
    }
    best
}

/// Zero-based columns that carry the label in [`planted`].
pub const PLANTED: [usize; 3] = [1, 4, 7];

/// Ten uniform columns; the label is whether the three planted columns sum
/// past 1.5, so every informative column adds signal on its own.
pub fn planted(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..10).map(|_| rng.random()).collect();
        let s: f64 = PLANTED.iter().map(|&c| row[c]).sum();
        labels.push(usize::from(s > 1.5));
        rows.push(row);
    }
    Dataset::from_rows(&rows, labels).unwrap().with_name("planted")
}

/// Percentile by nearest rank (p in (0, 1]).
pub fn percentile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = (p * v.len() as f64).ceil() as usize;
    v[rank.max(1) - 1]
}
