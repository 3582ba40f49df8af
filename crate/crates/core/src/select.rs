//! Wrapper feature selection: fireworks positions in `[0, 1]^d` are
//! thresholded into feature masks, forced to the fractal-dimension
//! cardinality, and scored by holdout KNN accuracy.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::dataio::{min_max_normalize, MinMax};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fractal::{estimate_dataset_fd, FdEstimate, ScaleGrid};
use crate::knn::{stratified_split, ClassifierConfig, KnnClassifier, SplitSpec};
use crate::lfwa::{optimize, HistoryRecord, LfwaConfig, SearchBounds};

/// Threshold of the binarization step: a coordinate at or above it selects
/// its feature.
pub const SELECT_THRESHOLD: f64 = 0.5;

/// A subset of feature columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureMask {
    bits: Vec<bool>,
}

impl FeatureMask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Mask over `d` features from 1-based indices.
    pub fn from_indices(d: usize, indices: &[usize]) -> Result<Self> {
        let mut bits = vec![false; d];
        for &i in indices {
            if i == 0 || i > d {
                return Err(Error::invalid(format!("feature index {i} outside 1..={d}")));
            }
            bits[i - 1] = true;
        }
        Ok(Self { bits })
    }

    /// Every feature selected.
    pub fn full(d: usize) -> Self {
        Self { bits: vec![true; d] }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn cardinality(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Ascending 1-based indices of the selected features.
    pub fn selected_indices(&self) -> Vec<usize> {
        self.columns().into_iter().map(|c| c + 1).collect()
    }

    /// Ascending 0-based column indices.
    pub fn columns(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
            .collect()
    }
}

/// Renders as `{2, 11, 13}`.
impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.selected_indices().iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

pub fn binarize(position: &[f64]) -> Vec<bool> {
    position.iter().map(|&x| x >= SELECT_THRESHOLD).collect()
}

/// Forces exactly `k` selected features: the `k` largest activations win,
/// lower index first on ties. Masks that already have `k` bits are returned
/// unchanged (the top-`k` rule selects the same set for them, since every
/// selected coordinate is ≥ 0.5 and every other one is below it).
pub fn repair_cardinality(position: &[f64], bits: &[bool], k: usize) -> Result<Vec<bool>> {
    let d = position.len();
    if bits.len() != d {
        return Err(Error::invalid("position and mask lengths differ"));
    }
    if k == 0 || k > d {
        return Err(Error::invalid(format!("cardinality {k} outside 1..={d}")));
    }
    if bits.iter().filter(|&&b| b).count() == k {
        return Ok(bits.to_vec());
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| position[b].total_cmp(&position[a]).then(a.cmp(&b)));
    let mut out = vec![false; d];
    for &j in &order[..k] {
        out[j] = true;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Exactly this many features.
    Cardinality(usize),
    /// Any non-empty subset; the empty subset scores worst.
    Unconstrained,
}

/// The mask a search position stands for under `constraint`.
pub fn mask_for_position(position: &[f64], constraint: Constraint) -> Result<FeatureMask> {
    let bits = binarize(position);
    Ok(FeatureMask::from_bits(match constraint {
        Constraint::Cardinality(k) => repair_cardinality(position, &bits, k)?,
        Constraint::Unconstrained => bits,
    }))
}

/// Minimization objective: the negated holdout accuracy (percent) of KNN
/// trained on the selected columns.
pub fn subset_fitness(
    mask: &FeatureMask,
    train: &Dataset,
    test: &Dataset,
    classifier: &ClassifierConfig,
) -> Result<f64> {
    if mask.len() != train.n_features() || train.n_features() != test.n_features() {
        return Err(Error::invalid(format!(
            "mask over {} features, train has {}, test has {}",
            mask.len(),
            train.n_features(),
            test.n_features()
        )));
    }
    let columns = mask.columns();
    if columns.is_empty() {
        return Err(Error::invalid("mask selects no features"));
    }
    let train = train.select_columns(&columns)?;
    let test = test.select_columns(&columns)?;
    let knn = KnnClassifier::new(&train, classifier.k)?;
    Ok(-knn.score(&test, classifier.execution)?)
}

/// A seeded train/test split with min-max scaling fitted on the training
/// side and applied to both.
#[derive(Clone, Debug)]
pub struct Holdout {
    pub train: Dataset,
    pub test: Dataset,
    pub scaling: MinMax,
}

impl Holdout {
    pub fn new(data: &Dataset, split: &SplitSpec) -> Result<Self> {
        let (train, test) = stratified_split(data, split)?;
        let (train, scaling) = min_max_normalize(&train);
        let test = scaling.apply(&test)?;
        Ok(Self { train, test, scaling })
    }

    /// Accuracy percentage of `mask` on this holdout.
    pub fn accuracy(&self, mask: &FeatureMask, classifier: &ClassifierConfig) -> Result<f64> {
        Ok(-subset_fitness(mask, &self.train, &self.test, classifier)?)
    }
}

/// Outcome of one search over feature subsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub mask: FeatureMask,
    pub accuracy: f64,
    pub evaluations: usize,
    pub history: Vec<HistoryRecord>,
    /// Every distinct mask that was scored, in sorted order.
    #[serde(skip)]
    pub scored_masks: Vec<FeatureMask>,
}

/// Runs the fireworks search over `[0, 1]^d` for the mask with the best
/// holdout accuracy. Scores are memoized per mask; every objective call
/// still counts against the evaluation budget.
pub fn search_features(
    holdout: &Holdout,
    constraint: Constraint,
    lfwa: &LfwaConfig,
    classifier: &ClassifierConfig,
) -> Result<SearchResult> {
    let d = holdout.train.n_features();
    if let Constraint::Cardinality(k) = constraint {
        if k == 0 || k > d {
            return Err(Error::invalid(format!("cardinality {k} outside 1..={d}")));
        }
    }
    let cache: Mutex<HashMap<FeatureMask, f64>> = Mutex::new(HashMap::new());
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let objective = |position: &[f64]| -> f64 {
        let score = mask_for_position(position, constraint).and_then(|mask| {
            if let Some(&v) = cache.lock().expect("cache lock").get(&mask) {
                return Ok(v);
            }
            let v = if mask.cardinality() == 0 {
                0.0
            } else {
                subset_fitness(&mask, &holdout.train, &holdout.test, classifier)?
            };
            cache.lock().expect("cache lock").insert(mask, v);
            Ok(v)
        });
        score.unwrap_or_else(|e| {
            failure.lock().expect("failure lock").get_or_insert(e);
            f64::NAN
        })
    };
    let run = optimize(objective, &SearchBounds::unit(d)?, lfwa);
    if let Some(e) = failure.into_inner().expect("failure lock") {
        return Err(e);
    }
    let run = run?;
    let mask = mask_for_position(&run.best.position, constraint)?;
    let mut scored_masks: Vec<FeatureMask> =
        cache.into_inner().expect("cache lock").into_keys().collect();
    scored_masks.sort();
    Ok(SearchResult {
        mask,
        accuracy: -run.best.fitness,
        evaluations: run.evaluations,
        history: run.history.iter().map(HistoryRecord::from).collect(),
        scored_masks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// Cardinality fixed to the ceiling of the fractal dimension.
    Fd,
    Unconstrained,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub lfwa: LfwaConfig,
    pub classifier: ClassifierConfig,
    pub split: SplitSpec,
    pub mode: ConstraintMode,
    /// Replaces the estimated cardinality when set.
    pub fd_override: Option<usize>,
    pub grid: ScaleGrid,
    pub min_window: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            lfwa: LfwaConfig::default(),
            classifier: ClassifierConfig::default(),
            split: SplitSpec::default(),
            mode: ConstraintMode::Fd,
            fd_override: None,
            grid: ScaleGrid::default(),
            min_window: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub mask: FeatureMask,
    pub accuracy: f64,
    pub evaluations: usize,
    pub fd: Option<FdEstimate>,
    pub history: Vec<HistoryRecord>,
}

/// Cardinality used by the FD-constrained search: the override when given,
/// otherwise `ceil(FD)`, kept within `1..=d`.
pub fn fd_cardinality(fd: Option<&FdEstimate>, fd_override: Option<usize>, d: usize) -> Result<usize> {
    let k = match (fd_override, fd) {
        (Some(k), _) => {
            if k == 0 || k > d {
                return Err(Error::config(format!("fd_override {k} outside 1..={d}")));
            }
            k
        }
        (None, Some(est)) => est.cardinality.clamp(1, d),
        (None, None) => return Err(Error::config("no fractal dimension estimate available")),
    };
    Ok(k)
}

fn check_classes(data: &Dataset) -> Result<()> {
    let sizes = data.class_sizes();
    let present = sizes.iter().filter(|&&s| s > 0).count();
    if present < 2 {
        return Err(Error::data("feature selection needs at least two classes"));
    }
    if let Some(c) = sizes.iter().position(|&s| s == 1) {
        return Err(Error::data(format!("class {c} has a single row")));
    }
    Ok(())
}

/// End-to-end selection on one dataset: split, estimate the cardinality
/// (FD mode), search, and report the best mask with its holdout accuracy.
pub fn select_features(data: &Dataset, config: &SelectionConfig) -> Result<SelectionOutcome> {
    check_classes(data)?;
    let d = data.n_features();
    let (constraint, fd) = match config.mode {
        ConstraintMode::Unconstrained => (Constraint::Unconstrained, None),
        ConstraintMode::Fd => {
            let fd = match config.fd_override {
                Some(_) => None,
                None => Some(estimate_dataset_fd(
                    data,
                    &config.grid,
                    config.min_window,
                    Execution::Parallel,
                )?),
            };
            let k = fd_cardinality(fd.as_ref(), config.fd_override, d)?;
            (Constraint::Cardinality(k), fd)
        }
    };
    let holdout = Holdout::new(data, &config.split)?;
    let found = search_features(&holdout, constraint, &config.lfwa, &config.classifier)?;
    Ok(SelectionOutcome {
        mask: found.mask,
        accuracy: found.accuracy,
        evaluations: found.evaluations,
        fd,
        history: found.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binarize_threshold_is_inclusive() {
        assert_eq!(binarize(&[0.49, 0.5, 0.51]), vec![false, true, true]);
        assert_eq!(binarize(&[0.0; 3]), vec![false; 3]);
        assert_eq!(binarize(&[1.0; 3]), vec![true; 3]);
    }

    #[test]
    fn repair_examples() {
        let bits = vec![true, false, true, true];
        assert_eq!(repair_cardinality(&[0.9, 0.1, 0.8, 0.7], &bits, 3).unwrap(), bits);
        let pos = [0.9, 0.6, 0.8, 0.7];
        assert_eq!(
            repair_cardinality(&pos, &binarize(&pos), 2).unwrap(),
            vec![true, false, true, false]
        );
        let pos = [0.5; 4];
        assert_eq!(
            repair_cardinality(&pos, &binarize(&pos), 2).unwrap(),
            vec![true, true, false, false]
        );
        assert!(repair_cardinality(&pos, &binarize(&pos), 0).is_err());
        assert!(repair_cardinality(&pos, &binarize(&pos), 5).is_err());
    }

    #[test]
    fn mask_indices_are_one_based() {
        let m = FeatureMask::from_indices(19, &[2, 11, 13]).unwrap();
        assert_eq!(m.columns(), vec![1, 10, 12]);
        assert_eq!(m.selected_indices(), vec![2, 11, 13]);
        assert_eq!(m.to_string(), "{2, 11, 13}");
        assert_eq!(m.cardinality(), 3);
        assert!(FeatureMask::from_indices(3, &[0]).is_err());
        assert!(FeatureMask::from_indices(3, &[4]).is_err());
    }

    fn two_blobs() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i % 2) as f64 * 10.0 + (i as f64) * 0.01, (i * 7 % 5) as f64])
            .collect();
        let labels = (0..20).map(|i| i % 2).collect();
        Dataset::from_rows(&rows, labels).unwrap()
    }

    #[test]
    fn fitness_on_the_training_set_with_k1_is_perfect() {
        let d = two_blobs();
        let cfg = ClassifierConfig { k: 1, ..Default::default() };
        let f = subset_fitness(&FeatureMask::full(2), &d, &d, &cfg).unwrap();
        assert_eq!(f, -100.0);
    }

    #[test]
    fn fitness_rejects_empty_masks() {
        let d = two_blobs();
        let err = subset_fitness(&FeatureMask::from_bits(vec![false, false]), &d, &d, &ClassifierConfig::default());
        assert!(err.is_err());
    }

    #[test]
    fn full_cardinality_forces_the_full_mask() {
        let data = Dataset::from_rows(
            &(0..30).map(|i| vec![i as f64, (i * i % 7) as f64, (i % 3) as f64]).collect::<Vec<_>>(),
            (0..30).map(|i| i % 2).collect(),
        )
        .unwrap();
        let cfg = SelectionConfig {
            fd_override: Some(3),
            lfwa: LfwaConfig { max_evaluations: 5, ..Default::default() },
            ..Default::default()
        };
        let out = select_features(&data, &cfg).unwrap();
        assert_eq!(out.mask, FeatureMask::full(3));
        assert_eq!(out.evaluations, 5);
    }

    #[test]
    fn override_must_fit_the_feature_count() {
        assert!(fd_cardinality(None, Some(4), 3).is_err());
        assert!(fd_cardinality(None, None, 3).is_err());
        assert_eq!(fd_cardinality(None, Some(2), 3).unwrap(), 2);
    }

    #[test]
    fn selection_needs_two_classes() {
        let data = Dataset::from_rows(&[vec![1.0], vec![2.0]], vec![0, 0]).unwrap();
        assert!(matches!(select_features(&data, &SelectionConfig::default()), Err(Error::Data(_))));
    }
}
