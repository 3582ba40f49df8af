//! Seeded experiment runner: reduction-rate reports, FD-constrained search,
//! and the full-feature / unconstrained / random-subset comparisons.

mod config;
mod report;

use std::collections::HashMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{known_dataset, ExperimentConfig, Mode};
pub use report::{emit_report, parse_records, Aggregate, Format, Record, RunReport, TrialFailure, TrialRecord};

use crate::dataio::load_dataset;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fractal::{estimate_dataset_fd, reduction_rate, FdEstimate};
use crate::knn::SplitSpec;
use crate::select::{fd_cardinality, search_features, Constraint, FeatureMask, Holdout};

/// Runs `config.mode` on every configured dataset.
///
/// Comparison modes (`full_features_m1`, `lfwa_unconstrained_m2`,
/// `random_subset_baseline`) also run the FD-constrained search on the same
/// seeds so that each aggregate carries its accuracy gap.
///
/// Configuration and loading problems are returned as errors. A failing
/// trial does not abort the run: it becomes a failure record and the other
/// trials are still reported.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    let methods = match config.mode {
        Mode::FdReduction => vec![],
        Mode::LfwaFd => vec![Mode::LfwaFd],
        other => vec![Mode::LfwaFd, other],
    };
    run_methods(config, &methods)
}

/// Runs the FD-constrained reference plus every method in `methods` on the
/// same seeds, as in the ablation table. `config.mode` is ignored.
pub fn run_comparison(config: &ExperimentConfig, methods: &[Mode]) -> Result<RunReport> {
    let mut all = vec![Mode::LfwaFd];
    for &m in methods {
        if m == Mode::FdReduction {
            return Err(Error::config("fd_reduction is not a comparison method"));
        }
        if !all.contains(&m) {
            all.push(m);
        }
    }
    let mut report = run_methods(config, &all)?;
    report.mode = *methods.first().unwrap_or(&Mode::LfwaFd);
    Ok(report)
}

fn run_methods(config: &ExperimentConfig, methods: &[Mode]) -> Result<RunReport> {
    config.validate()?;
    let grid = config.grid()?;
    let mut report = RunReport {
        mode: config.mode,
        base_seed: config.base_seed,
        repeats: config.repeats,
        trials: Vec::new(),
        failures: Vec::new(),
        aggregates: Vec::new(),
    };
    for spec in &config.datasets {
        let data = load_dataset(spec)?;
        let d = data.n_features();
        let needs_fd = config.mode == Mode::FdReduction
            || (config.fd_override.is_none()
                && methods.iter().any(|m| matches!(m, Mode::LfwaFd | Mode::RandomSubsetBaseline)));
        let fd = if needs_fd {
            Some(estimate_dataset_fd(&data, &grid, config.min_window, config.execution)?)
        } else {
            None
        };
        let k = match (fd.as_ref(), config.fd_override) {
            (None, None) => None,
            _ => Some(fd_cardinality(fd.as_ref(), config.fd_override, d)?),
        };
        if methods.is_empty() {
            report.aggregates.push(Aggregate::summarize(
                &data,
                Mode::FdReduction,
                &[],
                fd.clone(),
                k,
                None,
            ));
            continue;
        }
        let mut reference = None;
        for &method in methods {
            let outcomes = config.execution.map_range(config.repeats, |t| {
                let seed = config.base_seed + t as u64;
                run_trial(&data, config, method, k, seed).map_err(|e| TrialFailure {
                    dataset: data.name().to_string(),
                    method,
                    seed,
                    kind: e.category().to_string(),
                    message: e.to_string(),
                })
            });
            let mut trials = Vec::new();
            for outcome in outcomes {
                match outcome {
                    Ok(t) => trials.push(t),
                    Err(f) => report.failures.push(f),
                }
            }
            let agg = Aggregate::summarize(&data, method, &trials, fd.clone(), k, reference);
            if method == Mode::LfwaFd {
                reference = agg.mean_accuracy;
            }
            report.aggregates.push(agg);
            report.trials.extend(trials);
        }
    }
    Ok(report)
}

/// One seeded trial. The seed drives the holdout split, the optimizer and
/// the random baseline.
pub fn run_trial(
    data: &Dataset,
    config: &ExperimentConfig,
    method: Mode,
    cardinality: Option<usize>,
    seed: u64,
) -> Result<TrialRecord> {
    let started = Instant::now();
    let d = data.n_features();
    let split = SplitSpec { seed, ..config.split.clone() };
    let holdout = Holdout::new(data, &split)?;
    let lfwa = crate::lfwa::LfwaConfig { rng_seed: seed, ..config.lfwa.clone() };
    let need_k = || cardinality.ok_or_else(|| Error::config("no cardinality available"));
    let (mask, accuracy, evaluations, history) = match method {
        Mode::LfwaFd | Mode::LfwaUnconstrainedM2 => {
            let constraint = if method == Mode::LfwaFd {
                Constraint::Cardinality(need_k()?)
            } else {
                Constraint::Unconstrained
            };
            let found = search_features(&holdout, constraint, &lfwa, &config.classifier)?;
            (found.mask, found.accuracy, found.evaluations, found.history)
        }
        Mode::FullFeaturesM1 => {
            let mask = FeatureMask::full(d);
            let acc = holdout.accuracy(&mask, &config.classifier)?;
            (mask, acc, 1, Vec::new())
        }
        Mode::RandomSubsetBaseline => {
            let k = need_k()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Separate stream from the one used by the split.
            rng.set_stream(1);
            let mut bits = vec![false; d];
            for c in rand::seq::index::sample(&mut rng, d, k) {
                bits[c] = true;
            }
            let mask = FeatureMask::from_bits(bits);
            let acc = holdout.accuracy(&mask, &config.classifier)?;
            (mask, acc, 1, Vec::new())
        }
        Mode::FdReduction => return Err(Error::config("fd_reduction runs no trials")),
    };
    Ok(TrialRecord {
        dataset: data.name().to_string(),
        method,
        seed,
        mask: mask.selected_indices(),
        accuracy,
        evaluations,
        wall_time_ms: config
            .record_timings
            .then(|| started.elapsed().as_secs_f64() * 1e3),
        history,
    })
}

impl Aggregate {
    /// Summary of `trials` (already ordered by seed). `reference` is the
    /// FD-constrained mean accuracy used for the accuracy gap.
    pub fn summarize(
        data: &Dataset,
        method: Mode,
        trials: &[TrialRecord],
        fd: Option<FdEstimate>,
        cardinality: Option<usize>,
        reference: Option<f64>,
    ) -> Self {
        let d = data.n_features();
        let accs: Vec<f64> = trials.iter().map(|t| t.accuracy).collect();
        let (mean, std, best) = accuracy_stats(&accs);
        let delta = match (method, reference, mean) {
            (Mode::LfwaFd | Mode::FdReduction, _, _) => None,
            (_, Some(r), Some(m)) => Some(r - m),
            _ => None,
        };
        Aggregate {
            dataset: data.name().to_string(),
            method,
            n_rows: data.n_rows(),
            n_features: d,
            trials: trials.len(),
            mean_accuracy: mean,
            std_accuracy: std,
            best_accuracy: best,
            most_frequent_mask: most_frequent_mask(trials),
            fd,
            cardinality,
            reduction_rate: cardinality.map(|k| reduction_rate(d, k)),
            delta_accuracy: delta,
        }
    }
}

/// Mean, sample standard deviation (0 for one value) and maximum.
pub fn accuracy_stats(values: &[f64]) -> (Option<f64>, Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (Some(mean), Some(std), Some(best))
}

/// Most common mask; ties go to the mask seen first in seed order.
pub fn most_frequent_mask(trials: &[TrialRecord]) -> Option<Vec<usize>> {
    let mut counts: HashMap<&[usize], (usize, usize)> = HashMap::new();
    for (i, t) in trials.iter().enumerate() {
        counts.entry(&t.mask).or_insert((0, i)).0 += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
        .map(|(m, _)| m.to_vec())
}
