//! Lite fireworks algorithm (LFWA): a derivative-free population minimizer
//! over a box-bounded continuous space.
//!
//! Each generation computes fitness-ranked explosion intensities, builds
//! explosion sparks along a direction towards either the firework's own best
//! position or the best archived position (the core firework), adds Gaussian
//! sparks, maps stray coordinates back into the box and keeps the elite plus
//! a uniform random draw of the remaining candidates.

mod history;
mod operators;
mod sampler;

pub use history::{parse_history, write_history, HistoryRecord};
pub use operators::{
    argmin_fitness, average_intensity, cap_spark_counts, elite_random_select,
    explosion_intensity, explosion_radius, gaussian_mutation, gaussian_sparks,
    generate_explosion_sparks, map_into_bounds, BetaMode,
};
pub use sampler::Sampler;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Uniform box `[lower, upper]^dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    dim: usize,
    lower: f64,
    upper: f64,
}

impl SearchBounds {
    pub fn new(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("search space must have at least one dimension"));
        }
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::invalid(format!(
                "bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self { dim, lower, upper })
    }

    /// The unit hypercube `[0, 1]^dim` used for feature selection.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(dim, 0.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn contains(&self, position: &[f64]) -> bool {
        position.len() == self.dim
            && position.iter().all(|&x| x >= self.lower && x <= self.upper)
    }
}

/// A candidate solution with its cached (minimization) fitness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub position: Vec<f64>,
    pub fitness: f64,
}

impl Individual {
    pub fn new(position: Vec<f64>, fitness: f64) -> Self {
        Self { position, fitness }
    }
}

/// Best-ever individual per firework slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PbestArchive {
    entries: Vec<Individual>,
}

impl PbestArchive {
    pub fn new(fireworks: &[Individual]) -> Self {
        Self {
            entries: fireworks.to_vec(),
        }
    }

    /// Replaces entry `i` when `candidate` is strictly better. Returns whether
    /// the entry changed.
    pub fn update(&mut self, i: usize, candidate: &Individual) -> bool {
        if candidate.fitness < self.entries[i].fitness {
            self.entries[i] = candidate.clone();
            true
        } else {
            false
        }
    }

    pub fn entries(&self) -> &[Individual] {
        &self.entries
    }

    /// Index of the core firework (lowest fitness, lowest index on ties).
    pub fn core_index(&self) -> usize {
        argmin_fitness(&self.entries).expect("archive is never empty")
    }

    pub fn core(&self) -> &Individual {
        &self.entries[self.core_index()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LfwaConfig {
    /// Number of fireworks `M`.
    pub population_size: usize,
    /// Gaussian sparks generated per generation.
    pub gaussian_spark_count: usize,
    /// Objective evaluation budget, fireworks and sparks included.
    pub max_evaluations: usize,
    /// Upper bound on explosion sparks per generation.
    pub total_spark_cap: usize,
    pub xi: f64,
    pub rng_seed: u64,
    pub beta_mode: BetaMode,
    pub execution: Execution,
}

impl Default for LfwaConfig {
    fn default() -> Self {
        Self {
            population_size: 5,
            gaussian_spark_count: 5,
            max_evaluations: 200,
            total_spark_cap: 50,
            xi: 1e-12,
            rng_seed: 0,
            beta_mode: BetaMode::PerDimension,
            execution: Execution::Parallel,
        }
    }
}

impl LfwaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::config("population_size must be at least 2"));
        }
        if self.max_evaluations < self.population_size {
            return Err(Error::config(format!(
                "max_evaluations ({}) must be at least population_size ({})",
                self.max_evaluations, self.population_size
            )));
        }
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return Err(Error::config("xi must be a positive finite number"));
        }
        if self.total_spark_cap < self.population_size {
            return Err(Error::config(format!(
                "total_spark_cap ({}) must be at least population_size ({})",
                self.total_spark_cap, self.population_size
            )));
        }
        Ok(())
    }
}

/// Snapshot taken after each generation (generation 0 is the initial
/// population).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub evaluations: usize,
    /// Explosion spark count per firework (empty for generation 0).
    pub spark_counts: Vec<usize>,
    pub firework_fitness: Vec<f64>,
    pub archive_fitness: Vec<f64>,
}

/// Result of [`optimize`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LfwaRun {
    pub best: Individual,
    pub history: Vec<GenerationStats>,
    pub evaluations: usize,
    pub fireworks: Vec<Individual>,
    pub archive: PbestArchive,
}

fn evaluate<F>(objective: &F, positions: Vec<Vec<f64>>, exec: Execution) -> Result<Vec<Individual>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values = exec.map(&positions, |p| objective(p));
    positions
        .into_iter()
        .zip(values)
        .map(|(position, fitness)| {
            if fitness.is_finite() {
                Ok(Individual::new(position, fitness))
            } else {
                Err(Error::NonFiniteObjective {
                    value: fitness,
                    position,
                })
            }
        })
        .collect()
}

/// Minimizes `objective` over `bounds` until `config.max_evaluations`
/// objective calls have been spent.
///
/// Evaluations inside one generation may run concurrently according to
/// `config.execution`; the random stream is consumed only on the calling
/// thread, so a seed fully determines the result. When the remaining budget
/// is smaller than a generation's spark set, only the leading sparks (in
/// generation order) are evaluated.
pub fn optimize<F>(objective: F, bounds: &SearchBounds, config: &LfwaConfig) -> Result<LfwaRun>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let m = config.population_size;
    let exec = config.execution;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let initial: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..bounds.dim())
                .map(|_| bounds.lower() + rng.unit() * (bounds.upper() - bounds.lower()))
                .collect()
        })
        .collect();
    let mut fireworks = evaluate(&objective, initial, exec)?;
    let mut evaluations = m;
    let mut archive = PbestArchive::new(&fireworks);
    let mut best = fireworks[argmin_fitness(&fireworks).expect("m >= 2")].clone();

    let snapshot = |generation, best: &Individual, evaluations, counts: Vec<usize>, fw: &[Individual], ar: &PbestArchive| {
        GenerationStats {
            generation,
            best_fitness: best.fitness,
            evaluations,
            spark_counts: counts,
            firework_fitness: fw.iter().map(|f| f.fitness).collect(),
            archive_fitness: ar.entries().iter().map(|f| f.fitness).collect(),
        }
    };
    let mut history = vec![snapshot(0, &best, evaluations, Vec::new(), &fireworks, &archive)];

    let mut generation = 0;
    while evaluations < config.max_evaluations {
        generation += 1;
        let fitness: Vec<f64> = fireworks.iter().map(|f| f.fitness).collect();
        let counts = cap_spark_counts(
            &explosion_intensity(&fitness, m, config.xi)?,
            config.total_spark_cap,
        );
        let mean = average_intensity(&counts);
        let core = archive.core().position.clone();

        let mut sparks = Vec::new();
        for (i, firework) in fireworks.iter().enumerate() {
            let radius = explosion_radius(
                &firework.position,
                &archive.entries()[i].position,
                &core,
                counts[i],
                mean,
            );
            sparks.extend(generate_explosion_sparks(
                &firework.position,
                &radius,
                counts[i],
                bounds,
                config.beta_mode,
                &mut rng,
            ));
        }
        sparks.extend(gaussian_sparks(
            &fireworks,
            config.gaussian_spark_count,
            bounds,
            &mut rng,
        ));
        sparks.truncate(config.max_evaluations - evaluations);

        let sparks = evaluate(&objective, sparks, exec)?;
        evaluations += sparks.len();
        if let Some(i) = argmin_fitness(&sparks) {
            if sparks[i].fitness < best.fitness {
                best = sparks[i].clone();
            }
        }

        let mut candidates = Vec::with_capacity(2 * m + 1 + sparks.len());
        candidates.extend(fireworks.iter().cloned());
        candidates.extend(archive.entries().iter().cloned());
        candidates.push(archive.core().clone());
        candidates.extend(sparks);

        fireworks = elite_random_select(&candidates, m, &mut rng)?;
        for (i, firework) in fireworks.iter().enumerate() {
            archive.update(i, firework);
        }
        history.push(snapshot(generation, &best, evaluations, counts, &fireworks, &archive));
    }

    Ok(LfwaRun {
        best,
        history,
        evaluations,
        fireworks,
        archive,
    })
}
