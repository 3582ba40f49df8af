//! The individual fireworks operators. Each one is a free function so it can
//! be exercised in isolation; [`super::optimize`] wires them together.

use serde::{Deserialize, Serialize};

use super::sampler::{choose_distinct, Sampler};
use super::{Individual, SearchBounds};
use crate::error::{Error, Result};

/// How β in the displacement step is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    /// Independent β per dimension per spark.
    #[default]
    PerDimension,
    /// One β per spark, shared by all dimensions.
    PerSpark,
}

/// Spark count per firework: `ceil(M ^ ((f_max - f_i) / (f_max - f_min + xi)))`,
/// clamped to `[1, M]`, where `M` is the population size.
pub fn explosion_intensity(fitness: &[f64], population_size: usize, xi: f64) -> Result<Vec<usize>> {
    if fitness.is_empty() || population_size == 0 {
        return Err(Error::invalid("explosion intensity needs at least one firework"));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::invalid(format!("xi must be positive and finite, got {xi}")));
    }
    if let Some(i) = fitness.iter().position(|f| !f.is_finite()) {
        return Err(Error::invalid(format!(
            "non-finite fitness {} for firework {i}",
            fitness[i]
        )));
    }
    let m = population_size;
    let f_max = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let f_min = fitness.iter().copied().fold(f64::INFINITY, f64::min);
    let denom = f_max - f_min + xi;
    Ok(fitness
        .iter()
        .map(|&f| {
            let exponent = (f_max - f) / denom;
            let s = (m as f64).powf(exponent).ceil();
            (s as usize).clamp(1, m)
        })
        .collect())
}

pub fn average_intensity(counts: &[usize]) -> f64 {
    counts.iter().sum::<usize>() as f64 / counts.len() as f64
}

/// Scales spark counts down proportionally (floor, minimum one) when their
/// total exceeds `cap`. Counts already within the cap are returned as is.
pub fn cap_spark_counts(counts: &[usize], cap: usize) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    if total <= cap {
        return counts.to_vec();
    }
    counts
        .iter()
        .map(|&s| ((s * cap) / total).max(1))
        .collect()
}

/// Direction of the explosion for one firework: towards its own best-ever
/// position when its intensity is below average, towards the core firework
/// otherwise.
pub fn explosion_radius(
    position: &[f64],
    pbest: &[f64],
    core: &[f64],
    intensity: usize,
    mean_intensity: f64,
) -> Vec<f64> {
    let anchor = if (intensity as f64) < mean_intensity {
        pbest
    } else {
        core
    };
    anchor.iter().zip(position).map(|(a, x)| a - x).collect()
}

/// `count` explosion sparks `x + β ∘ R`, mapped back into bounds.
pub fn generate_explosion_sparks<S: Sampler + ?Sized>(
    position: &[f64],
    radius: &[f64],
    count: usize,
    bounds: &SearchBounds,
    beta_mode: BetaMode,
    sampler: &mut S,
) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let spark: Vec<f64> = match beta_mode {
                BetaMode::PerDimension => position
                    .iter()
                    .zip(radius)
                    .map(|(x, r)| x + sampler.unit() * r)
                    .collect(),
                BetaMode::PerSpark => {
                    let beta = sampler.unit();
                    position.iter().zip(radius).map(|(x, r)| x + beta * r).collect()
                }
            };
            map_into_bounds(spark, bounds, sampler)
        })
        .collect()
}

/// Multiplies each listed dimension by `N(0,1) + 1`. No bound handling.
pub fn gaussian_mutation<S: Sampler + ?Sized>(
    parent: &[f64],
    dims: &[usize],
    sampler: &mut S,
) -> Vec<f64> {
    let mut spark = parent.to_vec();
    for &j in dims {
        spark[j] *= sampler.standard_normal() + 1.0;
    }
    spark
}

/// Gaussian sparks: each picks a parent firework uniformly, mutates a
/// uniformly sized (1..=d) random set of distinct dimensions, then maps back
/// into bounds.
pub fn gaussian_sparks<S: Sampler + ?Sized>(
    population: &[Individual],
    count: usize,
    bounds: &SearchBounds,
    sampler: &mut S,
) -> Vec<Vec<f64>> {
    if population.is_empty() {
        return Vec::new();
    }
    let d = bounds.dim();
    (0..count)
        .map(|_| {
            let parent = &population[sampler.below(population.len())];
            let n = 1 + sampler.below(d);
            let dims = choose_distinct(sampler, d, n);
            let spark = gaussian_mutation(&parent.position, &dims, sampler);
            map_into_bounds(spark, bounds, sampler)
        })
        .collect()
}

/// Replaces every out-of-range (or non-finite) coordinate with
/// `LB + β (UB - LB)`. Coordinates inside the closed interval are kept.
pub fn map_into_bounds<S: Sampler + ?Sized>(
    mut position: Vec<f64>,
    bounds: &SearchBounds,
    sampler: &mut S,
) -> Vec<f64> {
    let (lb, ub) = (bounds.lower(), bounds.upper());
    for x in position.iter_mut() {
        if !(*x >= lb && *x <= ub) {
            *x = lb + sampler.unit() * (ub - lb);
        }
    }
    position
}

/// Index of the minimal fitness, lowest index on ties.
pub fn argmin_fitness(candidates: &[Individual]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        match best {
            Some(b) if candidates[b].fitness <= c.fitness => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Elite-random selection: the best candidate takes the first slot, the other
/// `m - 1` slots are filled uniformly without replacement from the rest.
pub fn elite_random_select<S: Sampler + ?Sized>(
    candidates: &[Individual],
    m: usize,
    sampler: &mut S,
) -> Result<Vec<Individual>> {
    if m == 0 || candidates.len() < m {
        return Err(Error::invalid(format!(
            "cannot select {m} individuals from {} candidates",
            candidates.len()
        )));
    }
    let elite = argmin_fitness(candidates).expect("non-empty candidates");
    let rest: Vec<usize> = (0..candidates.len()).filter(|&i| i != elite).collect();
    let picks = choose_distinct(sampler, rest.len(), m - 1);
    let mut next = Vec::with_capacity(m);
    next.push(candidates[elite].clone());
    next.extend(picks.into_iter().map(|p| candidates[rest[p]].clone()));
    Ok(next)
}
