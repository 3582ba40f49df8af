//! Box-counting (correlation-type) fractal dimension of a point cloud.
//!
//! The unit hypercube is cut into cells of side `r`; with `C_i` the number
//! of points in occupied cell `i`, `ln Σ C_i²` is regressed on `ln r` over a
//! contiguous run of scales and the slope is the dimension estimate. The
//! scale window is chosen automatically as the best least-squares fit.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Lattice radii, strictly descending, all in `(0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    scales: Vec<f64>,
}

impl ScaleGrid {
    pub const MIN_SCALES: usize = 6;

    pub fn new(scales: Vec<f64>) -> Result<Self> {
        if scales.len() < Self::MIN_SCALES {
            return Err(Error::invalid(format!(
                "scale grid needs at least {} scales, got {}",
                Self::MIN_SCALES,
                scales.len()
            )));
        }
        if scales.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::invalid("every scale must lie in (0, 1]"));
        }
        if scales.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("scales must be strictly descending"));
        }
        Ok(Self { scales })
    }

    /// `r = 2^-k` for `k = k_min..=k_max`.
    pub fn dyadic(k_min: u32, k_max: u32) -> Result<Self> {
        Self::new((k_min..=k_max).map(|k| 0.5f64.powi(k as i32)).collect())
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }
}

impl Default for ScaleGrid {
    fn default() -> Self {
        Self::dyadic(1, 10).expect("ten dyadic scales")
    }
}

/// Result of [`estimate_fd`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdEstimate {
    pub fd: f64,
    /// `(r_low, r_high)`: smallest and largest radius of the fitted window.
    pub window: (f64, f64),
    pub r_squared: f64,
    /// `ceil(fd)`.
    pub cardinality: usize,
    /// Every scale saw the same occupancy sum (e.g. one repeated point).
    pub degenerate: bool,
}

/// Min-max scales every column into `[0, 1]`; constant columns become 0.
pub fn normalize_unit_cube(points: &[f64], dim: usize) -> Vec<f64> {
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for row in points.chunks_exact(dim) {
        for (j, &v) in row.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    points
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let j = i % dim;
            let range = hi[j] - lo[j];
            if range > 0.0 {
                ((v - lo[j]) / range).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect()
}

fn check_points(points: &[f64], dim: usize) -> Result<usize> {
    if dim == 0 || points.len() % dim != 0 {
        return Err(Error::invalid("point buffer is not a whole number of rows"));
    }
    if points.is_empty() {
        return Err(Error::invalid("empty dataset"));
    }
    if let Some(i) = points.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid(format!(
            "point {} coordinate {} = {} is outside the unit hypercube",
            i / dim,
            i % dim,
            points[i]
        )));
    }
    Ok(points.len() / dim)
}

/// Occupied-cell counts at radius `r`, keyed by integer cell coordinates.
fn cell_counts(points: &[f64], dim: usize, r: f64) -> HashMap<Vec<u32>, u64> {
    let last = ((1.0 / r).ceil() as u32).max(1) - 1;
    let mut cells: HashMap<Vec<u32>, u64> = HashMap::new();
    for row in points.chunks_exact(dim) {
        let key: Vec<u32> = row
            .iter()
            .map(|&v| ((v / r).floor() as u32).min(last))
            .collect();
        *cells.entry(key).or_insert(0) += 1;
    }
    cells
}

/// Number of occupied cells at radius `r`.
pub fn occupied_cells(points: &[f64], dim: usize, r: f64) -> Result<usize> {
    check_points(points, dim)?;
    check_radius(r)?;
    Ok(cell_counts(points, dim, r).len())
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("radius must lie in (0, 1], got {r}")))
    }
}

/// `ln Σ C²` over the occupied cells of side `r`. Points must already lie in
/// the unit hypercube; a coordinate of exactly 1 falls in the last cell.
pub fn box_log_sum(points: &[f64], dim: usize, r: f64) -> Result<f64> {
    check_points(points, dim)?;
    check_radius(r)?;
    let sum: f64 = cell_counts(points, dim, r)
        .values()
        .map(|&c| (c as f64) * (c as f64))
        .sum();
    Ok(sum.ln())
}

/// `ln Σ C²` at every scale of the grid.
pub fn log_sums(points: &[f64], dim: usize, grid: &ScaleGrid, exec: Execution) -> Result<Vec<f64>> {
    check_points(points, dim)?;
    Ok(exec.map(grid.scales(), |&r| {
        let sum: f64 = cell_counts(points, dim, r)
            .values()
            .map(|&c| (c as f64) * (c as f64))
            .sum();
        sum.ln()
    }))
}

/// Ordinary least squares `y = a + b x`; returns `(slope, r_squared)`.
///
/// A window whose `y` values are all equal carries no scaling information
/// and is scored with `r_squared = 0`.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if syy == 0.0 {
        return (0.0, 0.0);
    }
    let r2 = (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0);
    (slope, r2)
}

/// R² values closer than this count as a tie.
const R2_TIE: f64 = 1e-12;

/// Fits the log-log curve `(ln r, ln Σ C²)` over every contiguous window of
/// at least `min_window` scales and keeps the best fit (highest R², then the
/// widest window, then the smallest `r_low`). The slope is clamped to `[0, dim]`.
pub fn fit_log_sums(scales: &[f64], log_sums: &[f64], dim: usize, min_window: usize) -> Result<FdEstimate> {
    if min_window < 4 {
        return Err(Error::invalid(format!("min_window must be at least 4, got {min_window}")));
    }
    if scales.len() != log_sums.len() || scales.len() < min_window {
        return Err(Error::invalid(format!(
            "need at least {min_window} scales with one log-sum each"
        )));
    }
    let n = scales.len();
    if log_sums.iter().all(|&v| v == log_sums[0]) {
        return Ok(FdEstimate {
            fd: 0.0,
            window: (scales[n - 1], scales[0]),
            r_squared: 1.0,
            cardinality: 0,
            degenerate: true,
        });
    }
    let ln_r: Vec<f64> = scales.iter().map(|r| r.ln()).collect();
    // (r2, len, start, slope)
    let mut best: Option<(f64, usize, usize, f64)> = None;
    for start in 0..n {
        for end in (start + min_window)..=n {
            let (slope, r2) = least_squares(&ln_r[start..end], &log_sums[start..end]);
            let len = end - start;
            let better = match best {
                None => true,
                Some((br2, blen, bstart, _)) => {
                    let tie = (r2 - br2).abs() <= R2_TIE;
                    (!tie && r2 > br2)
                        || (tie && len > blen)
                        // scales descend, so a later end means a smaller r_low
                        || (tie && len == blen && end > bstart + blen)
                }
            };
            if better {
                best = Some((r2, len, start, slope));
            }
        }
    }
    let (r_squared, len, start, slope) = best.expect("at least one window");
    let fd = slope.clamp(0.0, dim as f64);
    Ok(FdEstimate {
        fd,
        window: (scales[start + len - 1], scales[start]),
        r_squared,
        cardinality: fd.ceil() as usize,
        degenerate: false,
    })
}

/// Fractal dimension of points already normalized into `[0, 1]^dim`.
pub fn estimate_fd(
    points: &[f64],
    dim: usize,
    grid: &ScaleGrid,
    min_window: usize,
    exec: Execution,
) -> Result<FdEstimate> {
    let sums = log_sums(points, dim, grid, exec)?;
    fit_log_sums(grid.scales(), &sums, dim, min_window)
}

/// Normalizes the dataset's features into the unit hypercube, then
/// estimates their fractal dimension.
pub fn estimate_dataset_fd(
    data: &Dataset,
    grid: &ScaleGrid,
    min_window: usize,
    exec: Execution,
) -> Result<FdEstimate> {
    let d = data.n_features();
    let points = normalize_unit_cube(data.features(), d);
    estimate_fd(&points, d, grid, min_window, exec)
}

/// Percentage of features removed when keeping `cardinality` of `d`.
pub fn reduction_rate(d: usize, cardinality: usize) -> f64 {
    (d as f64 - cardinality as f64) / d as f64 * 100.0
}
