//! Uniformity checks and summary metrics for sample batches.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::Polytope;
use crate::linalg::Matrix;
use crate::sampler::SampleBatch;
use crate::triangulation::{decompose, Decomposition};

/// Upper 0.001 quantile of the standard normal.
const Z_999: f64 = 3.090_232_306_167_813;
/// Cells with fewer expected counts are pooled into one tail cell.
const MIN_EXPECTED: f64 = 5.0;
const MAX_CELLS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub critical_value_001: f64,
    pub pass: bool,
}

impl ChiSquareReport {
    fn new(statistic: f64, dof: usize) -> Self {
        let critical_value_001 = chi_square_critical_001(dof);
        Self {
            statistic,
            dof,
            critical_value_001,
            pass: statistic < critical_value_001,
        }
    }
}

/// Wilson–Hilferty approximation of the 0.999 quantile of χ²(dof).
pub fn chi_square_critical_001(dof: usize) -> f64 {
    let k = dof.max(1) as f64;
    let c = 2.0 / (9.0 * k);
    k * (1.0 - c + Z_999 * c.sqrt()).powi(3)
}

/// Pearson statistic with cells of expected count < 5 pooled into a tail cell.
///
/// A single surviving cell yields a trivially passing report with one degree
/// of freedom and a zero statistic.
pub fn pearson(observed: &[f64], expected: &[f64]) -> ChiSquareReport {
    debug_assert_eq!(observed.len(), expected.len());
    let mut statistic = 0.0;
    let mut cells = 0usize;
    let (mut tail_obs, mut tail_exp) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        if e >= MIN_EXPECTED {
            statistic += (o - e) * (o - e) / e;
            cells += 1;
        } else {
            tail_obs += o;
            tail_exp += e;
        }
    }
    if tail_exp > 0.0 {
        statistic += (tail_obs - tail_exp) * (tail_obs - tail_exp) / tail_exp;
        cells += 1;
    } else if tail_obs > 0.0 {
        statistic = f64::INFINITY;
    }
    if cells <= 1 {
        let s = if statistic.is_finite() {
            0.0
        } else {
            statistic
        };
        return ChiSquareReport::new(s, 1);
    }
    ChiSquareReport::new(statistic, cells - 1)
}

/// Volume of `p ∩ [lower, upper]`; zero when the intersection is empty or flat.
pub fn clipped_volume(p: &Polytope, lower: &[f64], upper: &[f64]) -> Result<f64> {
    let clipped = p.clip_to_box(lower, upper)?;
    match decompose(&clipped, Execution::Sequential) {
        Ok((_, d)) => Ok(d.total_volume()),
        Err(Error::NotBounded(_) | Error::DegeneratePolytope(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Regular grid over the bounding box of `p`.
struct Grid {
    n: usize,
    per_axis: usize,
    lower: Vec<f64>,
    width: Vec<f64>,
}

impl Grid {
    fn cells(&self) -> usize {
        self.per_axis.pow(self.n as u32)
    }

    fn cell_of(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        for j in (0..self.n).rev() {
            let t = ((x[j] - self.lower[j]) / self.width[j]).floor();
            let k = (t.max(0.0) as usize).min(self.per_axis - 1);
            idx = idx * self.per_axis + k;
        }
        idx
    }

    fn bounds(&self, mut idx: usize) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![0.0; self.n];
        let mut hi = vec![0.0; self.n];
        for j in 0..self.n {
            let k = idx % self.per_axis;
            idx /= self.per_axis;
            lo[j] = self.lower[j] + k as f64 * self.width[j];
            hi[j] = if k + 1 == self.per_axis {
                self.lower[j] + self.per_axis as f64 * self.width[j]
            } else {
                self.lower[j] + (k + 1) as f64 * self.width[j]
            };
        }
        (lo, hi)
    }
}

/// Exact fraction of `Vol(P)` in each cell of a `grid`-per-axis box grid
/// over the bounding box of `p`.
pub fn cell_masses(p: &Polytope, grid: usize, exec: Execution) -> Result<Vec<f64>> {
    grid_masses(p, grid, exec).map(|(_, m)| m)
}

fn grid_masses(p: &Polytope, grid: usize, exec: Execution) -> Result<(Grid, Vec<f64>)> {
    let (v, d) = decompose(p, exec)?;
    let (lower, upper) = v.bounding_box()?;
    let g = make_grid(p.dim(), grid, lower, &upper)?;
    let total = d.total_volume();
    let vols = exec.map_range(g.cells(), |c| {
        let (lo, hi) = g.bounds(c);
        clipped_volume(p, &lo, &hi)
    });
    let masses = vols
        .into_iter()
        .map(|v| v.map(|v| v / total))
        .collect::<Result<Vec<_>>>()?;
    Ok((g, masses))
}

fn make_grid(n: usize, grid: usize, lower: Vec<f64>, upper: &[f64]) -> Result<Grid> {
    if grid == 0 {
        return Err(Error::invalid("grid must have at least one bin per axis"));
    }
    match grid.checked_pow(n as u32) {
        Some(c) if c <= MAX_CELLS => {}
        _ => {
            return Err(Error::TooLarge(format!(
                "{grid}^{n} grid cells exceed the limit of {MAX_CELLS}"
            )))
        }
    }
    let width = lower
        .iter()
        .zip(upper)
        .map(|(l, u)| (u - l) / grid as f64)
        .collect();
    Ok(Grid {
        n,
        per_axis: grid,
        lower,
        width,
    })
}

/// Pearson test of the batch against uniform mass on a box grid over `p`.
///
/// Expected counts are `N Vol(cell ∩ P) / Vol(P)`, computed exactly by
/// triangulating each clipped cell.
pub fn chi_square_bins(batch: &SampleBatch, p: &Polytope, grid: usize) -> Result<ChiSquareReport> {
    chi_square_bins_with(batch, p, grid, Execution::default())
}

pub fn chi_square_bins_with(
    batch: &SampleBatch,
    p: &Polytope,
    grid: usize,
    exec: Execution,
) -> Result<ChiSquareReport> {
    if batch.dim() != p.dim() {
        return Err(Error::invalid("batch and polytope differ in dimension"));
    }
    let (g, masses) = grid_masses(p, grid, exec)?;
    let nonempty = masses.iter().filter(|&&m| m > 0.0).count();
    let n_samples = batch.len();
    if n_samples < 5 * nonempty {
        return Err(Error::InsufficientData(format!(
            "{n_samples} samples for {nonempty} nonempty cells (need at least {})",
            5 * nonempty
        )));
    }
    let mut observed = vec![0.0; masses.len()];
    for x in batch.points() {
        observed[g.cell_of(x)] += 1.0;
    }
    let expected: Vec<f64> = masses.iter().map(|m| m * n_samples as f64).collect();
    Ok(pearson(&observed, &expected))
}

/// Pearson test of simplex provenance counts against `N q_k`.
pub fn chi_square_membership(batch: &SampleBatch, d: &Decomposition) -> Result<ChiSquareReport> {
    let k = d.len();
    let mut observed = vec![0.0; k];
    for &j in batch.simplex_index() {
        if j < 0 || j as usize >= k {
            return Err(Error::invalid(format!(
                "simplex index {j} is missing or outside 0..{k}"
            )));
        }
        observed[j as usize] += 1.0;
    }
    let n = batch.len() as f64;
    let expected: Vec<f64> = d.weights().iter().map(|q| q * n).collect();
    Ok(pearson(&observed, &expected))
}

/// Samples per dimension, `N / n`.
pub fn sc_metric(n_samples: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    Ok(n_samples as f64 / n as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub mean: Vec<f64>,
    /// Unbiased sample covariance.
    pub covariance: Matrix,
    /// `sqrt(var_j / N)` per coordinate.
    pub mean_std_error: Vec<f64>,
}

pub fn moment_report(batch: &SampleBatch) -> Result<MomentReport> {
    let (n, count) = (batch.dim(), batch.len());
    if count < 2 {
        return Err(Error::InsufficientData(format!(
            "moments need at least 2 samples, got {count}"
        )));
    }
    let mut mean = vec![0.0; n];
    for x in batch.points() {
        mean.iter_mut().zip(x).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= count as f64);
    let mut cov = Matrix::zeros(n, n);
    for x in batch.points() {
        for i in 0..n {
            let di = x[i] - mean[i];
            for j in i..n {
                cov[(i, j)] += di * (x[j] - mean[j]);
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            let c = cov[(i, j)] / (count - 1) as f64;
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }
    let mean_std_error = (0..n)
        .map(|i| (cov[(i, i)] / count as f64).sqrt())
        .collect();
    Ok(MomentReport {
        mean,
        covariance: cov,
        mean_std_error,
    })
}

/// Fraction of batch points inside the closed box `[lower, upper]`.
pub fn box_fraction(batch: &SampleBatch, lower: &[f64], upper: &[f64]) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    let inside = batch
        .points()
        .filter(|x| {
            x.iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| l <= v && v <= u)
        })
        .count();
    inside as f64 / batch.len() as f64
}
