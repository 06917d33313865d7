//! Parzen-window (Gaussian KDE) scores and the ways they can be gamed.
//!
//! A Parzen estimator turns any set of samples into a density, so a model
//! can be scored by the test log-likelihood of a KDE built on its samples.
//! [`parzen_convergence_sweep`] shows how slowly that estimate approaches
//! the truth in moderate dimensions, and [`kmeans`] plus
//! [`sample_centroids`] build a trivial generator that outscores real data.

mod kmeans;

pub use kmeans::{kmeans, sample_centroids, KMeansResult};

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::density::{log_sum_exp, IsotropicGaussian, LogDensity, Sampler};
use crate::error::{check_dim, Error, Result};
use crate::matrix::SampleMatrix;
use crate::numeric::{log_space, mean, squared_distance, std_error};
use crate::rng::Seed;

/// Uniform mixture of isotropic Gaussians with a shared bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct ParzenEstimator {
    centers: SampleMatrix,
    bandwidth: f64,
}

impl ParzenEstimator {
    pub fn new(centers: SampleMatrix, bandwidth: f64) -> Result<Self> {
        check_bandwidth(bandwidth)?;
        Ok(ParzenEstimator { centers, bandwidth })
    }

    pub fn centers(&self) -> &SampleMatrix {
        &self.centers
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("bandwidth", format!("must be finite and > 0, got {h}")))
    }
}

/// Log-density at `x` for every bandwidth in `grid`, sharing one pass of
/// distance computations.
fn log_density_per_bandwidth(centers: &SampleMatrix, x: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let r2: Vec<f64> = centers.iter_rows().map(|c| squared_distance(x, c)).collect();
    let ln_m = (centers.rows() as f64).ln();
    let d = centers.cols() as f64;
    let mut terms = vec![0.0; r2.len()];
    grid.iter()
        .map(|&h| {
            let inv = 0.5 / (h * h);
            for (t, r) in terms.iter_mut().zip(&r2) {
                *t = -r * inv;
            }
            Ok(log_sum_exp(&terms)? - ln_m - 0.5 * d * (2.0 * PI * h * h).ln())
        })
        .collect()
}

impl LogDensity for ParzenEstimator {
    fn dim(&self) -> usize {
        self.centers.cols()
    }

    fn log_density(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.centers.cols(), x.len())?;
        Ok(log_density_per_bandwidth(&self.centers, x, &[self.bandwidth])?[0])
    }
}

/// Mean and standard error of a per-item score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub mean: f64,
    pub std_error: f64,
}

impl Score {
    fn of(values: &[f64]) -> Self {
        Score {
            mean: mean(values),
            std_error: std_error(values),
        }
    }
}

/// Scores of `test` under the KDE on `centers` at every grid bandwidth.
pub fn parzen_scores(centers: &SampleMatrix, test: &SampleMatrix, grid: &[f64]) -> Result<Vec<Score>> {
    check_dim(centers.cols(), test.cols())?;
    if grid.is_empty() {
        return Err(Error::invalid("grid", "bandwidth grid is empty"));
    }
    for &h in grid {
        check_bandwidth(h)?;
    }
    let per_row = test
        .as_slice()
        .par_chunks_exact(test.cols())
        .map(|x| log_density_per_bandwidth(centers, x, grid))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok((0..grid.len())
        .map(|g| Score::of(&per_row.iter().map(|r| r[g]).collect::<Vec<_>>()))
        .collect())
}

/// Mean test log-likelihood, in nats per item, under `est`.
pub fn parzen_log_likelihood(est: &ParzenEstimator, test: &SampleMatrix) -> Result<f64> {
    Ok(parzen_scores(&est.centers, test, &[est.bandwidth])?[0].mean)
}

/// The grid bandwidth with the highest mean validation log-likelihood, and
/// that score. Ties go to the smaller bandwidth.
pub fn select_bandwidth_scored(samples: &SampleMatrix, validation: &SampleMatrix, grid: &[f64]) -> Result<(f64, Score)> {
    let scores = parzen_scores(samples, validation, grid)?;
    let mut best = 0;
    for i in 1..grid.len() {
        let (a, b) = (scores[i].mean, scores[best].mean);
        if a > b || (a == b && grid[i] < grid[best]) {
            best = i;
        }
    }
    Ok((grid[best], scores[best]))
}

pub fn select_bandwidth(samples: &SampleMatrix, validation: &SampleMatrix, grid: &[f64]) -> Result<f64> {
    Ok(select_bandwidth_scored(samples, validation, grid)?.0)
}

/// Number of points in [`bandwidth_grid`].
pub const BANDWIDTH_GRID_POINTS: usize = 20;

/// Log-spaced bandwidths over `[0.01, 1] * scale`.
pub fn bandwidth_grid(scale: f64) -> Result<Vec<f64>> {
    check_bandwidth(scale)?;
    Ok(log_space(0.01 * scale, scale, BANDWIDTH_GRID_POINTS))
}

/// Root mean marginal variance of `data`; the natural `scale` for
/// [`bandwidth_grid`].
pub fn data_scale(data: &SampleMatrix) -> f64 {
    let means = data.column_means();
    let mut total = 0.0;
    for x in data.iter_rows() {
        total += squared_distance(x, &means);
    }
    (total / (data.rows() * data.cols()) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sample_count: usize,
    pub bandwidth: f64,
    pub mean_test_ll: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Mean test log-likelihood under the true model.
    pub reference: f64,
    pub reference_std_error: f64,
}

/// Parzen estimates of the test log-likelihood from `n` true samples, for
/// each `n` in `sample_counts`. Samples for the `i`-th count come from
/// `seed.derive(i)`; the first 90% (rounded up) build the estimator and the
/// remainder selects the bandwidth. A single sample validates on itself.
pub fn parzen_convergence_sweep(
    true_model: &IsotropicGaussian,
    sample_counts: &[usize],
    test: &SampleMatrix,
    bandwidth_grid: &[f64],
    seed: Seed,
) -> Result<SweepResult> {
    check_dim(true_model.dim(), test.cols())?;
    if sample_counts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("sample_counts", "must be strictly increasing"));
    }
    let mut rows = Vec::with_capacity(sample_counts.len());
    for (i, &n) in sample_counts.iter().enumerate() {
        let samples = true_model.sample(n, seed.derive(i as u64))?;
        let (fit, validation) = if n < 2 {
            (samples.clone(), samples)
        } else {
            samples.split_at(n - n / 10)?
        };
        let (bandwidth, _) = select_bandwidth_scored(&fit, &validation, bandwidth_grid)?;
        let score = parzen_scores(&fit, test, &[bandwidth])?[0];
        rows.push(SweepRow {
            sample_count: n,
            bandwidth,
            mean_test_ll: score.mean,
            std_error: score.std_error,
        });
    }
    let reference = test
        .as_slice()
        .par_chunks_exact(test.cols())
        .map(|x| true_model.log_density(x))
        .collect::<Result<Vec<f64>>>()?;
    let reference = Score::of(&reference);
    Ok(SweepResult {
        rows,
        reference: reference.mean,
        reference_std_error: reference.std_error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub name: String,
    pub n_samples: usize,
    pub bandwidth: f64,
    pub mean_nats: f64,
    pub std_error: f64,
}

/// Scores each named sample set by the test log-likelihood of its KDE, with
/// the bandwidth chosen on `validation`. Rows are sorted by descending
/// score; equal scores keep their input order.
pub fn parzen_benchmark(
    entries: &[(String, SampleMatrix)],
    test: &SampleMatrix,
    validation: &SampleMatrix,
    bandwidth_grid: &[f64],
) -> Result<Vec<BenchmarkRow>> {
    check_dim(test.cols(), validation.cols())?;
    let mut rows = entries
        .iter()
        .map(|(name, samples)| {
            let (bandwidth, _) = select_bandwidth_scored(samples, validation, bandwidth_grid)?;
            let s = parzen_scores(samples, test, &[bandwidth])?[0];
            Ok(BenchmarkRow {
                name: name.clone(),
                n_samples: samples.rows(),
                bandwidth,
                mean_nats: s.mean,
                std_error: s.std_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.mean_nats.total_cmp(&a.mean_nats));
    Ok(rows)
}
