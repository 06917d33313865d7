//! Density primitives: evaluation, sampling and stable aggregation.

mod gaussian;
mod mixture;
mod spec;

pub use gaussian::IsotropicGaussian;
pub use mixture::{GaussianComponent, GaussianMixture};
pub use spec::ModelSpec;

use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;
use crate::rng::{ChaCha8Rng, Seed};

/// `ln sum_i exp(values[i])`, shifted by the maximum so that inputs of any
/// magnitude neither overflow nor underflow. `-inf` entries contribute
/// nothing; an all `-inf` input returns `-inf`.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyAggregation);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("values", "NaN in log_sum_exp input"));
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if max == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let terms: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    Ok(max + crate::numeric::sum(&terms).ln())
}

/// `ln((1/m) sum_i exp(values[i]))`.
pub fn log_mean_exp(values: &[f64]) -> Result<f64> {
    Ok(log_sum_exp(values)? - (values.len() as f64).ln())
}

/// A normalized density on `R^D`, evaluated in nats.
pub trait LogDensity: Sync {
    fn dim(&self) -> usize;

    fn log_density(&self, x: &[f64]) -> Result<f64>;

    /// Mean log-density over the rows of `xs`, evaluated in parallel with a
    /// fixed-order reduction.
    fn mean_log_density(&self, xs: &SampleMatrix) -> Result<f64> {
        use rayon::prelude::*;
        crate::error::check_dim(self.dim(), xs.cols())?;
        let per_row = xs
            .as_slice()
            .par_chunks_exact(xs.cols())
            .map(|r| self.log_density(r))
            .collect::<Result<Vec<f64>>>()?;
        Ok(crate::numeric::mean(&per_row))
    }
}

/// A distribution that can be sampled.
pub trait Sampler: Sync {
    fn dim(&self) -> usize;

    /// Append `n` draws to `out` (row-major) using `rng`.
    fn draw_into(&self, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<f64>);

    /// `n` draws, deterministic for a fixed seed.
    fn sample(&self, n: usize, seed: Seed) -> Result<SampleMatrix> {
        if n == 0 {
            return Err(Error::invalid("n", "need at least one sample"));
        }
        let mut rng = seed.rng();
        let mut out = Vec::with_capacity(n * Sampler::dim(self));
        self.draw_into(n, &mut rng, &mut out);
        SampleMatrix::new(n, Sampler::dim(self), out)
    }
}

impl<T: LogDensity + ?Sized> LogDensity for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &[f64]) -> Result<f64> {
        (**self).log_density(x)
    }
}

impl<T: LogDensity + ?Sized> LogDensity for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &[f64]) -> Result<f64> {
        (**self).log_density(x)
    }
}

/// Uniform density on the box `[lo, hi)^D`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBox {
    lo: f64,
    hi: f64,
    dim: usize,
}

impl UniformBox {
    pub fn new(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("bounds", format!("need finite lo < hi, got [{lo}, {hi})")));
        }
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        Ok(UniformBox { lo, hi, dim })
    }

    /// The 8-bit "know nothing" model: `1/256` per pixel over `[0, 256)^D`.
    pub fn pixels(dim: usize) -> Result<Self> {
        Self::new(0.0, 256.0, dim)
    }
}

impl LogDensity for UniformBox {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> Result<f64> {
        crate::error::check_dim(self.dim, x.len())?;
        if x.iter().all(|&v| v >= self.lo && v < self.hi) {
            Ok(-(self.dim as f64) * (self.hi - self.lo).ln())
        } else {
            Ok(f64::NEG_INFINITY)
        }
    }
}

impl Sampler for UniformBox {
    fn dim(&self) -> usize {
        self.dim
    }

    fn draw_into(&self, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
        use rand::Rng;
        for _ in 0..n * self.dim {
            out.push(self.lo + (self.hi - self.lo) * rng.random::<f64>());
        }
    }
}

/// Adapter turning a closure into a [`LogDensity`]; handy for ad-hoc models
/// whose normalization the caller vouches for.
pub struct FnDensity<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnDensity<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnDensity { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> LogDensity for FnDensity<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> Result<f64> {
        crate::error::check_dim(self.dim, x.len())?;
        Ok((self.f)(x))
    }
}
