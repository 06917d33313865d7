//! Fitting an isotropic Gaussian to a target by minimizing KLD, MMD or JSD.
//!
//! * [`fit_kld`] is closed form: the moment-matched Gaussian.
//! * [`fit_mmd`] runs gradient descent on the biased (V-statistic) squared
//!   MMD between target samples and reparameterized model samples
//!   `mean + sigma * z` with a frozen noise bank `z`, so the objective is a
//!   deterministic function of `(mean, log sigma)` with analytic gradients.
//! * [`fit_jsd`] runs gradient descent on the JSD evaluated by tensor-grid
//!   quadrature against the target density, with central finite
//!   differences for the gradient.
//!
//! Both iterative fits work on `theta = (mean_1, ..., mean_D, ln sigma)`,
//! take plain gradient steps of fixed size and stop once the update norm
//! drops below the configured tolerance.

mod jsd;
mod mmd;

pub use jsd::{fit_jsd, fit_jsd_restarts, jsd, kld, QuadratureAxis, QuadratureGrid, MAX_GRID_DIM, MAX_GRID_POINTS};
pub use mmd::{fit_mmd, mmd_squared, MmdObjective};

use crate::density::{GaussianMixture, IsotropicGaussian};
use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;
use crate::rng::Seed;

/// Gaussian kernel scales for MMD; `k(u, v) = sum_j exp(-|u-v|^2 / (2 s_j^2))`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelBank {
    bandwidths: Vec<f64>,
}

/// Multipliers of the median pairwise distance used by
/// [`KernelBank::median_heuristic`].
pub const DEFAULT_BANDWIDTH_MULTIPLIERS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

impl KernelBank {
    pub fn new(bandwidths: Vec<f64>) -> Result<Self> {
        if bandwidths.is_empty() {
            return Err(Error::invalid("bandwidths", "kernel bank is empty"));
        }
        if bandwidths.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            return Err(Error::invalid("bandwidths", "must be finite and > 0"));
        }
        Ok(KernelBank { bandwidths })
    }

    /// `multipliers` times the median pairwise Euclidean distance of
    /// `samples` (all `n(n-1)/2` pairs).
    pub fn median_heuristic(samples: &SampleMatrix, multipliers: &[f64]) -> Result<Self> {
        let median = median_pairwise_distance(samples)?;
        Self::new(multipliers.iter().map(|m| m * median).collect())
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub(crate) fn eval_sq(&self, r2: f64) -> f64 {
        self.bandwidths
            .iter()
            .map(|s| (-r2 / (2.0 * s * s)).exp())
            .sum()
    }
}

pub fn median_pairwise_distance(samples: &SampleMatrix) -> Result<f64> {
    let n = samples.rows();
    if n < 2 {
        return Err(Error::invalid("samples", "median distance needs at least two rows"));
    }
    let mut d = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d.push(crate::numeric::squared_distance(samples.row(i), samples.row(j)).sqrt());
        }
    }
    let mid = d.len() / 2;
    let (_, m, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *m;
    if d.len() % 2 == 1 {
        Ok(upper)
    } else {
        let lower = d[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(0.5 * (lower + upper))
    }
}

/// Settings shared by the iterative fits.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FitConfig {
    pub max_iters: usize,
    pub step_size: f64,
    /// Stop once `|step_size * gradient| < tolerance`.
    pub tolerance: f64,
    /// Starting point; `None` starts from the maximum-likelihood Gaussian.
    pub init: Option<IsotropicGaussian>,
    pub seed: Seed,
    /// Size of the frozen standard-normal bank used by the MMD fit.
    pub model_samples: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iters: 500,
            step_size: 1.0,
            tolerance: 1e-6,
            init: None,
            seed: Seed(0),
            model_samples: 1000,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be at least 1"));
        }
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::invalid("step_size", "must be finite and > 0"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance", "must be > 0"));
        }
        if self.model_samples == 0 {
            return Err(Error::invalid("model_samples", "must be at least 1"));
        }
        Ok(())
    }
}

/// One row of an optimization trace: the objective at the parameters
/// reached after `iter` updates.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub mean: Vec<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub model: IsotropicGaussian,
    /// Objective at `model`.
    pub objective: f64,
    /// Number of parameter updates taken.
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Minimizer of `KLD[target || q]` over isotropic Gaussians `q`: the mixture
/// mean, and `sigma^2 = E|x - mean|^2 / D` from the mixture moments.
pub fn fit_kld(target: &GaussianMixture) -> IsotropicGaussian {
    let mean = target.mean();
    let total: f64 = target.marginal_variances().iter().sum();
    let sigma = (total / target.dim() as f64).sqrt();
    IsotropicGaussian::new(mean, sigma).expect("mixture moments are finite and positive")
}

pub(crate) fn theta_of(g: &IsotropicGaussian) -> Vec<f64> {
    let mut t = g.mean().to_vec();
    t.push(g.sigma().ln());
    t
}

pub(crate) fn model_of(theta: &[f64]) -> Result<IsotropicGaussian> {
    let d = theta.len() - 1;
    IsotropicGaussian::new(theta[..d].to_vec(), theta[d].exp())
}

/// Fixed-step gradient descent on `theta`. `eval` returns the objective and
/// its gradient.
pub(crate) fn descend(
    mut theta: Vec<f64>,
    config: &FitConfig,
    mut eval: impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
) -> Result<FitOutcome> {
    config.validate()?;
    let d = theta.len() - 1;
    let row = |iter: usize, objective: f64, t: &[f64]| TraceRow {
        iter,
        objective,
        mean: t[..d].to_vec(),
        sigma: t[d].exp(),
    };
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for iter in 0..config.max_iters {
        let (f, g) = eval(&theta)?;
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: iter });
        }
        trace.push(row(iter, f, &theta));
        let mut norm2 = 0.0;
        for (t, gi) in theta.iter_mut().zip(&g) {
            let step = config.step_size * gi;
            *t -= step;
            norm2 += step * step;
        }
        iterations = iter + 1;
        if norm2.sqrt() < config.tolerance {
            converged = true;
            break;
        }
    }
    let (objective, _) = eval(&theta)?;
    trace.push(row(iterations, objective, &theta));
    Ok(FitOutcome {
        model: model_of(&theta)?,
        objective,
        iterations,
        converged,
        trace,
    })
}
