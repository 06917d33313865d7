use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, StandardNormal};

use super::{log_sum_exp, IsotropicGaussian, LogDensity, Sampler};
use crate::error::{check_dim, Error, Result};
use crate::rng::ChaCha8Rng;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// One diagonal-covariance Gaussian inside a [`GaussianMixture`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaussianComponent {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl GaussianComponent {
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        if mean.is_empty() {
            return Err(Error::invalid("mean", "dimension must be at least 1"));
        }
        check_dim(mean.len(), variance.len())?;
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("mean", "entries must be finite"));
        }
        if variance.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("variance", "entries must be finite and > 0"));
        }
        Ok(GaussianComponent { mean, variance })
    }

    /// Component with the same variance in every dimension.
    pub fn isotropic(mean: Vec<f64>, variance: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(mean, vec![variance; d])
    }

    fn log_normalizer(&self) -> f64 {
        -0.5 * self.variance.iter().map(|v| LN_2PI + v.ln()).sum::<f64>()
    }
}

/// Weighted mixture of diagonal Gaussians.
///
/// Weights must be nonnegative and sum to one (within `1e-12`). Zero-weight
/// components are kept but never contribute: their log-weight is `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    components: Vec<GaussianComponent>,
    log_weights: Vec<f64>,
    log_norms: Vec<f64>,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, components: Vec<GaussianComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("components", "need at least one component"));
        }
        check_dim(components.len(), weights.len())?;
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("weights", "must be finite and nonnegative"));
        }
        let total = crate::numeric::sum(&weights);
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("weights", format!("sum to {total}, expected 1")));
        }
        let d = components[0].mean.len();
        for c in &components {
            check_dim(d, c.mean.len())?;
        }
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        let log_norms = components.iter().map(|c| c.log_normalizer()).collect();
        Ok(GaussianMixture {
            weights,
            components,
            log_weights,
            log_norms,
        })
    }

    /// Equal-weight mixture of `centers` rows, each with isotropic variance
    /// `variance`.
    pub fn uniform_isotropic(centers: &crate::SampleMatrix, variance: f64) -> Result<Self> {
        let k = centers.rows();
        let comps = centers
            .iter_rows()
            .map(|r| GaussianComponent::isotropic(r.to_vec(), variance))
            .collect::<Result<Vec<_>>>()?;
        // Weights are exactly 1/k each; the compensated check tolerates the
        // rounding of 1/k for large k.
        Self::new(vec![1.0 / k as f64; k], comps)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components[0].mean.len()
    }

    /// Mixture mean `sum_k w_k mu_k`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for (w, c) in self.weights.iter().zip(&self.components) {
            for (mi, ci) in m.iter_mut().zip(&c.mean) {
                *mi += w * ci;
            }
        }
        m
    }

    /// Per-dimension variance of the mixture (law of total variance).
    pub fn marginal_variances(&self) -> Vec<f64> {
        let mean = self.mean();
        let mut v = vec![0.0; self.dim()];
        for (w, c) in self.weights.iter().zip(&self.components) {
            for d in 0..v.len() {
                let dm = c.mean[d] - mean[d];
                v[d] += w * (c.variance[d] + dm * dm);
            }
        }
        v
    }
}

impl From<&IsotropicGaussian> for GaussianMixture {
    fn from(g: &IsotropicGaussian) -> Self {
        let comp = GaussianComponent::isotropic(g.mean().to_vec(), g.sigma() * g.sigma())
            .expect("isotropic gaussian parameters are already validated");
        GaussianMixture::new(vec![1.0], vec![comp]).expect("single unit-weight component")
    }
}

impl LogDensity for GaussianMixture {
    fn dim(&self) -> usize {
        self.components[0].mean.len()
    }

    fn log_density(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let terms: Vec<f64> = self
            .components
            .iter()
            .zip(self.log_weights.iter().zip(&self.log_norms))
            .map(|(c, (&lw, &ln))| {
                if lw == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                let q: f64 = x
                    .iter()
                    .zip(c.mean.iter().zip(&c.variance))
                    .map(|(xi, (mi, vi))| (xi - mi) * (xi - mi) / vi)
                    .sum();
                lw + ln - 0.5 * q
            })
            .collect();
        log_sum_exp(&terms)
    }
}

impl Sampler for GaussianMixture {
    fn dim(&self) -> usize {
        self.components[0].mean.len()
    }

    fn draw_into(&self, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
        let pick = WeightedIndex::new(&self.weights).expect("weights validated at construction");
        for _ in 0..n {
            let c = &self.components[pick.sample(rng)];
            for (m, v) in c.mean.iter().zip(&c.variance) {
                let z: f64 = StandardNormal.sample(rng);
                out.push(m + v.sqrt() * z);
            }
        }
    }
}
