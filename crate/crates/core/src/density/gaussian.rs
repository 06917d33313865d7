use rand_distr::{Distribution, StandardNormal};

use super::{LogDensity, Sampler};
use crate::error::{check_dim, Error, Result};
use crate::matrix::SampleMatrix;
use crate::rng::ChaCha8Rng;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Gaussian with mean vector and one standard deviation shared by all
/// dimensions.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "RawIsotropic", into = "RawIsotropic")]
pub struct IsotropicGaussian {
    mean: Vec<f64>,
    sigma: f64,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct RawIsotropic {
    mean: Vec<f64>,
    sigma: f64,
}

impl TryFrom<RawIsotropic> for IsotropicGaussian {
    type Error = Error;
    fn try_from(r: RawIsotropic) -> Result<Self> {
        IsotropicGaussian::new(r.mean, r.sigma)
    }
}

impl From<IsotropicGaussian> for RawIsotropic {
    fn from(g: IsotropicGaussian) -> Self {
        RawIsotropic {
            mean: g.mean,
            sigma: g.sigma,
        }
    }
}

impl IsotropicGaussian {
    pub fn new(mean: Vec<f64>, sigma: f64) -> Result<Self> {
        if mean.is_empty() {
            return Err(Error::invalid("mean", "dimension must be at least 1"));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("mean", "entries must be finite"));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::invalid("sigma", format!("must be finite and > 0, got {sigma}")));
        }
        Ok(IsotropicGaussian { mean, sigma })
    }

    /// Zero-mean, unit-variance Gaussian in `dim` dimensions.
    pub fn standard(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], 1.0)
    }

    /// Maximum-likelihood fit: per-dimension mean and the pooled standard
    /// deviation over all coordinates.
    pub fn fit(data: &SampleMatrix) -> Result<Self> {
        let mean = data.column_means();
        let sq: Vec<f64> = data
            .iter_rows()
            .map(|r| crate::numeric::squared_distance(r, &mean))
            .collect();
        let var = crate::numeric::sum(&sq) / (data.rows() * data.cols()) as f64;
        Self::new(mean, var.sqrt())
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

impl LogDensity for IsotropicGaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.mean.len(), x.len())?;
        let d = self.mean.len() as f64;
        let r2 = crate::numeric::squared_distance(x, &self.mean);
        Ok(-0.5 * d * LN_2PI - d * self.sigma.ln() - r2 / (2.0 * self.sigma * self.sigma))
    }
}

impl Sampler for IsotropicGaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn draw_into(&self, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
        for _ in 0..n {
            for &m in &self.mean {
                let z: f64 = StandardNormal.sample(rng);
                out.push(m + self.sigma * z);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;

    #[test]
    fn log_density_examples() {
        let g = IsotropicGaussian::standard(1).unwrap();
        assert!((g.log_density(&[0.0]).unwrap() + 0.918_939).abs() < 1e-6);
        let g2 = IsotropicGaussian::standard(2).unwrap();
        assert!((g2.log_density(&[0.0, 0.0]).unwrap() + 1.837_877).abs() < 1e-6);
        // -0.5 ln(2 pi) - ln 2 - (3-1)^2 / (2*4)
        let g3 = IsotropicGaussian::new(vec![1.0], 2.0).unwrap();
        let hand = -0.5 * (2.0 * std::f64::consts::PI).ln() - 2f64.ln() - 0.5;
        assert!((g3.log_density(&[3.0]).unwrap() - hand).abs() < 1e-14);
        assert!((hand + 2.112_086).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters_and_dims() {
        assert!(IsotropicGaussian::new(vec![], 1.0).is_err());
        assert!(IsotropicGaussian::new(vec![0.0], 0.0).is_err());
        assert!(IsotropicGaussian::new(vec![f64::INFINITY], 1.0).is_err());
        let g = IsotropicGaussian::standard(2).unwrap();
        assert!(matches!(
            g.log_density(&[0.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn trapezoid_normalization() {
        let g = IsotropicGaussian::new(vec![0.7], 1.3).unwrap();
        let (lo, hi, n) = (0.7 - 13.0, 0.7 + 13.0, 100_000);
        let h = (hi - lo) / (n - 1) as f64;
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                w * g.log_density(&[lo + h * i as f64]).unwrap().exp()
            })
            .collect();
        let total = crate::numeric::sum(&vals) * h;
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn sampling_is_deterministic_and_has_right_moments() {
        let g = IsotropicGaussian::standard(1).unwrap();
        let a = g.sample(5, Seed(11)).unwrap();
        assert_eq!(a, g.sample(5, Seed(11)).unwrap());
        let s = g.sample(100_000, Seed(3)).unwrap();
        let m = crate::numeric::mean(s.as_slice());
        let v = crate::numeric::sample_variance(s.as_slice());
        assert!(m.abs() < 0.02, "mean {m}");
        assert!((v - 1.0).abs() < 0.03, "var {v}");
        assert!(g.sample(0, Seed(0)).is_err());
    }

    #[test]
    fn ml_fit_recovers_parameters() {
        let g = IsotropicGaussian::new(vec![1.0, -2.0, 0.5], 0.4).unwrap();
        let s = g.sample(50_000, Seed(5)).unwrap();
        let fit = IsotropicGaussian::fit(&s).unwrap();
        for (a, b) in fit.mean().iter().zip(g.mean()) {
            assert!((a - b).abs() < 0.01);
        }
        assert!((fit.sigma() - 0.4).abs() < 0.005);
    }
}
