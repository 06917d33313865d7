//! Dequantization, discrete likelihoods and the mixture constructions used
//! to show how likelihood, samples and classification can disagree.
//!
//! Continuous densities are compared on integer pixel data by adding
//! uniform noise ([`dequantize`]). The resulting continuous log-likelihood
//! lower-bounds the log-probability mass of the unit cell around each image,
//! which [`discrete_log_likelihood`] estimates by Monte Carlo.

use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::LN_2;

use crate::density::{log_mean_exp, GaussianMixture, LogDensity, Sampler};
use crate::error::{check_dim, Error, Result};
use crate::images::QuantizedImageSet;
use crate::matrix::SampleMatrix;
use crate::numeric::{logistic, mean, sample_variance, sum};
use crate::rng::Seed;

/// Weight of the good component when none is given.
pub const DEFAULT_WEIGHT_GOOD: f64 = 0.01;

const MAX_BATCHES: usize = 32;

/// `x + u` with `u ~ U[0,1)^D` drawn independently per entry. Image `i`
/// uses stream `i` of `seed`, so the output does not depend on threading.
/// With `rescale` the values are divided by 256 and lie in `[0, 1)`.
pub fn dequantize(images: &QuantizedImageSet, seed: Seed, rescale: bool) -> Result<SampleMatrix> {
    let d = images.dim();
    let scale = if rescale { 1.0 / 256.0 } else { 1.0 };
    let mut data = vec![0.0; images.len() * d];
    data.par_chunks_exact_mut(d).enumerate().for_each(|(i, row)| {
        let mut rng = seed.stream(i as u64);
        for (y, &x) in row.iter_mut().zip(images.image(i)) {
            *y = (x as f64 + rng.random::<f64>()) * scale;
        }
    });
    let m = SampleMatrix::new(images.len(), d, data)?;
    if rescale {
        m.with_value_range(0.0, 1.0)
    } else {
        m.with_value_range(0.0, 256.0)
    }
}

/// Converts a log-likelihood of data rescaled by `1/256` into pixel units.
/// The change of variables `y = x / 256` multiplies densities by `256^D`, so
/// this subtracts `D ln 256`.
pub fn rescaled_to_pixel_units(ll_rescaled: f64, d: usize) -> f64 {
    ll_rescaled - d as f64 * 256f64.ln()
}

/// `-ll / (d ln 2)`: the code length per dimension implied by a
/// log-likelihood of `ll` nats per item.
pub fn nats_to_bits_per_dim(ll_nats_per_item: f64, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::invalid("d", "must be at least 1"));
    }
    Ok(-ll_nats_per_item / (d as f64 * LN_2))
}

/// Monte Carlo estimate of `ln Q(x)`, the log-probability mass a continuous
/// model puts on the unit cell `x + [0,1)^D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteLLEstimate {
    pub mean_log_mass: f64,
    /// Delta-method standard error from batch means; infinite when it
    /// cannot be estimated.
    pub std_error: f64,
    pub mc_samples: usize,
}

/// Log-densities `ln q(x + u_j)` for `m` uniform offsets.
fn cell_log_densities(model: &(impl LogDensity + ?Sized), x: &[u8], m: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let mut y = vec![0.0; x.len()];
    (0..m)
        .map(|_| {
            for (yi, &xi) in y.iter_mut().zip(x) {
                *yi = xi as f64 + rng.random::<f64>();
            }
            model.log_density(&y)
        })
        .collect()
}

fn estimate_from(logs: &[f64]) -> Result<DiscreteLLEstimate> {
    let m = logs.len();
    let lme = log_mean_exp(logs)?;
    if lme == f64::NEG_INFINITY {
        return Ok(DiscreteLLEstimate {
            mean_log_mass: lme,
            std_error: f64::INFINITY,
            mc_samples: m,
        });
    }
    let std_error = if m < 2 {
        f64::INFINITY
    } else {
        let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - shift).exp()).collect();
        let b = m.min(MAX_BATCHES);
        let batch_means: Vec<f64> = (0..b).map(|k| mean(&w[k * m / b..(k + 1) * m / b])).collect();
        let q = mean(&w);
        (sample_variance(&batch_means) / b as f64).sqrt() / q
    };
    Ok(DiscreteLLEstimate {
        mean_log_mass: lme,
        std_error,
        mc_samples: m,
    })
}

/// `ln (1/m) sum_j q(x + u_j)` with `u_j ~ U[0,1)^D`. The standard error
/// comes from the spread of `min(m, 32)` batch means, divided by the overall
/// mean (delta method for the logarithm).
pub fn discrete_log_likelihood(
    model: &(impl LogDensity + ?Sized),
    x: &[u8],
    mc_samples: usize,
    seed: Seed,
) -> Result<DiscreteLLEstimate> {
    check_dim(model.dim(), x.len())?;
    if mc_samples == 0 {
        return Err(Error::invalid("mc_samples", "must be at least 1"));
    }
    let logs = cell_log_densities(model, x, mc_samples, &mut seed.rng())?;
    estimate_from(&logs)
}

/// Continuous and discrete average log-likelihoods of the same images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenCheck {
    /// Mean over images of `ln q(x + u)` with one offset per image.
    pub continuous_ll: f64,
    /// Mean over images of the [`discrete_log_likelihood`] estimate.
    pub discrete_ll: f64,
    /// Standard error of `discrete_ll - continuous_ll` from the Monte Carlo
    /// noise of both terms.
    pub std_error: f64,
    pub mc_samples: usize,
}

impl JensenCheck {
    pub fn gap(&self) -> f64 {
        self.discrete_ll - self.continuous_ll
    }

    /// Whether `continuous_ll <= discrete_ll + k * std_error`.
    pub fn holds_within(&self, k: f64) -> bool {
        self.continuous_ll <= self.discrete_ll + k * self.std_error
    }
}

/// Evaluates both sides of the bound `E[ln q(x+u)] <= ln Q(x)` on every
/// image. Image `i` draws its continuous offset and its Monte Carlo offsets
/// from two separate streams derived from `seed`.
pub fn jensen_bound_check(
    model: &(impl LogDensity + ?Sized),
    images: &QuantizedImageSet,
    seed: Seed,
    mc_samples: usize,
) -> Result<JensenCheck> {
    check_dim(model.dim(), images.dim())?;
    if mc_samples == 0 {
        return Err(Error::invalid("mc_samples", "must be at least 1"));
    }
    if images.is_empty() {
        return Err(Error::EmptyAggregation);
    }
    let cont_seed = seed.derive(1);
    let disc_seed = seed.derive(2);
    let per_image = (0..images.len())
        .into_par_iter()
        .map(|i| {
            let x = images.image(i);
            let c = cell_log_densities(model, x, 1, &mut cont_seed.stream(i as u64))?[0];
            let logs = cell_log_densities(model, x, mc_samples, &mut disc_seed.stream(i as u64))?;
            let est = estimate_from(&logs)?;
            let spread = if logs.len() < 2 || logs.iter().any(|l| !l.is_finite()) {
                f64::INFINITY
            } else {
                sample_variance(&logs)
            };
            Ok((c, est.mean_log_mass, spread, est.std_error * est.std_error))
        })
        .collect::<Result<Vec<(f64, f64, f64, f64)>>>()?;
    let n = images.len() as f64;
    let cont: Vec<f64> = per_image.iter().map(|r| r.0).collect();
    let disc: Vec<f64> = per_image.iter().map(|r| r.1).collect();
    let var: Vec<f64> = per_image.iter().map(|r| r.2 + r.3).collect();
    Ok(JensenCheck {
        continuous_ll: mean(&cont),
        discrete_ll: mean(&disc),
        std_error: sum(&var).sqrt() / n,
        mc_samples,
    })
}

/// Uniform mixture of `N(x_n, epsilon^2 I)` over the training rows: a model
/// that reproduces its training set when sampled and generalizes poorly.
pub fn build_lookup_table_model(train: &SampleMatrix, epsilon: f64) -> Result<GaussianMixture> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid("epsilon", "must be finite and > 0"));
    }
    GaussianMixture::uniform_isotropic(train, epsilon * epsilon)
}

/// `w p(x) + (1 - w) q(x)` for a good model `p` and a bad model `q`.
#[derive(Debug, Clone)]
pub struct MixtureTrickModel<P, Q> {
    good: P,
    bad: Q,
    weight_good: f64,
}

/// Which component produced a draw of [`sample_mixture_trick`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MixtureLabel {
    Good,
    Bad,
}

fn check_weight(w: f64) -> Result<()> {
    if w > 0.0 && w < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("weight_good", format!("must lie in (0, 1), got {w}")))
    }
}

impl<P, Q> MixtureTrickModel<P, Q> {
    /// Mixture with the default good weight of 0.01.
    pub fn new(good: P, bad: Q) -> Self {
        MixtureTrickModel {
            good,
            bad,
            weight_good: DEFAULT_WEIGHT_GOOD,
        }
    }

    pub fn with_weight(good: P, bad: Q, weight_good: f64) -> Result<Self> {
        check_weight(weight_good)?;
        Ok(MixtureTrickModel { good, bad, weight_good })
    }

    pub fn weight_good(&self) -> f64 {
        self.weight_good
    }

    pub fn good(&self) -> &P {
        &self.good
    }

    pub fn bad(&self) -> &Q {
        &self.bad
    }
}

/// `log_sum_exp(ln w + log_p, ln(1-w) + log_q)` from the two component
/// log-densities.
pub fn mixture_trick_log_density(log_p: f64, log_q: f64, weight_good: f64) -> Result<f64> {
    check_weight(weight_good)?;
    let a = weight_good.ln() + log_p;
    let b = (-weight_good).ln_1p() + log_q;
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return Ok(hi);
    }
    Ok(hi + ((a - hi).exp() + (b - hi).exp()).ln())
}

impl<P: LogDensity, Q: LogDensity> LogDensity for MixtureTrickModel<P, Q> {
    fn dim(&self) -> usize {
        self.good.dim()
    }

    fn log_density(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.bad.dim(), self.good.dim())?;
        mixture_trick_log_density(self.good.log_density(x)?, self.bad.log_density(x)?, self.weight_good)
    }
}

/// `n` draws from the mixture together with the component each came from.
/// Only the weight of `model` is used; draws come from `good` and `bad`.
pub fn sample_mixture_trick<P, Q>(
    model: &MixtureTrickModel<P, Q>,
    good: &impl Sampler,
    bad: &impl Sampler,
    n: usize,
    seed: Seed,
) -> Result<(SampleMatrix, Vec<MixtureLabel>)> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one sample"));
    }
    check_dim(good.dim(), bad.dim())?;
    let mut rng = seed.rng();
    let mut out = Vec::with_capacity(n * good.dim());
    let labels = (0..n)
        .map(|_| {
            if rng.random::<f64>() < model.weight_good {
                good.draw_into(1, &mut rng, &mut out);
                MixtureLabel::Good
            } else {
                bad.draw_into(1, &mut rng, &mut out);
                MixtureLabel::Bad
            }
        })
        .collect();
    Ok((SampleMatrix::new(n, good.dim(), out)?, labels))
}

/// Posterior probability that `x` came from the good component:
/// `logistic(log_p - log_q - ln((1-w)/w))`.
pub fn posterior_alpha(log_p: f64, log_q: f64, weight_good: f64) -> Result<f64> {
    check_weight(weight_good)?;
    let prior_odds = (-weight_good).ln_1p() - weight_good.ln();
    Ok(logistic(log_p - log_q - prior_odds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{FnDensity, IsotropicGaussian, UniformBox};
    use crate::images::ImageGeometry;
    use proptest::prelude::*;

    /// `ln(Phi(1) - Phi(0))`, computed with scipy and confirmed with mpmath at 30 digits.
    const LOG_STD_NORMAL_UNIT_CELL: f64 = -1.0748623268620714;

    fn zeros(n: usize, d: usize) -> QuantizedImageSet {
        QuantizedImageSet::new(vec![0; n * d], ImageGeometry::new(1, d, 1).unwrap()).unwrap()
    }

    #[test]
    fn dequantize_range_and_determinism() {
        let imgs = zeros(10, 16);
        let a = dequantize(&imgs, Seed(1), false).unwrap();
        assert!(a.as_slice().iter().all(|v| (0.0..1.0).contains(v)));
        assert_eq!(a.value_range(), Some((0.0, 256.0)));
        let b = dequantize(&imgs, Seed(1), true).unwrap();
        assert!(b.as_slice().iter().all(|v| (0.0..1.0 / 256.0).contains(v)));
        assert_eq!(b.value_range(), Some((0.0, 1.0)));
        assert_eq!(a, dequantize(&imgs, Seed(1), false).unwrap());
        assert_ne!(a, dequantize(&imgs, Seed(2), false).unwrap());

        let top = QuantizedImageSet::new(vec![255; 8], ImageGeometry::new(2, 4, 1).unwrap()).unwrap();
        let t = dequantize(&top, Seed(0), true).unwrap();
        assert!(t.as_slice().iter().all(|v| *v >= 255.0 / 256.0 && *v < 1.0));
    }

    #[test]
    fn dequantization_noise_has_mean_one_half() {
        let imgs = QuantizedImageSet::synthetic(1000, ImageGeometry::new(25, 40, 1).unwrap(), Seed(4)).unwrap();
        let y = dequantize(&imgs, Seed(9), false).unwrap();
        let diffs: Vec<f64> = y.as_slice().iter().zip(imgs.as_bytes()).map(|(a, b)| a - *b as f64).collect();
        assert_eq!(diffs.len(), 1_000_000);
        assert!((mean(&diffs) - 0.5).abs() < 0.002);
    }

    #[test]
    fn rescaled_ll_converts_to_pixel_units() {
        // Uniform on [0,1)^D has log-density 0; in pixel units it is 1/256 per dim.
        let d = 7;
        let pix = rescaled_to_pixel_units(0.0, d);
        assert!((pix - UniformBox::pixels(d).unwrap().log_density(&[3.0; 7]).unwrap()).abs() < 1e-12);
        assert!((nats_to_bits_per_dim(pix, d).unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn bits_per_dim_examples() {
        for d in [1, 3, 3072] {
            let ll = -(d as f64) * 256f64.ln();
            assert!((nats_to_bits_per_dim(ll, d).unwrap() - 8.0).abs() < 1e-12);
        }
        assert_eq!(nats_to_bits_per_dim(0.0, 10).unwrap(), 0.0);
        assert!((nats_to_bits_per_dim(-4.61, 1).unwrap() - 6.651).abs() < 1e-3);
        assert!(nats_to_bits_per_dim(1.0, 0).is_err());
    }

    #[test]
    fn discrete_ll_of_constant_integrands_is_exact() {
        let u = UniformBox::pixels(4).unwrap();
        for m in [1, 2, 17, 1000] {
            let e = discrete_log_likelihood(&u, &[0, 17, 128, 255], m, Seed(m as u64)).unwrap();
            assert!((e.mean_log_mass + 4.0 * 256f64.ln()).abs() < 1e-12);
            assert!((e.mean_log_mass + 22.1807).abs() < 1e-4);
            assert_eq!(e.mc_samples, m);
        }
        let c = FnDensity::new(2, |_: &[f64]| 0.3f64.ln());
        let e = discrete_log_likelihood(&c, &[5, 6], 64, Seed(0)).unwrap();
        assert!((e.mean_log_mass - 0.3f64.ln()).abs() < 1e-12);
        assert!(e.std_error.abs() < 1e-12);
    }

    #[test]
    fn discrete_ll_matches_error_function_oracle() {
        let g = IsotropicGaussian::standard(1).unwrap();
        let e = discrete_log_likelihood(&g, &[0], 1_000_000, Seed(2)).unwrap();
        assert!((e.mean_log_mass - LOG_STD_NORMAL_UNIT_CELL).abs() < 0.005);
        assert!(e.std_error > 0.0 && e.std_error < 0.001);
        let phi = |z: f64| 0.5 * (1.0 + statrs::function::erf::erf(z / std::f64::consts::SQRT_2));
        assert!(((phi(1.0) - phi(0.0)).ln() - LOG_STD_NORMAL_UNIT_CELL).abs() < 1e-9);
    }

    #[test]
    fn discrete_ll_edge_cases() {
        let g = IsotropicGaussian::standard(1).unwrap();
        assert!(discrete_log_likelihood(&g, &[0], 0, Seed(0)).is_err());
        assert!(discrete_log_likelihood(&g, &[0, 0], 5, Seed(0)).is_err());
        let e = discrete_log_likelihood(&g, &[0], 1, Seed(0)).unwrap();
        assert!(e.std_error.is_infinite());
        let outside = UniformBox::new(10.0, 11.0, 1).unwrap();
        let e = discrete_log_likelihood(&outside, &[0], 10, Seed(0)).unwrap();
        assert_eq!(e.mean_log_mass, f64::NEG_INFINITY);
        assert_eq!(e.std_error, f64::INFINITY);
        let a = discrete_log_likelihood(&g, &[1], 50, Seed(3)).unwrap();
        assert_eq!(a, discrete_log_likelihood(&g, &[1], 50, Seed(3)).unwrap());
    }

    #[test]
    fn discrete_ll_stable_in_mc_samples() {
        let g = IsotropicGaussian::new(vec![1.0, 2.0, 0.5], 0.8).unwrap();
        let x = [1, 2, 0];
        let a = discrete_log_likelihood(&g, &x, 20_000, Seed(1)).unwrap();
        let b = discrete_log_likelihood(&g, &x, 80_000, Seed(2)).unwrap();
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.mean_log_mass - b.mean_log_mass).abs() < 3.0 * se);
    }

    #[test]
    fn jensen_on_standard_normal_across_seeds() {
        let g = IsotropicGaussian::standard(1).unwrap();
        let imgs = zeros(1, 1);
        for s in 0..100 {
            let j = jensen_bound_check(&g, &imgs, Seed(s), 2000).unwrap();
            assert!(j.holds_within(3.0), "seed {s}: {j:?}");
            assert!((j.discrete_ll - LOG_STD_NORMAL_UNIT_CELL).abs() < 0.05);
        }
    }

    #[test]
    fn jensen_gap_vanishes_for_cell_constant_model() {
        let u = UniformBox::pixels(3).unwrap();
        let imgs = QuantizedImageSet::synthetic(20, ImageGeometry::new(1, 3, 1).unwrap(), Seed(1)).unwrap();
        let j = jensen_bound_check(&u, &imgs, Seed(5), 16).unwrap();
        assert!(j.gap().abs() < 1e-12);
        assert!(j.std_error < 1e-12);
    }

    #[test]
    fn jensen_gap_is_positive_under_curvature() {
        let sharp = IsotropicGaussian::new(vec![0.5], 0.1).unwrap();
        let imgs = zeros(200, 1);
        let j = jensen_bound_check(&sharp, &imgs, Seed(7), 4000).unwrap();
        assert!(j.holds_within(3.0));
        assert!(j.gap() > 3.0 * j.std_error, "{j:?}");
        // E[ln q] = -ln(0.1 sqrt(2 pi)) - (1/12) / 0.02; ln Q is close to 0.
        let expected = -(0.1 * (2.0 * std::f64::consts::PI).sqrt()).ln() - 1.0 / 12.0 / 0.02;
        assert!((j.continuous_ll - expected).abs() < 4.0 * 3.73 / 200f64.sqrt());
    }

    #[test]
    fn lookup_table_model() {
        let train = SampleMatrix::from_rows(&[[0.0, 0.0], [3.0, 1.0]]).unwrap();
        let eps = 0.05;
        let m = build_lookup_table_model(&train, eps).unwrap();
        assert_eq!(m.components().len(), 2);
        assert!(m.weights().iter().all(|w| *w == 0.5));
        assert!(m.components().iter().all(|c| c.variance.iter().all(|v| (v - eps * eps).abs() < 1e-18)));
        let at = m.log_density(&[0.0, 0.0]).unwrap();
        for p in [[2.0 * eps, 0.0], [1.5, 0.5], [3.0, 1.0 + 2.0 * eps]] {
            assert!(at >= m.log_density(&p).unwrap());
        }
        let one = build_lookup_table_model(&SampleMatrix::from_rows(&[[1.0]]).unwrap(), 0.5).unwrap();
        let g = IsotropicGaussian::new(vec![1.0], 0.5).unwrap();
        assert!((one.log_density(&[0.2]).unwrap() - g.log_density(&[0.2]).unwrap()).abs() < 1e-12);
        assert!(build_lookup_table_model(&train, 0.0).is_err());
    }

    #[test]
    fn mixture_trick_examples() {
        assert!((mixture_trick_log_density(-3.2, -3.2, 0.01).unwrap() + 3.2).abs() < 1e-15);
        let r = mixture_trick_log_density(-5.0, f64::NEG_INFINITY, 0.01).unwrap();
        assert!((r - (-5.0 - 100f64.ln())).abs() < 1e-12);
        assert!((100f64.ln() - 4.6052).abs() < 1e-4);
        assert!(mixture_trick_log_density(0.0, 0.0, 1.0).is_err());

        let p = IsotropicGaussian::standard(2).unwrap();
        let q = UniformBox::new(-1.0, 1.0, 2).unwrap();
        let model = MixtureTrickModel::new(p.clone(), q.clone());
        assert_eq!(model.weight_good(), 0.01);
        let x = [0.2, -0.4];
        let expect = (0.01 * p.log_density(&x).unwrap().exp() + 0.99 * 0.25).ln();
        assert!((model.log_density(&x).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn mixture_trick_sampling() {
        let p = IsotropicGaussian::new(vec![100.0], 1.0).unwrap();
        let q = UniformBox::new(0.0, 1.0, 1).unwrap();
        let all_good = MixtureTrickModel::with_weight((), (), 1.0 - 1e-12).unwrap();
        let (_, labels) = sample_mixture_trick(&all_good, &p, &q, 1000, Seed(1)).unwrap();
        assert!(labels.iter().all(|l| *l == MixtureLabel::Good));

        let model = MixtureTrickModel::new((), ());
        let n = 100_000;
        let (xs, labels) = sample_mixture_trick(&model, &p, &q, n, Seed(2)).unwrap();
        let bad = labels.iter().filter(|l| **l == MixtureLabel::Bad).count() as f64 / n as f64;
        assert!((bad - 0.99).abs() < 0.003);
        for (x, l) in xs.iter_rows().zip(&labels) {
            assert_eq!(x[0] > 50.0, *l == MixtureLabel::Good);
        }
        let again = sample_mixture_trick(&model, &p, &q, n, Seed(2)).unwrap();
        assert_eq!(again.0, xs);
        assert_eq!(again.1, labels);
    }

    #[test]
    fn posterior_alpha_examples() {
        assert!((posterior_alpha(-7.0, -7.0, 0.01).unwrap() - 0.01).abs() < 1e-15);
        assert!((posterior_alpha(99f64.ln(), 0.0, 0.01).unwrap() - 0.5).abs() < 1e-15);
        let a = posterior_alpha(50.0, 0.0, 0.01).unwrap();
        let tail = 99.0 * (-50f64).exp();
        assert!(((1.0 - a) - 0.0).abs() < 1e-15);
        assert!((tail - 1.9e-20).abs() < 0.05e-20);
        assert!(posterior_alpha(0.0, 0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn mixture_trick_bounds(log_p in -500.0f64..50.0, delta in 0.0f64..400.0, w in 0.001f64..0.999) {
            let log_q = log_p - delta;
            let r = mixture_trick_log_density(log_p, log_q, w).unwrap();
            prop_assert!(r - log_p <= 1e-12);
            prop_assert!(r - log_p >= w.ln() - 1e-12);
        }

        #[test]
        fn posterior_alpha_monotone_and_complementary(
            lp in -100.0f64..100.0, lq in -100.0f64..100.0, w in 0.001f64..0.999, step in 0.01f64..5.0,
        ) {
            let a = posterior_alpha(lp, lq, w).unwrap();
            prop_assert!(posterior_alpha(lp + step, lq, w).unwrap() >= a);
            prop_assert!(posterior_alpha(lp, lq + step, w).unwrap() <= a);
            let b = posterior_alpha(lq, lp, 1.0 - w).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
            if a > 1e-12 && a < 1.0 - 1e-12 {
                prop_assert!(posterior_alpha(lp + step, lq, w).unwrap() > a);
            }
        }
    }
}
