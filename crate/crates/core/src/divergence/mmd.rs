use rayon::prelude::*;
use rand_distr::{Distribution, StandardNormal};

use super::{descend, theta_of, FitConfig, FitOutcome, KernelBank};
use crate::density::IsotropicGaussian;
use crate::error::{check_dim, Result};
use crate::matrix::SampleMatrix;
use crate::numeric::{squared_distance, sum};

fn mean_kernel(a: &SampleMatrix, b: &SampleMatrix, kernels: &KernelBank) -> f64 {
    let per_row: Vec<f64> = a
        .as_slice()
        .par_chunks_exact(a.cols())
        .map(|x| {
            let vals: Vec<f64> = b
                .iter_rows()
                .map(|y| kernels.eval_sq(squared_distance(x, y)))
                .collect();
            sum(&vals)
        })
        .collect();
    sum(&per_row) / (a.rows() * b.rows()) as f64
}

/// Biased (V-statistic) estimate of squared MMD.
///
/// Averages run over all pairs, self-pairs included, which makes the value
/// the squared RKHS distance between the two empirical mean embeddings and
/// therefore nonnegative up to rounding.
pub fn mmd_squared(samples_p: &SampleMatrix, samples_q: &SampleMatrix, kernels: &KernelBank) -> Result<f64> {
    check_dim(samples_p.cols(), samples_q.cols())?;
    let kxx = mean_kernel(samples_p, samples_p, kernels);
    let kyy = mean_kernel(samples_q, samples_q, kernels);
    let kxy = mean_kernel(samples_p, samples_q, kernels);
    Ok(kxx - 2.0 * kxy + kyy)
}

/// Squared MMD between fixed target samples and the reparameterized model
/// samples `mean + sigma * z`, as a function of `theta = (mean, ln sigma)`.
pub struct MmdObjective {
    target: SampleMatrix,
    noise: SampleMatrix,
    kernels: KernelBank,
    kxx: f64,
    noise_sq_dist: Vec<f64>,
}

impl MmdObjective {
    pub fn new(target: SampleMatrix, kernels: KernelBank, model_samples: usize, seed: crate::Seed) -> Result<Self> {
        let d = target.cols();
        let mut rng = seed.rng();
        let z: Vec<f64> = (0..model_samples * d)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let noise = SampleMatrix::new(model_samples, d, z)?;
        let m = noise.rows();
        let noise_sq_dist = (0..m * m)
            .map(|k| squared_distance(noise.row(k / m), noise.row(k % m)))
            .collect();
        let kxx = mean_kernel(&target, &target, &kernels);
        Ok(MmdObjective {
            target,
            noise,
            kernels,
            kxx,
            noise_sq_dist,
        })
    }

    pub fn noise(&self) -> &SampleMatrix {
        &self.noise
    }

    /// Objective and analytic gradient with respect to `(mean, ln sigma)`.
    pub fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let d = self.target.cols();
        check_dim(d + 1, theta.len())?;
        let (mu, s) = (&theta[..d], theta[d].exp());
        let m = self.noise.rows();
        let n = self.target.rows();
        let inv_bw2: Vec<f64> = self.kernels.bandwidths().iter().map(|b| 1.0 / (b * b)).collect();

        // Cross term: per model sample j, sum over target rows.
        let cross: Vec<(f64, Vec<f64>)> = (0..m)
            .into_par_iter()
            .map(|j| {
                let z = self.noise.row(j);
                let y: Vec<f64> = mu.iter().zip(z).map(|(a, b)| a + s * b).collect();
                let mut k_sum = Vec::with_capacity(n);
                let mut grad = vec![0.0; d + 1];
                for x in self.target.iter_rows() {
                    let r2 = squared_distance(x, &y);
                    let mut k = 0.0;
                    let mut c = 0.0;
                    for w in &inv_bw2 {
                        let e = (-0.5 * r2 * w).exp();
                        k += e;
                        c += e * w;
                    }
                    k_sum.push(k);
                    let mut dot = 0.0;
                    for t in 0..d {
                        let diff = x[t] - y[t];
                        grad[t] += c * diff;
                        dot += diff * s * z[t];
                    }
                    grad[d] += c * dot;
                }
                (sum(&k_sum), grad)
            })
            .collect();

        // Model-model term: depends on sigma only.
        let model: Vec<(f64, f64)> = (0..m)
            .into_par_iter()
            .map(|j| {
                let mut ks = Vec::with_capacity(m);
                let mut gs = Vec::with_capacity(m);
                for l in 0..m {
                    let r2 = s * s * self.noise_sq_dist[j * m + l];
                    let mut k = 0.0;
                    let mut g = 0.0;
                    for w in &inv_bw2 {
                        let e = (-0.5 * r2 * w).exp();
                        k += e;
                        g -= e * r2 * w;
                    }
                    ks.push(k);
                    gs.push(g);
                }
                (sum(&ks), sum(&gs))
            })
            .collect();

        let nm = (n * m) as f64;
        let mm = (m * m) as f64;
        let kxy = sum(&cross.iter().map(|c| c.0).collect::<Vec<_>>()) / nm;
        let kyy = sum(&model.iter().map(|c| c.0).collect::<Vec<_>>()) / mm;
        let mut grad = vec![0.0; d + 1];
        for (t, g) in grad.iter_mut().enumerate() {
            let parts: Vec<f64> = cross.iter().map(|c| c.1[t]).collect();
            *g = -2.0 * sum(&parts) / nm;
        }
        grad[d] += sum(&model.iter().map(|c| c.1).collect::<Vec<_>>()) / mm;
        Ok((self.kxx - 2.0 * kxy + kyy, grad))
    }
}

/// Fit an isotropic Gaussian to `target_samples` by gradient descent on the
/// squared MMD. The noise bank is drawn from `config.seed`; without an
/// explicit `config.init` the fit starts from the maximum-likelihood Gaussian
/// of the target samples.
pub fn fit_mmd(target_samples: &SampleMatrix, kernels: &KernelBank, config: &FitConfig) -> Result<FitOutcome> {
    config.validate()?;
    let init = match &config.init {
        Some(g) => {
            check_dim(target_samples.cols(), g.dim())?;
            g.clone()
        }
        None => IsotropicGaussian::fit(target_samples)?,
    };
    let objective = MmdObjective::new(
        target_samples.clone(),
        kernels.clone(),
        config.model_samples,
        config.seed,
    )?;
    descend(theta_of(&init), config, |t| objective.value_and_gradient(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Sampler;
    use crate::rng::Seed;
    use proptest::prelude::*;
    use rand::Rng;

    /// Direct double sums, written independently of `mean_kernel`.
    fn mmd_oracle(p: &[Vec<f64>], q: &[Vec<f64>], bw: &[f64]) -> f64 {
        let k = |a: &[f64], b: &[f64]| -> f64 {
            let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
            bw.iter().map(|s| (-r2 / (2.0 * s * s)).exp()).sum()
        };
        let mut xx = 0.0;
        for a in p {
            for b in p {
                xx += k(a, b);
            }
        }
        let mut yy = 0.0;
        for a in q {
            for b in q {
                yy += k(a, b);
            }
        }
        let mut xy = 0.0;
        for a in p {
            for b in q {
                xy += k(a, b);
            }
        }
        let (n, m) = (p.len() as f64, q.len() as f64);
        xx / (n * n) - 2.0 * xy / (n * m) + yy / (m * m)
    }

    #[test]
    fn mmd_examples() {
        let bank = KernelBank::new(vec![1.0]).unwrap();
        let p = SampleMatrix::column(&[0.0]).unwrap();
        let q = SampleMatrix::column(&[1.0]).unwrap();
        let expect = 2.0 - 2.0 * (-0.5f64).exp();
        assert!((mmd_squared(&p, &q, &bank).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.786_939).abs() < 1e-6);
        assert!(mmd_squared(&p, &SampleMatrix::from_rows(&[[0.0, 1.0]]).unwrap(), &bank).is_err());

        let s = IsotropicGaussian::standard(3).unwrap().sample(40, Seed(1)).unwrap();
        assert!(mmd_squared(&s, &s, &bank).unwrap().abs() < 1e-12);
    }

    #[test]
    fn mmd_matches_double_sum_oracle() {
        let mut rng = Seed(77).rng();
        let bw = vec![0.3, 1.0, 2.5];
        let bank = KernelBank::new(bw.clone()).unwrap();
        for _ in 0..10 {
            let p: Vec<Vec<f64>> = (0..5).map(|_| (0..2).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
            let q: Vec<Vec<f64>> = (0..5).map(|_| (0..2).map(|_| rng.random_range(-1.0..3.0)).collect()).collect();
            let got = mmd_squared(&SampleMatrix::from_rows(&p).unwrap(), &SampleMatrix::from_rows(&q).unwrap(), &bank).unwrap();
            assert!((got - mmd_oracle(&p, &q, &bw)).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let target = IsotropicGaussian::new(vec![0.5, -1.0], 1.2).unwrap().sample(60, Seed(3)).unwrap();
        let bank = KernelBank::new(vec![0.5, 1.0, 2.0]).unwrap();
        let obj = MmdObjective::new(target, bank, 50, Seed(4)).unwrap();
        let mut rng = Seed(5).rng();
        for _ in 0..20 {
            let theta = vec![
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-1.0..1.0),
            ];
            let (_, g) = obj.value_and_gradient(&theta).unwrap();
            for i in 0..3 {
                let h = 1e-5;
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                tp[i] += h;
                tm[i] -= h;
                let fd = (obj.value_and_gradient(&tp).unwrap().0 - obj.value_and_gradient(&tm).unwrap().0) / (2.0 * h);
                let scale = g[i].abs().max(fd.abs()).max(1e-3);
                assert!((g[i] - fd).abs() / scale < 1e-5, "param {i}: analytic {} fd {}", g[i], fd);
            }
        }
    }

    #[test]
    fn fit_from_own_distribution_barely_moves() {
        let init = IsotropicGaussian::new(vec![3.0, -2.0], 1.2).unwrap();
        let target = init.sample(1000, Seed(8)).unwrap();
        let bank = KernelBank::median_heuristic(&target, &super::super::DEFAULT_BANDWIDTH_MULTIPLIERS).unwrap();
        let config = FitConfig {
            init: Some(init.clone()),
            model_samples: 1000,
            max_iters: 100,
            ..FitConfig::default()
        };
        let fit = fit_mmd(&target, &bank, &config).unwrap();
        for (a, b) in fit.model.mean().iter().zip(init.mean()) {
            assert!((a - b).abs() <= 0.1 * b.abs());
        }
        assert!((fit.model.sigma() - 1.2).abs() <= 0.12);
        assert!(fit.objective <= fit.trace[0].objective);
    }

    #[test]
    fn iteration_contract() {
        let target = IsotropicGaussian::standard(1).unwrap().sample(20, Seed(1)).unwrap();
        let bank = KernelBank::new(vec![1.0]).unwrap();
        let zero = FitConfig {
            max_iters: 0,
            model_samples: 20,
            ..FitConfig::default()
        };
        assert!(fit_mmd(&target, &bank, &zero).is_err());
        let one = FitConfig {
            max_iters: 1,
            tolerance: 1e-300,
            model_samples: 20,
            ..FitConfig::default()
        };
        let fit = fit_mmd(&target, &bank, &one).unwrap();
        assert_eq!(fit.iterations, 1);
        assert_eq!(fit.trace.len(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn symmetric_nonnegative_and_permutation_invariant(
            p in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 1..8),
            q in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 1..8),
            rot in 0usize..8,
        ) {
            let bank = KernelBank::new(vec![0.5, 2.0]).unwrap();
            let pm = SampleMatrix::from_rows(&p).unwrap();
            let qm = SampleMatrix::from_rows(&q).unwrap();
            let a = mmd_squared(&pm, &qm, &bank).unwrap();
            let b = mmd_squared(&qm, &pm, &bank).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a > -1e-12);
            let mut p2 = p.clone();
            p2.rotate_left(rot % p.len());
            let mut q2 = q.clone();
            q2.reverse();
            let c = mmd_squared(&SampleMatrix::from_rows(&p2).unwrap(), &SampleMatrix::from_rows(&q2).unwrap(), &bank).unwrap();
            prop_assert!((a - c).abs() < 1e-12);
        }
    }
}
