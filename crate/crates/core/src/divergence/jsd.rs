use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::LN_2;

use super::{descend, fit_kld, theta_of, FitConfig, FitOutcome};
use crate::density::{GaussianMixture, IsotropicGaussian, LogDensity};
use crate::error::{check_dim, Error, Result};
use crate::numeric::sum;
use crate::rng::Seed;

/// Upper bound on the number of tensor-grid nodes.
pub const MAX_GRID_POINTS: usize = 1 << 20;
/// Highest dimensionality accepted by [`QuadratureGrid`].
pub const MAX_GRID_DIM: usize = 3;

const NORMALIZATION_TOLERANCE: f64 = 1e-3;
const DENSITY_FLOOR: f64 = 1e-300;
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureAxis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl QuadratureAxis {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("grid", format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        if points < 2 {
            return Err(Error::invalid("grid", "each axis needs at least 2 points"));
        }
        Ok(QuadratureAxis { lo, hi, points })
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }

    fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.points {
            0.5 * h
        } else {
            h
        }
    }
}

/// Regular tensor grid with trapezoid weights.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<QuadratureAxis>", into = "Vec<QuadratureAxis>")]
pub struct QuadratureGrid {
    axes: Vec<QuadratureAxis>,
}

impl TryFrom<Vec<QuadratureAxis>> for QuadratureGrid {
    type Error = Error;
    fn try_from(axes: Vec<QuadratureAxis>) -> Result<Self> {
        QuadratureGrid::new(axes)
    }
}

impl From<QuadratureGrid> for Vec<QuadratureAxis> {
    fn from(g: QuadratureGrid) -> Self {
        g.axes
    }
}

impl QuadratureGrid {
    pub fn new(axes: Vec<QuadratureAxis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_GRID_DIM {
            return Err(Error::invalid(
                "grid",
                format!("quadrature supports 1 to {MAX_GRID_DIM} dimensions, got {}", axes.len()),
            ));
        }
        for a in &axes {
            QuadratureAxis::new(a.lo, a.hi, a.points)?;
        }
        let total = axes
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.points))
            .filter(|t| *t <= MAX_GRID_POINTS);
        if total.is_none() {
            return Err(Error::invalid("grid", format!("more than {MAX_GRID_POINTS} nodes")));
        }
        Ok(QuadratureGrid { axes })
    }

    /// Grid spanning each target component and the optional model out to
    /// eight standard deviations of the target's marginal spread (or the
    /// model's sigma, whichever is larger) on every axis.
    pub fn covering(target: &GaussianMixture, model: Option<&IsotropicGaussian>, points_per_axis: usize) -> Result<Self> {
        let d = target.dim();
        if let Some(m) = model {
            check_dim(d, m.dim())?;
        }
        let spread = target.marginal_variances();
        let mut axes = Vec::with_capacity(d);
        for (t, var) in spread.iter().enumerate() {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut sd = var.sqrt();
            if let Some(m) = model {
                sd = sd.max(m.sigma());
            }
            for c in target.components() {
                lo = lo.min(c.mean[t]);
                hi = hi.max(c.mean[t]);
            }
            if let Some(m) = model {
                lo = lo.min(m.mean()[t]);
                hi = hi.max(m.mean()[t]);
            }
            axes.push(QuadratureAxis::new(lo - 8.0 * sd, hi + 8.0 * sd, points_per_axis)?);
        }
        Self::new(axes)
    }

    pub fn axes(&self) -> &[QuadratureAxis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node coordinates (row-major, last axis fastest) and trapezoid weights.
    fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let n = self.len();
        let mut coords = Vec::with_capacity(n * d);
        let mut weights = Vec::with_capacity(n);
        let mut idx = vec![0usize; d];
        for _ in 0..n {
            let mut w = 1.0;
            for (a, &i) in self.axes.iter().zip(&idx) {
                coords.push(a.node(i));
                w *= a.weight(i);
            }
            weights.push(w);
            for t in (0..d).rev() {
                idx[t] += 1;
                if idx[t] < self.axes[t].points {
                    break;
                }
                idx[t] = 0;
            }
        }
        (coords, weights)
    }
}

/// Target log-density tabulated on a grid, reused across model evaluations.
struct TabulatedTarget {
    coords: Vec<f64>,
    weights: Vec<f64>,
    log_p: Vec<f64>,
    dim: usize,
}

impl TabulatedTarget {
    fn new(p: &(impl LogDensity + ?Sized), grid: &QuadratureGrid) -> Result<Self> {
        check_dim(grid.dim(), p.dim())?;
        let (coords, weights) = grid.nodes();
        let dim = grid.dim();
        let log_p = coords
            .par_chunks_exact(dim)
            .map(|x| p.log_density(x))
            .collect::<Result<Vec<f64>>>()?;
        let z = chunked_sum(&weights, |i| log_p[i].exp());
        check_normalization("p", z)?;
        Ok(TabulatedTarget {
            coords,
            weights,
            log_p,
            dim,
        })
    }

    fn jsd_with(&self, q: &IsotropicGaussian) -> Result<f64> {
        check_dim(self.dim, q.dim())?;
        let d = self.dim;
        let log_q: Vec<f64> = self
            .coords
            .par_chunks_exact(d)
            .map(|x| q.log_density(x))
            .collect::<Result<Vec<f64>>>()?;
        check_normalization("q", chunked_sum(&self.weights, |i| log_q[i].exp()))?;
        let total = chunked_sum(&self.weights, |i| {
            let (lp, lq) = (self.log_p[i], log_q[i]);
            let hi = lp.max(lq);
            let log_m = hi + (0.5 * ((lp - hi).exp() + (lq - hi).exp())).ln();
            let mut v = 0.0;
            let (p, q) = (lp.exp(), lq.exp());
            if p >= DENSITY_FLOOR {
                v += p * (lp - log_m);
            }
            if q >= DENSITY_FLOOR {
                v += q * (lq - log_m);
            }
            v
        });
        Ok((0.5 * total).clamp(0.0, LN_2))
    }

    fn kld_with(&self, q: &IsotropicGaussian) -> Result<f64> {
        check_dim(self.dim, q.dim())?;
        let d = self.dim;
        let log_q: Vec<f64> = self
            .coords
            .par_chunks_exact(d)
            .map(|x| q.log_density(x))
            .collect::<Result<Vec<f64>>>()?;
        check_normalization("q", chunked_sum(&self.weights, |i| log_q[i].exp()))?;
        let total = chunked_sum(&self.weights, |i| {
            let p = self.log_p[i].exp();
            if p >= DENSITY_FLOOR {
                p * (self.log_p[i] - log_q[i])
            } else {
                0.0
            }
        });
        Ok(total.max(0.0))
    }
}

/// `sum_i weights[i] * f(i)`, reduced over fixed-size chunks in index order.
fn chunked_sum(weights: &[f64], f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = (0..weights.len().div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(weights.len());
            let terms: Vec<f64> = (lo..hi).map(|i| weights[i] * f(i)).collect();
            sum(&terms)
        })
        .collect();
    sum(&partial)
}

fn check_normalization(which: &str, z: f64) -> Result<()> {
    if (z - 1.0).abs() > NORMALIZATION_TOLERANCE || !z.is_finite() {
        return Err(Error::InsufficientQuadrature(format!(
            "density {which} integrates to {z:.6} on the grid"
        )));
    }
    Ok(())
}

/// Jensen-Shannon divergence by tensor-grid trapezoid quadrature, in nats.
///
/// Fails with [`Error::InsufficientQuadrature`] when either density does not
/// integrate to one within 1e-3 on the grid.
pub fn jsd(p: &(impl LogDensity + ?Sized), q: &IsotropicGaussian, grid: &QuadratureGrid) -> Result<f64> {
    TabulatedTarget::new(p, grid)?.jsd_with(q)
}

/// `KLD[p || q]` by the same quadrature and checks as [`jsd`].
pub fn kld(p: &(impl LogDensity + ?Sized), q: &IsotropicGaussian, grid: &QuadratureGrid) -> Result<f64> {
    TabulatedTarget::new(p, grid)?.kld_with(q)
}

fn jsd_descent(table: &TabulatedTarget, init: &IsotropicGaussian, config: &FitConfig) -> Result<FitOutcome> {
    let d = table.dim;
    let eval_at = |theta: &[f64]| -> Result<f64> { table.jsd_with(&super::model_of(theta)?) };
    descend(theta_of(init), config, |theta| {
        let f = eval_at(theta)?;
        let mut grad = Vec::with_capacity(d + 1);
        let mut probe = theta.to_vec();
        for i in 0..=d {
            let h = 1e-4 * theta[i].abs().max(1.0);
            probe[i] = theta[i] + h;
            let up = eval_at(&probe)?;
            probe[i] = theta[i] - h;
            let down = eval_at(&probe)?;
            probe[i] = theta[i];
            grad.push((up - down) / (2.0 * h));
        }
        Ok((f, grad))
    })
}

/// Fit an isotropic Gaussian to `target` by gradient descent on the
/// quadrature JSD with central finite-difference gradients. Without an
/// explicit `config.init` the fit starts from [`fit_kld`].
pub fn fit_jsd(target: &GaussianMixture, grid: &QuadratureGrid, config: &FitConfig) -> Result<FitOutcome> {
    config.validate()?;
    let init = match &config.init {
        Some(g) => {
            check_dim(target.dim(), g.dim())?;
            g.clone()
        }
        None => fit_kld(target),
    };
    let table = TabulatedTarget::new(target, grid)?;
    jsd_descent(&table, &init, config)
}

/// Runs [`fit_jsd`] from `restarts` random starting points. Means are drawn
/// uniformly within two marginal standard deviations of the target mean,
/// and sigma log-uniformly between half and twice the KLD-fit sigma.
/// `config.init` is ignored.
pub fn fit_jsd_restarts(
    target: &GaussianMixture,
    grid: &QuadratureGrid,
    config: &FitConfig,
    restarts: usize,
    seed: Seed,
) -> Result<Vec<FitOutcome>> {
    config.validate()?;
    let table = TabulatedTarget::new(target, grid)?;
    let center = fit_kld(target);
    let sd: Vec<f64> = target.marginal_variances().iter().map(|v| v.sqrt()).collect();
    let mut rng = seed.rng();
    let inits: Vec<IsotropicGaussian> = (0..restarts)
        .map(|_| {
            let mean = center
                .mean()
                .iter()
                .zip(&sd)
                .map(|(m, s)| m + rng.random_range(-2.0..2.0) * s)
                .collect();
            let sigma = center.sigma() * 2f64.powf(rng.random_range(-1.0..1.0));
            IsotropicGaussian::new(mean, sigma)
        })
        .collect::<Result<_>>()?;
    inits.iter().map(|init| jsd_descent(&table, init, config)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::GaussianComponent;
    use proptest::prelude::*;

    fn line(lo: f64, hi: f64, n: usize) -> QuadratureGrid {
        QuadratureGrid::new(vec![QuadratureAxis::new(lo, hi, n).unwrap()]).unwrap()
    }

    fn square(lo: f64, hi: f64, n: usize) -> QuadratureGrid {
        let a = QuadratureAxis::new(lo, hi, n).unwrap();
        QuadratureGrid::new(vec![a, a]).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(QuadratureAxis::new(1.0, 1.0, 10).is_err());
        assert!(QuadratureAxis::new(0.0, 1.0, 1).is_err());
        let a = QuadratureAxis::new(0.0, 1.0, 2).unwrap();
        assert!(QuadratureGrid::new(vec![a; 4]).is_err());
        assert!(QuadratureGrid::new(vec![]).is_err());
        let big = QuadratureAxis::new(0.0, 1.0, 2000).unwrap();
        assert!(QuadratureGrid::new(vec![big, big]).is_err());
        let g = line(0.0, 1.0, 5);
        let (x, w) = g.nodes();
        assert_eq!(x, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!((sum(&w) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_round_trips_through_toml() {
        #[derive(serde::Serialize, serde::Deserialize)]
        struct Wrap {
            grid: QuadratureGrid,
        }
        let w = Wrap { grid: square(-3.0, 3.0, 11) };
        let text = toml::to_string(&w).unwrap();
        let back: Wrap = toml::from_str(&text).unwrap();
        assert_eq!(back.grid, w.grid);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn jsd_examples() {
        let p = IsotropicGaussian::new(vec![0.3, -0.2], 1.1).unwrap();
        let g = square(-10.0, 10.0, 201);
        assert!(jsd(&p, &p, &g).unwrap().abs() < 1e-6);

        let a = IsotropicGaussian::new(vec![0.0], 1.0).unwrap();
        let b = IsotropicGaussian::new(vec![40.0], 1.0).unwrap();
        let g = line(-8.0, 48.0, 561);
        assert!((jsd(&a, &b, &g).unwrap() - LN_2).abs() < 1e-6);
        assert!((LN_2 - 0.693_147).abs() < 1e-6);
    }

    #[test]
    fn kld_between_gaussians_matches_closed_form() {
        let p = IsotropicGaussian::new(vec![0.0, 1.0], 1.0).unwrap();
        let q = IsotropicGaussian::new(vec![0.5, 0.0], 1.5).unwrap();
        let g = square(-12.0, 12.0, 241);
        // D ln(sq/sp) + (D sp^2 + |mp - mq|^2) / (2 sq^2) - D/2
        let exact = 2.0 * 1.5f64.ln() + (2.0 + 1.25) / (2.0 * 2.25) - 1.0;
        assert!((kld(&p, &q, &g).unwrap() - exact).abs() < 1e-9);
        assert!(kld(&p, &p, &g).unwrap().abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_is_reported() {
        let narrow = IsotropicGaussian::new(vec![0.0], 0.05).unwrap();
        let wide = IsotropicGaussian::new(vec![0.0], 1.0).unwrap();
        let g = line(-8.0, 8.0, 11);
        assert!(matches!(jsd(&wide, &narrow, &g), Err(Error::InsufficientQuadrature(_))));
        let short = line(-1.0, 1.0, 101);
        assert!(matches!(jsd(&wide, &wide, &short), Err(Error::InsufficientQuadrature(_))));
    }

    #[test]
    fn realizable_target_is_recovered() {
        let truth = IsotropicGaussian::new(vec![0.5, -0.3], 1.3).unwrap();
        let target = GaussianMixture::from(&truth);
        let start = IsotropicGaussian::new(vec![0.0, 0.0], 1.0).unwrap();
        let grid = QuadratureGrid::covering(&target, Some(&start), 121).unwrap();
        let config = FitConfig {
            init: Some(start),
            max_iters: 2000,
            step_size: 1.5,
            tolerance: 1e-8,
            ..FitConfig::default()
        };
        let fit = fit_jsd(&target, &grid, &config).unwrap();
        assert!(fit.converged);
        for (a, b) in fit.model.mean().iter().zip(truth.mean()) {
            assert!((a - b).abs() <= 1e-3 * b.abs(), "{a} vs {b}");
        }
        assert!((fit.model.sigma() - 1.3).abs() <= 1e-3 * 1.3);
    }

    #[test]
    fn restarts_agree_on_single_basin() {
        let target = GaussianMixture::new(
            vec![0.7, 0.3],
            vec![
                GaussianComponent::isotropic(vec![0.0, 0.0], 1.0).unwrap(),
                GaussianComponent::isotropic(vec![1.0, 0.5], 1.5).unwrap(),
            ],
        )
        .unwrap();
        let grid = QuadratureGrid::covering(&target, None, 81).unwrap();
        let config = FitConfig {
            max_iters: 3000,
            step_size: 1.5,
            tolerance: 1e-7,
            ..FitConfig::default()
        };
        let fits = fit_jsd_restarts(&target, &grid, &config, 10, Seed(11)).unwrap();
        assert_eq!(fits.len(), 10);
        let best = fits.iter().map(|f| f.objective).fold(f64::INFINITY, f64::min);
        for f in &fits {
            assert!(f.objective - best < 1e-3);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn bounded_and_symmetric(
            m1 in -3.0f64..3.0, s1 in 0.5f64..2.0,
            m2 in -3.0f64..3.0, s2 in 0.5f64..2.0,
        ) {
            let p = IsotropicGaussian::new(vec![m1], s1).unwrap();
            let q = IsotropicGaussian::new(vec![m2], s2).unwrap();
            let g = line(-20.0, 20.0, 801);
            let a = jsd(&p, &q, &g).unwrap();
            let b = jsd(&q, &p, &g).unwrap();
            prop_assert!((0.0..=LN_2).contains(&a));
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
