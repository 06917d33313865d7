//! Config-driven runs of every experiment, writing CSV tables and a
//! manifest.
//!
//! Each experiment is also exposed as a plain function returning typed
//! results, so tests and examples can run the same protocol without going
//! through files. All randomness derives from the config seed with a fixed
//! tag per stage, and every CSV is independent of the thread count.

mod config;
mod output;

pub use config::{
    two_mode_target, DatasetFormat, DatasetSpec, DequantizeLlConfig, DescentSettings, Experiment, ExperimentConfig,
    FitDivergenceConfig, MixtureDemoConfig, NnShiftConfig, ParzenBenchmarkConfig, ParzenSweepConfig, PatchGaussian,
};
pub use output::{fmt_real, Manifest, OutputRecord, RunOutputs, Table};

use std::path::Path;
use std::time::Instant;

use rand::seq::index::sample as sample_indices;

use crate::datasets::{extract_patches, sha256_file, ChannelMode, PatchSpec};
use crate::density::{FnDensity, GaussianMixture, IsotropicGaussian, LogDensity, Sampler, UniformBox};
use crate::divergence::{
    fit_jsd, fit_jsd_restarts, fit_kld, fit_mmd, jsd, kld, FitConfig, FitOutcome, KernelBank, QuadratureGrid,
};
use crate::error::{Error, Result};
use crate::images::QuantizedImageSet;
use crate::likelihood::{
    dequantize, jensen_bound_check, mixture_trick_log_density, nats_to_bits_per_dim, posterior_alpha,
    sample_mixture_trick, JensenCheck, MixtureLabel, MixtureTrickModel,
};
use crate::nn::{shift_precision_curve, PrecisionPoint};
use crate::parzen::{
    bandwidth_grid, data_scale, kmeans, parzen_benchmark, parzen_convergence_sweep, sample_centroids, BenchmarkRow,
    SweepResult,
};
use crate::rng::Seed;
use output::{n, r, write_file};

const TAG_TARGET: u64 = 1;
const TAG_NOISE: u64 = 2;
const TAG_RESTARTS: u64 = 3;
const TAG_TEST: u64 = 4;
const TAG_SWEEP: u64 = 5;
const TAG_SPLIT: u64 = 6;
const TAG_KMEANS: u64 = 7;
const TAG_GENERATE: u64 = 8;
const TAG_QUERIES: u64 = 9;
const TAG_DATA: u64 = 10;
const TAG_TRAIN_PATCHES: u64 = 11;
const TAG_TEST_PATCHES: u64 = 12;
const TAG_DEQUANTIZE: u64 = 13;
const TAG_MC: u64 = 14;
const TAG_MIXTURE: u64 = 15;

fn descent(s: &DescentSettings, init: &IsotropicGaussian, seed: Seed, model_samples: usize) -> FitConfig {
    FitConfig {
        max_iters: s.max_iters,
        step_size: s.step_size,
        tolerance: s.tolerance,
        init: Some(init.clone()),
        seed,
        model_samples,
    }
}

#[derive(Debug, Clone)]
pub struct FitDivergenceReport {
    pub target: GaussianMixture,
    pub kernels: KernelBank,
    pub grid: QuadratureGrid,
    pub kld: IsotropicGaussian,
    pub mmd: FitOutcome,
    pub jsd: FitOutcome,
    pub jsd_restarts: Vec<FitOutcome>,
}

/// KLD, MMD and JSD fits of an isotropic Gaussian to the configured target.
/// Both iterative fits start from the KLD solution.
pub fn fit_divergence(cfg: &FitDivergenceConfig, seed: Seed) -> Result<FitDivergenceReport> {
    let target = cfg.target.to_mixture()?;
    let kld_fit = fit_kld(&target);
    let samples = target.sample(cfg.target_samples, seed.derive(TAG_TARGET))?;
    let kernels = match &cfg.kernel_bandwidths {
        Some(b) => KernelBank::new(b.clone())?,
        None => KernelBank::median_heuristic(&samples, &cfg.kernel_multipliers)?,
    };
    let mmd = fit_mmd(&samples, &kernels, &descent(&cfg.mmd, &kld_fit, seed.derive(TAG_NOISE), cfg.model_samples))?;
    let grid = QuadratureGrid::covering(&target, Some(&kld_fit), cfg.grid_points)?;
    let jsd_config = descent(&cfg.jsd, &kld_fit, seed, cfg.model_samples);
    let jsd_fit = fit_jsd(&target, &grid, &jsd_config)?;
    let jsd_restarts = if cfg.jsd_restarts > 0 {
        fit_jsd_restarts(&target, &grid, &jsd_config, cfg.jsd_restarts, seed.derive(TAG_RESTARTS))?
    } else {
        Vec::new()
    };
    Ok(FitDivergenceReport {
        target,
        kernels,
        grid,
        kld: kld_fit,
        mmd,
        jsd: jsd_fit,
        jsd_restarts,
    })
}

fn fit_divergence_tables(cfg: &FitDivergenceConfig, seed: Seed) -> Result<Vec<Table>> {
    let rep = fit_divergence(cfg, seed)?;
    let d = rep.target.dim();
    let mean_cols: Vec<String> = (1..=d).map(|i| format!("mean_{i}")).collect();
    let with_means = |pre: &[&str], post: &[&str]| -> Vec<String> {
        pre.iter()
            .map(|s| s.to_string())
            .chain(mean_cols.iter().cloned())
            .chain(post.iter().map(|s| s.to_string()))
            .collect()
    };
    let mut fits = Table::with_header(
        "fits",
        with_means(&["method"], &["sigma", "objective", "iterations", "converged", "kld_nats", "jsd_nats"]),
    );
    let mut add = |method: &str, model: &IsotropicGaussian, objective: f64, iterations: usize, converged: bool| -> Result<()> {
        let mut row = vec![method.to_string()];
        row.extend(model.mean().iter().map(|v| r(*v)));
        row.extend([
            r(model.sigma()),
            r(objective),
            n(iterations),
            converged.to_string(),
            r(kld(&rep.target, model, &rep.grid)?),
            r(jsd(&rep.target, model, &rep.grid)?),
        ]);
        fits.push(row);
        Ok(())
    };
    add("kld", &rep.kld, kld(&rep.target, &rep.kld, &rep.grid)?, 0, true)?;
    add("mmd", &rep.mmd.model, rep.mmd.objective, rep.mmd.iterations, rep.mmd.converged)?;
    add("jsd", &rep.jsd.model, rep.jsd.objective, rep.jsd.iterations, rep.jsd.converged)?;

    let mut trace = Table::with_header("trace", with_means(&["method", "iter", "objective"], &["sigma"]));
    for (method, fit) in [("mmd", &rep.mmd), ("jsd", &rep.jsd)] {
        for t in &fit.trace {
            let mut row = vec![method.to_string(), n(t.iter), r(t.objective)];
            row.extend(t.mean.iter().map(|v| r(*v)));
            row.push(r(t.sigma));
            trace.push(row);
        }
    }
    let mut tables = vec![fits, trace];
    if !rep.jsd_restarts.is_empty() {
        let mut t = Table::with_header(
            "jsd_restarts",
            with_means(&["restart"], &["sigma", "objective", "iterations", "converged"]),
        );
        for (i, f) in rep.jsd_restarts.iter().enumerate() {
            let mut row = vec![n(i)];
            row.extend(f.model.mean().iter().map(|v| r(*v)));
            row.extend([r(f.model.sigma()), r(f.objective), n(f.iterations), f.converged.to_string()]);
            t.push(row);
        }
        tables.push(t);
    }
    Ok(tables)
}

/// Parzen estimates of the configured Gaussian's test log-likelihood at
/// each sample count, against the true value.
pub fn parzen_sweep(cfg: &ParzenSweepConfig, seed: Seed) -> Result<SweepResult> {
    let model = cfg.model.model()?;
    let test = model.sample(cfg.test_count, seed.derive(TAG_TEST))?;
    let grid = match &cfg.bandwidth_grid {
        Some(g) => g.clone(),
        None => bandwidth_grid(model.sigma())?,
    };
    parzen_convergence_sweep(&model, &cfg.sample_counts, &test, &grid, seed.derive(TAG_SWEEP))
}

fn parzen_sweep_tables(cfg: &ParzenSweepConfig, seed: Seed) -> Result<Vec<Table>> {
    let s = parzen_sweep(cfg, seed)?;
    let mut t = Table::new(
        "sweep",
        &["n", "bandwidth", "mean_nats", "std_error", "reference_nats", "reference_std_error"],
    );
    for row in &s.rows {
        t.push(vec![
            n(row.sample_count),
            r(row.bandwidth),
            r(row.mean_test_ll),
            r(row.std_error),
            r(s.reference),
            r(s.reference_std_error),
        ]);
    }
    Ok(vec![t])
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub kmeans_inertia: f64,
    pub kmeans_iterations: usize,
    pub bandwidth_grid: Vec<f64>,
}

/// The k-means exploit on image data scaled to `[0, 1]`.
///
/// A seeded random subset of `train` is split into the k-means training
/// set, the bandwidth-selection set and the held-out true samples; the test
/// set is a seeded subset of `test`. The k-means generator draws centroids
/// with replacement and adds no noise.
pub fn kmeans_exploit(
    train: &QuantizedImageSet,
    test: &QuantizedImageSet,
    cfg: &ParzenBenchmarkConfig,
    seed: Seed,
) -> Result<BenchmarkReport> {
    let need = cfg.train_size + cfg.validation_size + cfg.true_samples;
    if need > train.len() {
        return Err(Error::Config(format!("split needs {need} training images, have {}", train.len())));
    }
    if cfg.test_size > test.len() {
        return Err(Error::Config(format!("test_size {} exceeds {} test images", cfg.test_size, test.len())));
    }
    let order = sample_indices(&mut seed.derive(TAG_SPLIT).rng(), train.len(), need).into_vec();
    let (fit_idx, rest) = order.split_at(cfg.train_size);
    let (val_idx, true_idx) = rest.split_at(cfg.validation_size);
    let test_idx = sample_indices(&mut seed.derive(TAG_TEST).rng(), test.len(), cfg.test_size).into_vec();
    let scaled = |set: &QuantizedImageSet, idx: &[usize]| set.select(idx)?.to_scaled_matrix(255.0);
    let fit_x = scaled(train, fit_idx)?;
    let validation = scaled(train, val_idx)?;
    let true_x = scaled(train, true_idx)?;
    let test_x = scaled(test, &test_idx)?;

    let km = kmeans(&fit_x, cfg.k, cfg.kmeans_iters, seed.derive(TAG_KMEANS))?;
    let generated = sample_centroids(&km.centroids, cfg.generated_samples, seed.derive(TAG_GENERATE))?;
    let grid = match &cfg.bandwidth_grid {
        Some(g) => g.clone(),
        None => bandwidth_grid(data_scale(&validation))?,
    };
    let entries = vec![("k-means".to_string(), generated), ("true samples".to_string(), true_x)];
    Ok(BenchmarkReport {
        rows: parzen_benchmark(&entries, &test_x, &validation, &grid)?,
        kmeans_inertia: km.inertia,
        kmeans_iterations: km.iterations,
        bandwidth_grid: grid,
    })
}

fn parzen_benchmark_tables(cfg: &ExperimentConfig) -> Result<Vec<Table>> {
    let ds = cfg.dataset.as_ref().expect("validated");
    let train = ds.load(cfg.seed.derive(TAG_DATA))?;
    let test = ds
        .load_test(cfg.seed.derive(TAG_DATA).derive(1))?
        .ok_or_else(|| Error::Config("parzen-benchmark needs dataset.test_path".into()))?;
    let rep = kmeans_exploit(&train, &test, &cfg.parzen_benchmark, cfg.seed)?;
    let mut t = Table::new("benchmark", &["entry_name", "n_samples", "bandwidth", "mean_nats", "std_error"]);
    for row in &rep.rows {
        t.push(vec![row.name.clone(), n(row.n_samples), r(row.bandwidth), r(row.mean_nats), r(row.std_error)]);
    }
    Ok(vec![t])
}

/// Shifted-window nearest-neighbor precision on `images`.
pub fn nn_shift(images: &QuantizedImageSet, cfg: &NnShiftConfig, seed: Seed) -> Result<Vec<PrecisionPoint>> {
    let gray;
    let images = match cfg.channel_mode {
        ChannelMode::Color => images,
        ChannelMode::Grayscale => {
            gray = images.to_grayscale();
            &gray
        }
    };
    shift_precision_curve(images, cfg.window, &cfg.shifts, cfg.n_queries, seed.derive(TAG_QUERIES), cfg.level)
}

fn nn_shift_tables(cfg: &ExperimentConfig) -> Result<Vec<Table>> {
    let images = cfg.dataset.as_ref().expect("validated").load(cfg.seed.derive(TAG_DATA))?;
    let curve = nn_shift(&images, &cfg.nn_shift, cfg.seed)?;
    let mut t = Table::new("nn_shift", &["shift", "precision", "ci_low", "ci_high", "n_queries", "seed"]);
    for p in &curve {
        t.push(vec![
            n(p.shift),
            r(p.precision),
            r(p.ci_low),
            r(p.ci_high),
            n(p.n_queries),
            cfg.seed.0.to_string(),
        ]);
    }
    Ok(vec![t])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchScore {
    pub log_p: f64,
    pub log_q: f64,
    pub log_mixture: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDemoReport {
    pub dim: usize,
    pub weight_good: f64,
    /// One entry per test draw from the good model.
    pub patches: Vec<PatchScore>,
    /// Fraction of mixture draws that came from the bad model.
    pub bad_fraction: f64,
}

impl MixtureDemoReport {
    pub fn fraction_alpha_above(&self, threshold: f64) -> f64 {
        self.patches.iter().filter(|p| p.alpha > threshold).count() as f64 / self.patches.len() as f64
    }
}

/// Scores draws from the good model under the good model, the bad model and
/// their mixture, and samples the mixture.
pub fn mixture_demo(cfg: &MixtureDemoConfig, seed: Seed) -> Result<MixtureDemoReport> {
    let p = cfg.good.model()?;
    let q = cfg.bad.model()?;
    let test = p.sample(cfg.test_count, seed.derive(TAG_TEST))?;
    let patches = test
        .iter_rows()
        .map(|x| {
            let log_p = p.log_density(x)?;
            let log_q = q.log_density(x)?;
            Ok(PatchScore {
                log_p,
                log_q,
                log_mixture: mixture_trick_log_density(log_p, log_q, cfg.weight_good)?,
                alpha: posterior_alpha(log_p, log_q, cfg.weight_good)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let model = MixtureTrickModel::with_weight(&p, &q, cfg.weight_good)?;
    let (_, labels) = sample_mixture_trick(&model, &p, &q, cfg.samples, seed.derive(TAG_MIXTURE))?;
    let bad = labels.iter().filter(|l| **l == MixtureLabel::Bad).count();
    Ok(MixtureDemoReport {
        dim: p.dim(),
        weight_good: cfg.weight_good,
        patches,
        bad_fraction: bad as f64 / cfg.samples as f64,
    })
}

fn mixture_demo_tables(cfg: &MixtureDemoConfig, seed: Seed) -> Result<Vec<Table>> {
    let rep = mixture_demo(cfg, seed)?;
    let mut per = Table::new("mixture_patches", &["index", "log_p", "log_q", "log_mixture", "penalty", "alpha"]);
    for (i, s) in rep.patches.iter().enumerate() {
        per.push(vec![n(i), r(s.log_p), r(s.log_q), r(s.log_mixture), r(s.log_p - s.log_mixture), r(s.alpha)]);
    }
    let mean_of = |f: &dyn Fn(&PatchScore) -> f64| crate::numeric::mean(&rep.patches.iter().map(f).collect::<Vec<_>>());
    let penalties: Vec<f64> = rep.patches.iter().map(|s| s.log_p - s.log_mixture).collect();
    let mean_p = mean_of(&|s| s.log_p);
    let mean_mix = mean_of(&|s| s.log_mixture);
    let mut sum = Table::new("mixture_summary", &["quantity", "value"]);
    for (k, v) in [
        ("penalty_bound_nats", -rep.weight_good.ln()),
        ("mean_penalty_nats", crate::numeric::mean(&penalties)),
        ("max_penalty_nats", penalties.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        ("mean_log_p", mean_p),
        ("mean_log_mixture", mean_mix),
        ("bits_per_dim_p", nats_to_bits_per_dim(mean_p, rep.dim)?),
        ("bits_per_dim_mixture", nats_to_bits_per_dim(mean_mix, rep.dim)?),
        ("fraction_alpha_above_threshold", rep.fraction_alpha_above(cfg.alpha_threshold)),
        ("alpha_threshold", cfg.alpha_threshold),
        ("bad_label_fraction", rep.bad_fraction),
    ] {
        sum.push(vec![k.to_string(), r(v)]);
    }
    Ok(vec![sum, per])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DequantizeReport {
    pub model: IsotropicGaussian,
    pub check: JensenCheck,
    pub dim: usize,
    /// Whether `model` lives on data divided by 256.
    pub rescaled: bool,
}

/// Fits an isotropic Gaussian to dequantized training patches and compares
/// its continuous and discrete log-likelihoods on test patches, in pixel
/// units.
pub fn dequantize_ll(images: &QuantizedImageSet, cfg: &DequantizeLlConfig, seed: Seed) -> Result<DequantizeReport> {
    let spec = |count, tag| PatchSpec {
        patch_size: cfg.patch_size,
        channel_mode: cfg.channel_mode,
        count,
        seed: seed.derive(tag),
    };
    let train = extract_patches(images, &spec(cfg.train_patches, TAG_TRAIN_PATCHES))?;
    let test = extract_patches(images, &spec(cfg.test_patches, TAG_TEST_PATCHES))?;
    let model = IsotropicGaussian::fit(&dequantize(&train, seed.derive(TAG_DEQUANTIZE), cfg.rescale)?)?;
    let d = train.dim();
    let check = if cfg.rescale {
        let shift = d as f64 * 256f64.ln();
        let pixel_units = FnDensity::new(d, |y: &[f64]| {
            let scaled: Vec<f64> = y.iter().map(|v| v / 256.0).collect();
            model.log_density(&scaled).map(|l| l - shift).unwrap_or(f64::NAN)
        });
        jensen_bound_check(&pixel_units, &test, seed.derive(TAG_MC), cfg.mc_samples)?
    } else {
        jensen_bound_check(&model, &test, seed.derive(TAG_MC), cfg.mc_samples)?
    };
    Ok(DequantizeReport {
        model,
        check,
        dim: d,
        rescaled: cfg.rescale,
    })
}

fn dequantize_ll_tables(cfg: &ExperimentConfig) -> Result<Vec<Table>> {
    let ds = cfg
        .dataset
        .clone()
        .unwrap_or_else(|| DatasetSpec::synthetic(1000, crate::images::ImageGeometry::new(32, 32, 3).expect("valid")));
    let images = ds.load(cfg.seed.derive(TAG_DATA))?;
    let c = &cfg.dequantize_ll;
    let rep = dequantize_ll(&images, c, cfg.seed)?;
    let dataset = format!(
        "{}-{}x{}-{}",
        match ds.format {
            DatasetFormat::Cifar10 => "cifar10",
            DatasetFormat::Mnist => "mnist",
            DatasetFormat::Synthetic => "synthetic",
        },
        c.patch_size,
        c.patch_size,
        match c.channel_mode {
            ChannelMode::Grayscale => "gray",
            ChannelMode::Color => "color",
        }
    );
    let uniform = UniformBox::pixels(rep.dim)?.log_density(&vec![0.0; rep.dim])?;
    let name = if rep.rescaled { "gaussian-rescaled" } else { "gaussian" };
    let seed = cfg.seed.0.to_string();
    let mut t = Table::new(
        "loglik",
        &["dataset", "model", "nats_per_item", "bits_per_dim", "std_error", "mc_samples", "seed"],
    );
    for (model, ll, se, mc) in [
        (format!("{name}-continuous"), rep.check.continuous_ll, f64::NAN, 1),
        (format!("{name}-discrete"), rep.check.discrete_ll, rep.check.std_error, rep.check.mc_samples),
        ("uniform-8bit".to_string(), uniform, 0.0, 1),
    ] {
        t.push(vec![
            dataset.clone(),
            model,
            r(ll),
            r(nats_to_bits_per_dim(ll, rep.dim)?),
            r(se),
            n(mc),
            seed.clone(),
        ]);
    }
    Ok(vec![t])
}

/// The tables an experiment produces, without touching the filesystem
/// beyond reading its dataset.
pub fn experiment_tables(cfg: &ExperimentConfig) -> Result<Vec<Table>> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::FitDivergence => fit_divergence_tables(&cfg.fit_divergence, cfg.seed),
        Experiment::ParzenSweep => parzen_sweep_tables(&cfg.parzen_sweep, cfg.seed),
        Experiment::ParzenBenchmark => parzen_benchmark_tables(cfg),
        Experiment::NnShift => nn_shift_tables(cfg),
        Experiment::MixtureDemo => mixture_demo_tables(&cfg.mixture_demo, cfg.seed),
        Experiment::DequantizeLl => dequantize_ll_tables(cfg),
    }
}

pub const CONFIG_FILE: &str = "resolved_config.toml";
pub const MANIFEST_FILE: &str = "manifest.toml";

/// Validates `cfg`, runs it and writes CSV files, `resolved_config.toml`
/// and `manifest.toml` into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutputs> {
    cfg.validate()?;
    let start = Instant::now();
    let tables = experiment_tables(cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut csv = Vec::new();
    let mut outputs = Vec::new();
    for t in &tables {
        let path = out_dir.join(t.file_name());
        write_file(&path, &t.to_csv()?)?;
        if cfg.gnuplot {
            write_file(&out_dir.join(format!("{}.dat", t.name)), t.to_gnuplot().as_bytes())?;
        }
        outputs.push(OutputRecord {
            file: t.file_name(),
            rows: t.rows.len(),
            sha256: sha256_file(&path)?,
        });
        csv.push(path);
    }
    write_file(&out_dir.join(CONFIG_FILE), cfg.to_toml().as_bytes())?;
    let manifest = Manifest {
        tool: "geneval".into(),
        version: crate::VERSION.into(),
        experiment: cfg.experiment.to_string(),
        seed: cfg.seed.0,
        threads: rayon::current_num_threads(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        config_file: CONFIG_FILE.into(),
        rerun: format!("geneval {} --config {CONFIG_FILE}", cfg.experiment),
        outputs,
    };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    write_file(
        &manifest_path,
        toml::to_string(&manifest).map_err(|e| Error::Config(e.to_string()))?.as_bytes(),
    )?;
    Ok(RunOutputs {
        dir: out_dir.to_path_buf(),
        csv,
        manifest: manifest_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::images::ImageGeometry;

    fn small(e: Experiment) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(e);
        c.fit_divergence.target_samples = 100;
        c.fit_divergence.model_samples = 100;
        c.fit_divergence.grid_points = 61;
        c.fit_divergence.mmd.max_iters = 5;
        c.fit_divergence.jsd.max_iters = 5;
        c.parzen_sweep.sample_counts = vec![10, 50];
        c.parzen_sweep.test_count = 20;
        c.parzen_benchmark = ParzenBenchmarkConfig {
            train_size: 40,
            validation_size: 10,
            true_samples: 10,
            test_size: 10,
            k: 10,
            kmeans_iters: 3,
            generated_samples: 10,
            bandwidth_grid: None,
        };
        c.nn_shift.window = 10;
        c.nn_shift.n_queries = 8;
        c.mixture_demo.test_count = 20;
        c.mixture_demo.samples = 100;
        c.dequantize_ll.train_patches = 50;
        c.dequantize_ll.test_patches = 10;
        c.dequantize_ll.mc_samples = 8;
        c.dataset = match e {
            Experiment::ParzenBenchmark => Some(DatasetSpec::synthetic(80, ImageGeometry::new(6, 6, 1).unwrap())),
            Experiment::NnShift | Experiment::DequantizeLl => {
                Some(DatasetSpec::synthetic(30, ImageGeometry::new(14, 14, 3).unwrap()))
            }
            _ => None,
        };
        c
    }

    #[test]
    fn every_experiment_runs_and_repeats_exactly() {
        let dir = tempfile::tempdir().unwrap();
        for e in Experiment::ALL {
            let cfg = small(e);
            let a = run_experiment(&cfg, &dir.path().join(format!("{e}-a"))).unwrap();
            let b = run_experiment(&cfg, &dir.path().join(format!("{e}-b"))).unwrap();
            assert!(!a.csv.is_empty());
            for (x, y) in a.csv.iter().zip(&b.csv) {
                assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{e}");
            }
            let resolved = std::fs::read_to_string(a.dir.join(CONFIG_FILE)).unwrap();
            assert_eq!(ExperimentConfig::parse(&resolved).unwrap(), cfg);
        }
    }

    #[test]
    fn gnuplot_files_are_optional() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(Experiment::ParzenSweep);
        cfg.gnuplot = true;
        run_experiment(&cfg, dir.path()).unwrap();
        let dat = std::fs::read_to_string(dir.path().join("sweep.dat")).unwrap();
        assert!(dat.starts_with("# n bandwidth"));
        assert_eq!(dat.lines().count(), 3);
    }

    #[test]
    fn fit_divergence_shapes() {
        let cfg = small(Experiment::FitDivergence);
        let tables = experiment_tables(&cfg).unwrap();
        assert_eq!(tables[0].rows.len(), 3);
        assert_eq!(tables[0].header[..4], ["method", "mean_1", "mean_2", "sigma"]);
        let kld_sigma: f64 = tables[0].rows[0][3].parse().unwrap();
        assert!((kld_sigma - 3f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn mixture_demo_reports_penalty_bound() {
        let rep = mixture_demo(&small(Experiment::MixtureDemo).mixture_demo, Seed(1)).unwrap();
        for s in &rep.patches {
            let penalty = s.log_p - s.log_mixture;
            assert!(penalty <= 100f64.ln() + 1e-12 && penalty >= -1e-12);
        }
    }
}
