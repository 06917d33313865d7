use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datasets::{read_cifar10, read_mnist_idx, ChannelMode};
use crate::density::{GaussianComponent, GaussianMixture, IsotropicGaussian, ModelSpec};
use crate::error::{Error, Result};
use crate::images::{ImageGeometry, QuantizedImageSet};
use crate::rng::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    FitDivergence,
    ParzenSweep,
    ParzenBenchmark,
    NnShift,
    MixtureDemo,
    DequantizeLl,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::FitDivergence,
        Experiment::ParzenSweep,
        Experiment::ParzenBenchmark,
        Experiment::NnShift,
        Experiment::MixtureDemo,
        Experiment::DequantizeLl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::FitDivergence => "fit-divergence",
            Experiment::ParzenSweep => "parzen-sweep",
            Experiment::ParzenBenchmark => "parzen-benchmark",
            Experiment::NnShift => "nn-shift",
            Experiment::MixtureDemo => "mixture-demo",
            Experiment::DequantizeLl => "dequantize-ll",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
            Error::Config(format!("unknown experiment `{s}` (expected one of: {})", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    Cifar10,
    Mnist,
    Synthetic,
}

/// Where images come from. `path` is a CIFAR-10 batch file or directory,
/// or an MNIST image file; `test_path` is the MNIST test image file.
/// Synthetic sets are generated from `count` and the geometry fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub format: DatasetFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_path: Option<PathBuf>,
    /// Keep only the first `limit` images.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
    #[serde(default = "default_synthetic_count")]
    pub count: usize,
    #[serde(default = "default_side")]
    pub height: usize,
    #[serde(default = "default_side")]
    pub width: usize,
    #[serde(default = "default_channels")]
    pub channels: usize,
}

fn default_synthetic_count() -> usize {
    1000
}
fn default_side() -> usize {
    32
}
fn default_channels() -> usize {
    3
}

impl DatasetSpec {
    pub fn synthetic(count: usize, geometry: ImageGeometry) -> Self {
        DatasetSpec {
            format: DatasetFormat::Synthetic,
            path: None,
            test_path: None,
            limit: None,
            count,
            height: geometry.height,
            width: geometry.width,
            channels: geometry.channels,
        }
    }

    pub fn cifar10(path: impl Into<PathBuf>) -> Self {
        DatasetSpec {
            format: DatasetFormat::Cifar10,
            path: Some(path.into()),
            ..Self::synthetic(0, ImageGeometry::new(32, 32, 3).expect("valid"))
        }
    }

    pub fn mnist(train: impl Into<PathBuf>, test: impl Into<PathBuf>) -> Self {
        DatasetSpec {
            format: DatasetFormat::Mnist,
            path: Some(train.into()),
            test_path: Some(test.into()),
            ..Self::synthetic(0, ImageGeometry::new(28, 28, 1).expect("valid"))
        }
    }

    fn validate(&self) -> Result<()> {
        let need = |p: &Option<PathBuf>, what: &str| -> Result<()> {
            match p {
                None => Err(Error::Config(format!("dataset.{what} is required for {:?} data", self.format))),
                Some(p) if !p.exists() => Err(Error::Config(format!("dataset.{what} {} does not exist", p.display()))),
                Some(_) => Ok(()),
            }
        };
        match self.format {
            DatasetFormat::Cifar10 => need(&self.path, "path")?,
            DatasetFormat::Mnist => need(&self.path, "path")?,
            DatasetFormat::Synthetic => {
                if self.count == 0 {
                    return Err(Error::Config("dataset.count must be at least 1".into()));
                }
                ImageGeometry::new(self.height, self.width, self.channels)?;
            }
        }
        if self.limit == Some(0) {
            return Err(Error::Config("dataset.limit must be at least 1".into()));
        }
        Ok(())
    }

    fn trim(&self, images: QuantizedImageSet) -> Result<QuantizedImageSet> {
        match self.limit {
            Some(n) if n > images.len() => Err(Error::Config(format!(
                "dataset.limit {n} exceeds the {} available images",
                images.len()
            ))),
            Some(n) => images.head(n),
            None => Ok(images),
        }
    }

    /// Primary images; synthetic sets derive their content from `seed`.
    pub fn load(&self, seed: Seed) -> Result<QuantizedImageSet> {
        let images = match self.format {
            DatasetFormat::Cifar10 => read_cifar10(self.path.as_ref().expect("validated"))?,
            DatasetFormat::Mnist => read_mnist_idx(self.path.as_ref().expect("validated"))?,
            DatasetFormat::Synthetic => QuantizedImageSet::synthetic(
                self.count,
                ImageGeometry::new(self.height, self.width, self.channels)?,
                seed,
            )?,
        };
        self.trim(images)
    }

    /// Test images: `test_path` when given, otherwise a second synthetic set
    /// or `None`.
    pub fn load_test(&self, seed: Seed) -> Result<Option<QuantizedImageSet>> {
        match (&self.test_path, self.format) {
            (Some(p), DatasetFormat::Mnist) => Ok(Some(read_mnist_idx(p)?)),
            (Some(p), DatasetFormat::Cifar10) => Ok(Some(read_cifar10(p)?)),
            (None, DatasetFormat::Synthetic) => Ok(Some(QuantizedImageSet::synthetic(
                self.count,
                ImageGeometry::new(self.height, self.width, self.channels)?,
                seed,
            )?)),
            _ => Ok(None),
        }
    }
}

/// The default two-mode target: weights 1/2, means (-2, 0) and (2, 0),
/// unit variances.
pub fn two_mode_target() -> GaussianMixture {
    GaussianMixture::new(
        vec![0.5, 0.5],
        vec![
            GaussianComponent::isotropic(vec![-2.0, 0.0], 1.0).expect("valid"),
            GaussianComponent::isotropic(vec![2.0, 0.0], 1.0).expect("valid"),
        ],
    )
    .expect("valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescentSettings {
    pub max_iters: usize,
    pub step_size: f64,
    pub tolerance: f64,
}

impl Default for DescentSettings {
    fn default() -> Self {
        DescentSettings {
            max_iters: 500,
            step_size: 1.0,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitDivergenceConfig {
    pub target: ModelSpec,
    /// Target draws used by the MMD fit.
    pub target_samples: usize,
    /// Model draws in the frozen MMD noise bank.
    pub model_samples: usize,
    /// Multipliers of the median pairwise distance of the target draws.
    pub kernel_multipliers: Vec<f64>,
    /// Explicit kernel bandwidths; overrides `kernel_multipliers`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_bandwidths: Option<Vec<f64>>,
    pub mmd: DescentSettings,
    pub jsd: DescentSettings,
    /// Quadrature nodes per axis for the JSD fit.
    pub grid_points: usize,
    /// Extra JSD fits from random starting points.
    pub jsd_restarts: usize,
}

impl Default for FitDivergenceConfig {
    fn default() -> Self {
        FitDivergenceConfig {
            target: ModelSpec::from(&two_mode_target()),
            target_samples: 1000,
            model_samples: 1000,
            kernel_multipliers: crate::divergence::DEFAULT_BANDWIDTH_MULTIPLIERS.to_vec(),
            kernel_bandwidths: None,
            mmd: DescentSettings::default(),
            jsd: DescentSettings::default(),
            grid_points: 201,
            jsd_restarts: 0,
        }
    }
}

/// An isotropic Gaussian over `dim` pixels with mean `level` everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchGaussian {
    pub dim: usize,
    pub level: f64,
    pub sigma: f64,
}

impl PatchGaussian {
    /// 6x6 grayscale patches. The scale is the geometric-mean standard
    /// deviation of a full-covariance Gaussian fit to grayscale 6x6 CIFAR-10
    /// patches, so this isotropic model has the same entropy.
    pub const PATCHES: PatchGaussian = PatchGaussian {
        dim: 36,
        level: 120.0,
        sigma: 17.0,
    };

    /// Uniform pixel noise matched in mean and variance.
    pub const WHITE_NOISE: PatchGaussian = PatchGaussian {
        dim: 36,
        level: 127.5,
        sigma: 73.900_834_456_9,
    };

    pub fn model(&self) -> Result<IsotropicGaussian> {
        if self.dim == 0 {
            return Err(Error::Config("patch Gaussian dim must be at least 1".into()));
        }
        IsotropicGaussian::new(vec![self.level; self.dim], self.sigma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParzenSweepConfig {
    pub model: PatchGaussian,
    pub sample_counts: Vec<usize>,
    pub test_count: usize,
    /// Explicit bandwidths; defaults to 20 log-spaced values over
    /// `[0.01, 1] * sigma`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_grid: Option<Vec<f64>>,
}

impl Default for ParzenSweepConfig {
    fn default() -> Self {
        ParzenSweepConfig {
            model: PatchGaussian::PATCHES,
            sample_counts: vec![100, 1000, 10_000],
            test_count: 1000,
            bandwidth_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParzenBenchmarkConfig {
    pub train_size: usize,
    pub validation_size: usize,
    pub true_samples: usize,
    pub test_size: usize,
    pub k: usize,
    pub kmeans_iters: usize,
    /// Draws from the k-means centroids.
    pub generated_samples: usize,
    /// Explicit bandwidths; defaults to 20 log-spaced values over
    /// `[0.01, 1]` times the pixel scale of the validation set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_grid: Option<Vec<f64>>,
}

impl Default for ParzenBenchmarkConfig {
    fn default() -> Self {
        ParzenBenchmarkConfig {
            train_size: 10_000,
            validation_size: 1000,
            true_samples: 1000,
            test_size: 1000,
            k: 1000,
            kmeans_iters: 10,
            generated_samples: 1000,
            bandwidth_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NnShiftConfig {
    pub window: usize,
    pub shifts: Vec<usize>,
    pub n_queries: usize,
    pub level: f64,
    pub channel_mode: ChannelMode,
}

impl Default for NnShiftConfig {
    fn default() -> Self {
        NnShiftConfig {
            window: 28,
            shifts: vec![0, 1, 2, 3, 4],
            n_queries: 1000,
            level: 0.9,
            channel_mode: ChannelMode::Color,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixtureDemoConfig {
    pub good: PatchGaussian,
    pub bad: PatchGaussian,
    pub weight_good: f64,
    pub test_count: usize,
    /// Draws from the mixture used to report how often the bad model fires.
    pub samples: usize,
    pub alpha_threshold: f64,
}

impl Default for MixtureDemoConfig {
    fn default() -> Self {
        MixtureDemoConfig {
            good: PatchGaussian::PATCHES,
            bad: PatchGaussian::WHITE_NOISE,
            weight_good: crate::likelihood::DEFAULT_WEIGHT_GOOD,
            test_count: 1000,
            samples: 100_000,
            alpha_threshold: 0.999,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DequantizeLlConfig {
    pub patch_size: usize,
    pub channel_mode: ChannelMode,
    /// Patches used to fit the Gaussian.
    pub train_patches: usize,
    /// Patches scored.
    pub test_patches: usize,
    pub mc_samples: usize,
    /// Fit and score on data divided by 256, reporting in pixel units.
    pub rescale: bool,
}

impl Default for DequantizeLlConfig {
    fn default() -> Self {
        DequantizeLlConfig {
            patch_size: 6,
            channel_mode: ChannelMode::Grayscale,
            train_patches: 10_000,
            test_patches: 1000,
            mc_samples: 256,
            rescale: false,
        }
    }
}

/// Everything an experiment run needs. Sections for other experiments are
/// accepted and ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: Seed,
    /// Also write whitespace-separated `.dat` files for gnuplot.
    #[serde(default)]
    pub gnuplot: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSpec>,
    #[serde(default)]
    pub fit_divergence: FitDivergenceConfig,
    #[serde(default)]
    pub parzen_sweep: ParzenSweepConfig,
    #[serde(default)]
    pub parzen_benchmark: ParzenBenchmarkConfig,
    #[serde(default)]
    pub nn_shift: NnShiftConfig,
    #[serde(default)]
    pub mixture_demo: MixtureDemoConfig,
    #[serde(default)]
    pub dequantize_ll: DequantizeLlConfig,
}

impl ExperimentConfig {
    /// Defaults for `experiment`, with no dataset.
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            seed: Seed(0),
            gnuplot: false,
            dataset: None,
            fit_divergence: FitDivergenceConfig::default(),
            parzen_sweep: ParzenSweepConfig::default(),
            parzen_benchmark: ParzenBenchmarkConfig::default(),
            nn_shift: NnShiftConfig::default(),
            mixture_demo: MixtureDemoConfig::default(),
            dequantize_ll: DequantizeLlConfig::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &[])
    }

    /// Parses `text` after applying `key=value` overrides, where the key is
    /// a dotted path such as `nn_shift.window` and the value is a TOML value
    /// (bare words are taken as strings).
    pub fn parse_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    /// Reads a config file. Relative dataset paths are taken relative to
    /// the file's directory, so a resolved config reruns from anywhere.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse_with(&text, overrides)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(d) = &mut cfg.dataset {
            for p in [&mut d.path, &mut d.test_path].into_iter().flatten() {
                if p.is_relative() {
                    let joined = base.join(&*p);
                    *p = std::path::absolute(&joined).unwrap_or(joined);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    /// Checks that run before any computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if let Some(d) = &self.dataset {
            d.validate()?;
        }
        let needs_dataset = |formats: &[DatasetFormat]| -> Result<()> {
            match &self.dataset {
                Some(d) if formats.contains(&d.format) => Ok(()),
                Some(d) => bad(format!("{} does not accept {:?} data", self.experiment, d.format)),
                None => bad(format!("{} needs a [dataset] section", self.experiment)),
            }
        };
        match self.experiment {
            Experiment::FitDivergence => {
                let c = &self.fit_divergence;
                let target = c.target.to_mixture()?;
                if target.dim() > crate::divergence::MAX_GRID_DIM {
                    return bad(format!("JSD quadrature supports at most {} dimensions", crate::divergence::MAX_GRID_DIM));
                }
                if c.target_samples < 2 || c.model_samples == 0 {
                    return bad("fit_divergence needs target_samples >= 2 and model_samples >= 1".into());
                }
                for s in [&c.mmd, &c.jsd] {
                    if s.max_iters == 0 || !(s.step_size > 0.0) || !(s.tolerance > 0.0) {
                        return bad("descent settings need max_iters >= 1, step_size > 0, tolerance > 0".into());
                    }
                }
                if c.grid_points < 2 {
                    return bad("fit_divergence.grid_points must be at least 2".into());
                }
                match &c.kernel_bandwidths {
                    Some(b) => {
                        crate::divergence::KernelBank::new(b.clone())?;
                    }
                    None if c.kernel_multipliers.is_empty() || c.kernel_multipliers.iter().any(|m| !(*m > 0.0)) => {
                        return bad("fit_divergence.kernel_multipliers must be nonempty and positive".into());
                    }
                    None => {}
                }
            }
            Experiment::ParzenSweep => {
                let c = &self.parzen_sweep;
                c.model.model()?;
                if c.sample_counts.is_empty() || c.sample_counts.contains(&0) || c.sample_counts.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("parzen_sweep.sample_counts must be positive and strictly increasing".into());
                }
                if c.test_count == 0 {
                    return bad("parzen_sweep.test_count must be at least 1".into());
                }
                check_grid(&c.bandwidth_grid)?;
            }
            Experiment::ParzenBenchmark => {
                needs_dataset(&[DatasetFormat::Mnist, DatasetFormat::Synthetic])?;
                let c = &self.parzen_benchmark;
                if [c.train_size, c.validation_size, c.true_samples, c.test_size, c.k, c.generated_samples].contains(&0) {
                    return bad("parzen_benchmark sizes must all be at least 1".into());
                }
                if c.k > c.train_size {
                    return bad(format!("parzen_benchmark.k = {} exceeds train_size = {}", c.k, c.train_size));
                }
                check_grid(&c.bandwidth_grid)?;
            }
            Experiment::NnShift => {
                needs_dataset(&[DatasetFormat::Cifar10, DatasetFormat::Synthetic])?;
                let c = &self.nn_shift;
                if c.window == 0 || c.n_queries == 0 || c.shifts.is_empty() {
                    return bad("nn_shift needs window >= 1, n_queries >= 1 and at least one shift".into());
                }
                if !(c.level > 0.0 && c.level < 1.0) {
                    return bad("nn_shift.level must lie in (0, 1)".into());
                }
            }
            Experiment::MixtureDemo => {
                let c = &self.mixture_demo;
                if c.good.model()?.dim() != c.bad.model()?.dim() {
                    return bad("mixture_demo good and bad models must share dim".into());
                }
                if !(c.weight_good > 0.0 && c.weight_good < 1.0) {
                    return bad("mixture_demo.weight_good must lie in (0, 1)".into());
                }
                if c.test_count == 0 || c.samples == 0 {
                    return bad("mixture_demo.test_count and samples must be at least 1".into());
                }
            }
            Experiment::DequantizeLl => {
                let c = &self.dequantize_ll;
                if let Some(d) = &self.dataset {
                    if d.format == DatasetFormat::Mnist {
                        return bad("dequantize-ll reads CIFAR-10 or synthetic images".into());
                    }
                }
                if c.patch_size == 0 || c.train_patches < 2 || c.test_patches == 0 || c.mc_samples == 0 {
                    return bad("dequantize_ll needs patch_size, test_patches, mc_samples >= 1 and train_patches >= 2".into());
                }
            }
        }
        Ok(())
    }
}

fn check_grid(grid: &Option<Vec<f64>>) -> Result<()> {
    match grid {
        Some(g) if g.is_empty() || g.iter().any(|h| !(*h > 0.0) || !h.is_finite()) => {
            Err(Error::Config("bandwidth_grid must be nonempty, finite and positive".into()))
        }
        _ => Ok(()),
    }
}

fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let value = parse_value(raw.trim());
    let path: Vec<&str> = key.trim().split('.').collect();
    let mut node = table;
    for part in &path[..path.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{part}` is not a table")))?;
    }
    node.insert(path[path.len() - 1].to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
