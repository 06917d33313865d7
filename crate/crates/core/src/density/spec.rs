//! Plain-text model description shared by the library and the CLI.
//!
//! Models are written as TOML tables tagged by `kind`:
//!
//! ```toml
//! kind = "isotropic"
//! mean = [0.0, 0.0]
//! sigma = 1.0
//! ```
//!
//! ```toml
//! kind = "mixture"
//!
//! [[components]]
//! weight = 0.5
//! mean = [-2.0, 0.0]
//! variance = [1.0, 1.0]
//!
//! [[components]]
//! weight = 0.5
//! mean = [2.0, 0.0]
//! variance = [1.0, 1.0]
//! ```

use serde::{Deserialize, Serialize};

use super::{GaussianComponent, GaussianMixture, IsotropicGaussian};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Isotropic { mean: Vec<f64>, sigma: f64 },
    Mixture { components: Vec<WeightedComponent> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model specs always serialize")
    }

    /// The model as a mixture; an isotropic Gaussian becomes one component.
    pub fn to_mixture(&self) -> Result<GaussianMixture> {
        match self {
            ModelSpec::Isotropic { mean, sigma } => {
                Ok(GaussianMixture::from(&IsotropicGaussian::new(mean.clone(), *sigma)?))
            }
            ModelSpec::Mixture { components } => {
                let weights = components.iter().map(|c| c.weight).collect();
                let comps = components
                    .iter()
                    .map(|c| GaussianComponent::new(c.mean.clone(), c.variance.clone()))
                    .collect::<Result<Vec<_>>>()?;
                GaussianMixture::new(weights, comps)
            }
        }
    }

    pub fn to_isotropic(&self) -> Result<IsotropicGaussian> {
        match self {
            ModelSpec::Isotropic { mean, sigma } => IsotropicGaussian::new(mean.clone(), *sigma),
            ModelSpec::Mixture { .. } => Err(Error::Config(
                "expected kind = \"isotropic\", found a mixture".into(),
            )),
        }
    }
}

impl From<&IsotropicGaussian> for ModelSpec {
    fn from(g: &IsotropicGaussian) -> Self {
        ModelSpec::Isotropic {
            mean: g.mean().to_vec(),
            sigma: g.sigma(),
        }
    }
}

impl From<&GaussianMixture> for ModelSpec {
    fn from(m: &GaussianMixture) -> Self {
        ModelSpec::Mixture {
            components: m
                .weights()
                .iter()
                .zip(m.components())
                .map(|(w, c)| WeightedComponent {
                    weight: *w,
                    mean: c.mean.clone(),
                    variance: c.variance.clone(),
                })
                .collect(),
        }
    }
}
