//! Evaluation procedures for generative image models, with independent
//! cross-checks for each of them.
//!
//! The crate is organised around the questions one asks of a generative
//! model and the ways the usual answers can mislead:
//!
//! | Module | What it does |
//! |--------|--------------|
//! | [`density`] | Gaussian and mixture densities, sampling, `log_sum_exp` |
//! | [`divergence`] | Fit an isotropic Gaussian by KLD, MMD or JSD |
//! | [`likelihood`] | Dequantization, discrete likelihood bounds, bits/dim, mixture constructions |
//! | [`parzen`] | Parzen-window scores, bandwidth selection, k-means sample exploit |
//! | [`nn`] | Shifted-window nearest-neighbor precision with binomial intervals |
//! | [`datasets`] | CIFAR-10 binary and MNIST IDX readers, patch extraction |
//! | [`experiment`] | Config-driven, seeded experiment runner writing CSV |
//!
//! All log-likelihoods are natural-log (nats) until they are reported as
//! bits per dimension. Every stochastic operation takes an explicit
//! [`Seed`]; see [`rng`] for the generator.
//!
//! ```
//! use geneval::density::{log_sum_exp, IsotropicGaussian, LogDensity};
//!
//! let g = IsotropicGaussian::new(vec![0.0], 1.0).unwrap();
//! let lp = g.log_density(&[0.0]).unwrap();
//! assert!((lp + 0.918_938_533_204_672_7).abs() < 1e-12);
//! assert!((log_sum_exp(&[0.0, 0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datasets;
pub mod density;
pub mod divergence;
pub mod error;
pub mod experiment;
pub mod images;
pub mod likelihood;
pub mod matrix;
pub mod nn;
pub mod numeric;
pub mod parzen;
pub mod rng;

pub use error::{Error, Result};
pub use images::{ImageGeometry, QuantizedImageSet};
pub use matrix::SampleMatrix;
pub use rng::Seed;

/// Crate version, echoed into experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
