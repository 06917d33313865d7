//! Nearest-neighbor retrieval of slightly shifted image windows.
//!
//! Take the top-left `window x window` crop of every training image as the
//! reference set, shift the crop diagonally by a few pixels and ask whether
//! each shifted crop still finds its own source image as Euclidean nearest
//! neighbor. The precision collapses within a few pixels, which is why
//! "nearest training image looks different" says little about overfitting.
//!
//! Windows are kept as bytes; distances are exact integer sums.

use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{check_dim, Error, Result};
use crate::images::{ImageGeometry, QuantizedImageSet};
use crate::matrix::SampleMatrix;
use crate::numeric::{squared_distance, squared_distance_u8, squared_distance_within};
use crate::rng::Seed;

/// Windows cropped at offset `(shift, shift)`, one per source image.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedQuerySet {
    pub shift: usize,
    /// `window x window x channels` crops, channel-interleaved row-major.
    pub windows: QuantizedImageSet,
    /// Index of the image each window was cut from.
    pub source_indices: Vec<usize>,
}

impl ShiftedQuerySet {
    /// The windows as real-valued query rows.
    pub fn queries(&self) -> Result<SampleMatrix> {
        self.windows.to_sample_matrix()
    }

    pub fn len(&self) -> usize {
        self.source_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_indices.is_empty()
    }
}

fn crop(images: &QuantizedImageSet, i: usize, window: usize, shift: usize, out: &mut Vec<u8>) {
    let g = images.geometry();
    let img = images.image(i);
    let row_len = g.width * g.channels;
    for y in shift..shift + window {
        let start = y * row_len + shift * g.channels;
        out.extend_from_slice(&img[start..start + window * g.channels]);
    }
}

/// One query set per entry of `shifts`, covering every image.
pub fn extract_shifted_windows(images: &QuantizedImageSet, window: usize, shifts: &[usize]) -> Result<Vec<ShiftedQuerySet>> {
    let all: Vec<usize> = (0..images.len()).collect();
    extract_shifted_windows_for(images, window, shifts, &all)
}

/// Like [`extract_shifted_windows`], restricted to the images in `indices`.
pub fn extract_shifted_windows_for(
    images: &QuantizedImageSet,
    window: usize,
    shifts: &[usize],
    indices: &[usize],
) -> Result<Vec<ShiftedQuerySet>> {
    let g = images.geometry();
    if window == 0 {
        return Err(Error::invalid("window", "must be at least 1"));
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= images.len()) {
        return Err(Error::invalid("indices", format!("index {i} out of range for {} images", images.len())));
    }
    let geometry = ImageGeometry::new(window, window, g.channels)?;
    shifts
        .iter()
        .map(|&shift| {
            if window + shift > g.height || window + shift > g.width {
                return Err(Error::invalid(
                    "window",
                    format!("window {window} at shift {shift} exceeds {}x{} images", g.height, g.width),
                ));
            }
            let mut data = Vec::with_capacity(indices.len() * geometry.dim());
            for &i in indices {
                crop(images, i, window, shift, &mut data);
            }
            Ok(ShiftedQuerySet {
                shift,
                windows: QuantizedImageSet::new(data, geometry)?,
                source_indices: indices.to_vec(),
            })
        })
        .collect()
}

/// Exact nearest row of `train` to `query` by squared Euclidean distance,
/// smallest index on ties.
pub fn nearest_neighbor(query: &[f64], train: &SampleMatrix) -> Result<(usize, f64)> {
    check_dim(train.cols(), query.len())?;
    let mut best = (0, squared_distance(query, train.row(0)));
    for j in 1..train.rows() {
        if let Some(d) = squared_distance_within(query, train.row(j), best.1) {
            if d < best.1 {
                best = (j, d);
            }
        }
    }
    Ok(best)
}

const BYTE_BLOCK: usize = 256;

/// Integer squared distance, or `None` once it is known to exceed `bound`.
#[inline]
fn byte_distance_within(a: &[u8], b: &[u8], bound: u64) -> Option<u64> {
    let mut total = 0u64;
    for (ca, cb) in a.chunks(BYTE_BLOCK).zip(b.chunks(BYTE_BLOCK)) {
        // 256 * 255^2 fits in u32.
        let mut acc = 0u32;
        for (&x, &y) in ca.iter().zip(cb) {
            let d = x as i32 - y as i32;
            acc += (d * d) as u32;
        }
        total += acc as u64;
        if total > bound {
            return None;
        }
    }
    Some(total)
}

/// [`nearest_neighbor`] on byte images, with exact integer distances.
pub fn nearest_neighbor_u8(query: &[u8], train: &QuantizedImageSet) -> Result<(usize, u64)> {
    check_dim(train.dim(), query.len())?;
    if train.is_empty() {
        return Err(Error::EmptyDataset("nearest-neighbor reference set".into()));
    }
    let mut best = (0, squared_distance_u8(query, train.image(0)));
    for j in 1..train.len() {
        if let Some(d) = byte_distance_within(query, train.image(j), best.1) {
            if d < best.1 {
                best = (j, d);
            }
        }
    }
    Ok(best)
}

/// Clopper-Pearson interval for a binomial proportion at confidence
/// `level`, from Beta quantiles.
pub fn binomial_ci(successes: usize, n: usize, level: f64) -> Result<(f64, f64)> {
    if n == 0 || successes > n {
        return Err(Error::invalid("n", format!("need 0 <= successes <= n, n >= 1; got {successes}/{n}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", format!("must lie in (0, 1), got {level}")));
    }
    let tail = 0.5 * (1.0 - level);
    let (s, n) = (successes as f64, n as f64);
    let beta = |a: f64, b: f64| Beta::new(a, b).map_err(|e| Error::invalid("beta", e.to_string()));
    let low = if successes == 0 {
        0.0
    } else {
        beta(s, n - s + 1.0)?.inverse_cdf(tail)
    };
    let high = if s == n {
        1.0
    } else {
        beta(s + 1.0, n - s)?.inverse_cdf(1.0 - tail)
    };
    Ok((low.clamp(0.0, 1.0), high.clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionPoint {
    pub shift: usize,
    pub precision: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_queries: usize,
}

/// Nearest-neighbor precision of shifted windows against the unshifted
/// windows of every image.
///
/// `n_queries` source images are drawn without replacement from `seed`. A
/// query counts as correct when its nearest reference window belongs to its
/// own source image.
pub fn shift_precision_curve(
    images: &QuantizedImageSet,
    window: usize,
    shifts: &[usize],
    n_queries: usize,
    seed: Seed,
    level: f64,
) -> Result<Vec<PrecisionPoint>> {
    if n_queries == 0 || n_queries > images.len() {
        return Err(Error::invalid(
            "n_queries",
            format!("need 1 <= n_queries <= {}, got {n_queries}", images.len()),
        ));
    }
    let reference = extract_shifted_windows(images, window, &[0])?.remove(0).windows;
    let mut picked = sample_indices(&mut seed.rng(), images.len(), n_queries).into_vec();
    picked.sort_unstable();
    let query_sets = extract_shifted_windows_for(images, window, shifts, &picked)?;
    query_sets
        .iter()
        .map(|set| {
            let hits = (0..set.len())
                .into_par_iter()
                .map(|q| Ok((nearest_neighbor_u8(set.windows.image(q), &reference)?.0 == set.source_indices[q]) as usize))
                .collect::<Result<Vec<usize>>>()?;
            let correct: usize = hits.iter().sum();
            let (ci_low, ci_high) = binomial_ci(correct, n_queries, level)?;
            Ok(PrecisionPoint {
                shift: set.shift,
                precision: correct as f64 / n_queries as f64,
                ci_low,
                ci_high,
                n_queries,
            })
        })
        .collect()
}
