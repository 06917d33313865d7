//! 8-bit image collections.
//!
//! Pixels of one image are stored row-major with channels interleaved:
//! index `(y * width + x) * channels + c`. Readers for planar formats
//! (CIFAR-10) convert to this layout on load.

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::SampleMatrix;
use crate::rng::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ImageGeometry {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl ImageGeometry {
    pub fn new(height: usize, width: usize, channels: usize) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::invalid(
                "geometry",
                format!("all extents must be positive, got {height}x{width}x{channels}"),
            ));
        }
        Ok(ImageGeometry {
            height,
            width,
            channels,
        })
    }

    pub fn dim(&self) -> usize {
        self.height * self.width * self.channels
    }
}

/// `N` images with values in `0..=255`, stored as one contiguous byte buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedImageSet {
    data: Vec<u8>,
    len: usize,
    geometry: ImageGeometry,
}

impl QuantizedImageSet {
    pub fn new(data: Vec<u8>, geometry: ImageGeometry) -> Result<Self> {
        let d = geometry.dim();
        if data.is_empty() {
            return Err(Error::EmptyDataset("no images".into()));
        }
        if data.len() % d != 0 {
            return Err(Error::invalid(
                "data",
                format!("length {} is not a multiple of image size {d}", data.len()),
            ));
        }
        Ok(QuantizedImageSet {
            len: data.len() / d,
            data,
            geometry,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn geometry(&self) -> ImageGeometry {
        self.geometry
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let d = self.dim();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, i: usize, y: usize, x: usize, c: usize) -> u8 {
        let g = self.geometry;
        self.image(i)[(y * g.width + x) * g.channels + c]
    }

    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.dim());
        for &i in indices {
            if i >= self.len {
                return Err(Error::invalid("indices", format!("image {i} out of {}", self.len)));
            }
            data.extend_from_slice(self.image(i));
        }
        Self::new(data, self.geometry)
    }

    /// The first `n` images (all of them if `n >= len`).
    pub fn head(&self, n: usize) -> Result<Self> {
        let n = n.min(self.len);
        Self::new(self.data[..n * self.dim()].to_vec(), self.geometry)
    }

    pub fn concat(parts: &[QuantizedImageSet]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::EmptyDataset("no image sets to concatenate".into()))?;
        let mut data = Vec::new();
        for p in parts {
            if p.geometry != first.geometry {
                return Err(Error::invalid("geometry", "cannot concatenate mixed geometries"));
            }
            data.extend_from_slice(&p.data);
        }
        Self::new(data, first.geometry)
    }

    /// Average channels per pixel, rounding to nearest (halves round up).
    pub fn to_grayscale(&self) -> Self {
        let c = self.geometry.channels;
        if c == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(c)
            .map(|px| {
                let s: u32 = px.iter().map(|&v| v as u32).sum();
                ((2 * s + c as u32) / (2 * c as u32)) as u8
            })
            .collect();
        QuantizedImageSet {
            data,
            len: self.len,
            geometry: ImageGeometry {
                channels: 1,
                ..self.geometry
            },
        }
    }

    /// Pixel values as reals, one image per row.
    pub fn to_sample_matrix(&self) -> Result<SampleMatrix> {
        SampleMatrix::new(self.len, self.dim(), self.data.iter().map(|&v| v as f64).collect())
    }

    /// Pixel values divided by `scale`, one image per row.
    pub fn to_scaled_matrix(&self, scale: f64) -> Result<SampleMatrix> {
        SampleMatrix::new(
            self.len,
            self.dim(),
            self.data.iter().map(|&v| v as f64 / scale).collect(),
        )
    }

    /// Smooth random test images: a random base level, a linear gradient and
    /// a low-frequency blob per channel plus a little pixel noise, rounded
    /// and clipped to `0..=255`. Stands in for natural images where a real
    /// dataset is not needed.
    pub fn synthetic(n: usize, geometry: ImageGeometry, seed: Seed) -> Result<Self> {
        let mut rng = seed.rng();
        let mut data = Vec::with_capacity(n * geometry.dim());
        let (h, w) = (geometry.height as f64, geometry.width as f64);
        for _ in 0..n {
            let base: f64 = rng.random_range(40.0..200.0);
            let gy: f64 = rng.random_range(-60.0..60.0);
            let gx: f64 = rng.random_range(-60.0..60.0);
            let (cy, cx): (f64, f64) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            let amp: f64 = rng.random_range(-50.0..50.0);
            let tint: Vec<f64> = (0..geometry.channels)
                .map(|_| rng.random_range(-15.0..15.0))
                .collect();
            for y in 0..geometry.height {
                for x in 0..geometry.width {
                    let (fy, fx) = (y as f64 / h, x as f64 / w);
                    let r2 = (fy - cy).powi(2) + (fx - cx).powi(2);
                    let v = base + gy * (fy - 0.5) + gx * (fx - 0.5) + amp * (-r2 / 0.08).exp();
                    for t in &tint {
                        let noise: f64 = rng.random_range(-4.0..4.0);
                        data.push((v + t + noise).round().clamp(0.0, 255.0) as u8);
                    }
                }
            }
        }
        Self::new(data, geometry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_and_indexing() {
        let g = ImageGeometry::new(2, 2, 3).unwrap();
        let data: Vec<u8> = (0..24).collect();
        let set = QuantizedImageSet::new(data, g).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.pixel(1, 1, 0, 2), 12 + (2 * 3) + 2);
        assert!(QuantizedImageSet::new(vec![0; 5], g).is_err());
        assert!(ImageGeometry::new(0, 1, 1).is_err());
    }

    #[test]
    fn grayscale_rounds_to_nearest() {
        let g = ImageGeometry::new(1, 2, 3).unwrap();
        let set = QuantizedImageSet::new(vec![0, 0, 1, 0, 1, 1], g).unwrap();
        // 1/3 -> 0, 2/3 -> 1
        assert_eq!(set.to_grayscale().as_bytes(), &[0, 1]);
        let set = QuantizedImageSet::new(vec![255, 255, 254, 10, 11, 12], g).unwrap();
        assert_eq!(set.to_grayscale().as_bytes(), &[255, 11]);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let g = ImageGeometry::new(8, 8, 3).unwrap();
        let a = QuantizedImageSet::synthetic(4, g, Seed(1)).unwrap();
        assert_eq!(a, QuantizedImageSet::synthetic(4, g, Seed(1)).unwrap());
        assert_ne!(a, QuantizedImageSet::synthetic(4, g, Seed(2)).unwrap());
    }
}
