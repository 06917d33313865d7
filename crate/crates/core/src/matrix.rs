use crate::error::{Error, Result};

/// Row-major `N x D` block of real observations.
///
/// Rows are samples, columns are dimensions. An optional value range records
/// where the data is known to live (for example `(0, 1)` after rescaling
/// dequantized pixels); when present every entry lies inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    value_range: Option<(f64, f64)>,
}

impl SampleMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(
                "shape",
                format!("need at least one row and one column, got {rows}x{cols}"),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(
                "data",
                format!("length {} does not match {rows}x{cols}", data.len()),
            ));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "data",
                format!("non-finite entry at row {}, column {}", i / cols, i % cols),
            ));
        }
        Ok(SampleMatrix {
            data,
            rows,
            cols,
            value_range: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::invalid(
                    "rows",
                    format!("row {i} has {} entries, expected {cols}", r.len()),
                ));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Single column built from scalars.
    pub fn column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    /// Attach range metadata, checking every entry lies in `[lo, hi]`.
    pub fn with_value_range(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::invalid("value_range", format!("need lo < hi, got ({lo}, {hi})")));
        }
        if let Some(v) = self.data.iter().find(|v| **v < lo || **v > hi) {
            return Err(Error::invalid(
                "value_range",
                format!("entry {v} outside [{lo}, {hi}]"),
            ));
        }
        self.value_range = Some((lo, hi));
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn value_range(&self) -> Option<(f64, f64)> {
        self.value_range
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Rows at `indices`, in that order. Range metadata is kept.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::invalid("indices", format!("row {i} out of {}", self.rows)));
            }
            data.extend_from_slice(self.row(i));
        }
        let mut out = Self::new(indices.len(), self.cols, data)?;
        out.value_range = self.value_range;
        Ok(out)
    }

    /// Split into the first `n` rows and the rest.
    pub fn split_at(&self, n: usize) -> Result<(Self, Self)> {
        let head: Vec<usize> = (0..n).collect();
        let tail: Vec<usize> = (n..self.rows).collect();
        Ok((self.select_rows(&head)?, self.select_rows(&tail)?))
    }

    /// Stack rows of several matrices with equal column counts.
    pub fn vstack(parts: &[&SampleMatrix]) -> Result<Self> {
        let cols = parts.first().map_or(0, |m| m.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for m in parts {
            crate::error::check_dim(cols, m.cols)?;
            data.extend_from_slice(&m.data);
            rows += m.rows;
        }
        Self::new(rows, cols, data)
    }

    /// Per-column mean.
    pub fn column_means(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in self.iter_rows() {
            for (o, v) in out.iter_mut().zip(r) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|o| *o /= self.rows as f64);
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }
}
