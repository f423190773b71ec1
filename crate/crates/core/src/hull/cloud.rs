use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n × d` point set stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
}

impl PointCloud {
    pub fn new(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be ≥ 1"));
        }
        if coords.is_empty() {
            return Err(Error::EmptySample);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} coordinates do not split into rows of length {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(PointCloud { coords, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().ok_or(Error::EmptySample)?.as_ref().len();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::new(coords, dim)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The first `m` rows, or `None` if `m` is zero or exceeds the size.
    pub fn prefix(&self, m: usize) -> Option<PointCloud> {
        (m >= 1 && m <= self.len()).then(|| PointCloud {
            coords: self.coords[..m * self.dim].to_vec(),
            dim: self.dim,
        })
    }

    /// Applies `x ↦ Ax + b` to every point; `matrix` is row-major `d × d`.
    pub fn affine_map(&self, matrix: &[f64], shift: &[f64]) -> Result<PointCloud> {
        let d = self.dim;
        if matrix.len() != d * d || shift.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: shift.len(),
            });
        }
        let mut coords = Vec::with_capacity(self.coords.len());
        for p in self.points() {
            for r in 0..d {
                let row = &matrix[r * d..(r + 1) * d];
                coords.push(row.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() + shift[r]);
            }
        }
        PointCloud::new(coords, d)
    }
}
