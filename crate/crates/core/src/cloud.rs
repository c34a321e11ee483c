//! Dense point clouds stored row-major.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{FsascError, Result};

const UNIT_NORM_TOL: f64 = 1e-10;

/// `N` points in `R^D`, optionally carrying ground-truth labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    data: Vec<f64>,
    labels: Option<Vec<usize>>,
    unit_normalized: bool,
}

impl PointCloud {
    /// Builds a cloud from a list of rows. All rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| FsascError::contract("a point cloud needs at least one point"))?;
        let dim = first.len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(FsascError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(dim, data)
    }

    /// Builds a cloud from row-major data.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(FsascError::contract("ambient dimension must be positive"));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(FsascError::contract(format!(
                "{} values cannot be split into points of dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(FsascError::contract("point coordinates must be finite"));
        }
        Ok(Self {
            dim,
            data,
            labels: None,
            unit_normalized: false,
        })
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let (n, d) = m.shape();
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            data.extend(m.row(i).iter());
        }
        Self::from_flat(d, data)
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(FsascError::DimensionMismatch {
                expected: self.len(),
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn is_unit_normalized(&self) -> bool {
        self.unit_normalized
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// `N x D` matrix with one point per row.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.len(), self.dim, &self.data)
    }

    /// Returns a copy with every point scaled to unit Euclidean norm.
    ///
    /// Zero points cannot be normalized and are rejected.
    pub fn normalized(&self) -> Result<Self> {
        let mut data = self.data.clone();
        for (j, row) in data.chunks_exact_mut(self.dim).enumerate() {
            let norm = norm(row);
            if norm <= f64::MIN_POSITIVE {
                return Err(FsascError::contract(format!(
                    "point {j} is zero and cannot be normalized"
                )));
            }
            row.iter_mut().for_each(|v| *v /= norm);
        }
        Ok(Self {
            dim: self.dim,
            data,
            labels: self.labels.clone(),
            unit_normalized: true,
        })
    }

    /// Checks that every row has unit norm, without modifying anything.
    pub fn check_unit_norm(&self) -> Result<()> {
        for (j, p) in self.points().enumerate() {
            let n = norm(p);
            if (n - 1.0).abs() > UNIT_NORM_TOL {
                return Err(FsascError::contract(format!(
                    "point {j} has norm {n}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// Subset of points, keeping labels aligned.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &j in indices {
            data.extend_from_slice(self.point(j));
        }
        let mut out = Self::from_flat(self.dim, data)?;
        out.unit_normalized = self.unit_normalized;
        if let Some(l) = &self.labels {
            out.labels = Some(indices.iter().map(|&j| l[j]).collect());
        }
        Ok(out)
    }

    /// Applies `f` to every point, producing points of dimension `out_dim`.
    pub fn map_points(&self, out_dim: usize, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut data = Vec::with_capacity(self.len() * out_dim);
        for p in self.points() {
            let q = f(p);
            if q.len() != out_dim {
                return Err(FsascError::DimensionMismatch {
                    expected: out_dim,
                    got: q.len(),
                });
            }
            data.extend(q);
        }
        let mut out = Self::from_flat(out_dim, data)?;
        out.labels = self.labels.clone();
        Ok(out)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
