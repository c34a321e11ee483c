//! Projection of raw data onto its leading right singular vectors.
//!
//! No mean is subtracted: the data model is a union of linear subspaces,
//! and centering would break the homogeneous structure.

use log::warn;

use crate::cloud::PointCloud;
use crate::error::{FsascError, Result};
use crate::linalg::right_svd;
use crate::poly::monomial_count;

/// Largest projection dimension considered by [`auto_target_dim`].
pub const MAX_AUTO_DIM: usize = 8;
const RANK_TOL: f64 = 1e-10;

/// Largest `D' <= min(8, max_dim)` with `M_n(D') <= points`.
pub fn auto_target_dim(n: usize, points: usize, max_dim: usize) -> Result<usize> {
    let mut best = None;
    for d in 2..=MAX_AUTO_DIM.min(max_dim) {
        if monomial_count(d, n)? <= points {
            best = Some(d);
        }
    }
    best.ok_or_else(|| {
        FsascError::contract(format!(
            "{points} points are too few for degree {n} even in R^2"
        ))
    })
}

/// Projects onto the top `target_dim` right singular vectors of `x` and
/// unit-normalizes each projected point. Labels are kept.
pub fn pca_project(x: &PointCloud, target_dim: usize) -> Result<PointCloud> {
    if target_dim < 2 || target_dim > x.dim().min(x.len()) {
        return Err(FsascError::contract(format!(
            "target dimension {target_dim} must lie in [2, min(N, D)] = [2, {}]",
            x.dim().min(x.len())
        )));
    }
    let svd = right_svd(&x.to_matrix())?;
    let top = svd.values.first().copied().unwrap_or(0.0);
    let rank = svd.values.iter().filter(|&&s| s > RANK_TOL * top).count();
    if rank < target_dim {
        warn!("data have rank {rank}, below the requested {target_dim} components");
    }
    let v = svd.vectors.columns(0, target_dim);
    let projected = x.map_points(target_dim, |p| {
        (0..target_dim)
            .map(|c| v.column(c).iter().zip(p).map(|(a, b)| a * b).sum())
            .collect()
    })?;
    projected.normalized()
}
