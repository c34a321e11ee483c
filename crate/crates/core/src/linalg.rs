use nalgebra::{DMatrix, SVD};

use crate::error::{FsascError, Result};

/// Right singular vectors of `a`, as columns of a full `M x M` matrix, with
/// singular values sorted in decreasing order. Wide inputs are padded with
/// zero rows so that the complete right basis is always returned.
pub(crate) struct RightSvd {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub(crate) fn right_svd(a: &DMatrix<f64>) -> Result<RightSvd> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Err(FsascError::contract("SVD of an empty matrix"));
    }
    let padded;
    let m = if rows < cols {
        padded = a.clone().resize_vertically(cols, 0.0);
        &padded
    } else {
        a
    };
    let svd = SVD::try_new(m.clone(), false, true, f64::EPSILON, 0).ok_or_else(|| {
        FsascError::numerical(format!("SVD of a {rows}x{cols} matrix did not converge"))
    })?;
    let v_t = svd
        .v_t
        .ok_or_else(|| FsascError::numerical("SVD returned no right singular vectors"))?;
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = DMatrix::from_fn(cols, cols, |r, c| v_t[(order[c], r)]);
    Ok(RightSvd { values, vectors })
}

/// Number of singular values above `rel_tol * sigma_max`.
pub(crate) fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> Result<usize> {
    let svd = right_svd(a)?;
    let max = svd.values.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return Ok(0);
    }
    Ok(svd.values.iter().filter(|&&s| s > rel_tol * max).count())
}
