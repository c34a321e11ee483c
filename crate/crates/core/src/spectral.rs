//! Normalized graph Laplacian, eigengap scoring, and spectral clustering.
//!
//! The Laplacian is the symmetric normalization `I - D^-1/2 W D^-1/2`.
//! Vertices whose degree is at most [`ISOLATED_DEGREE`] get an identity
//! row and column, which keeps the spectrum inside `[0, 2]` when a whole
//! affinity row is zero.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{FsascError, Result};
use crate::kmeans::{kmeans, KMeansConfig};

pub const ISOLATED_DEGREE: f64 = 1e-12;
const NEGATIVE_TOL: f64 = 1e-12;

/// Eigenvalues of the normalized Laplacian in increasing order, and the
/// eigenvectors of the `k` smallest.
#[derive(Debug, Clone)]
pub struct LaplacianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

fn check_affinity(w: &DMatrix<f64>) -> Result<()> {
    if !w.is_square() {
        return Err(FsascError::contract("affinity matrix must be square"));
    }
    if let Some(v) = w.iter().find(|&&v| v < -NEGATIVE_TOL || v.is_nan()) {
        return Err(FsascError::contract(format!(
            "affinity has an invalid entry {v}"
        )));
    }
    Ok(())
}

pub fn normalized_laplacian(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_affinity(w)?;
    let n = w.nrows();
    let inv_sqrt: Vec<Option<f64>> = (0..n)
        .map(|i| {
            let deg: f64 = w.row(i).iter().map(|v| v.max(0.0)).sum();
            (deg > ISOLATED_DEGREE).then(|| 1.0 / deg.sqrt())
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let base = if i == j { 1.0 } else { 0.0 };
        match (inv_sqrt[i], inv_sqrt[j]) {
            (Some(a), Some(b)) => base - a * w[(i, j)].max(0.0) * b,
            _ => base,
        }
    }))
}

fn eigen(l: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let n = l.nrows();
    SymmetricEigen::try_new(l, f64::EPSILON, 0).ok_or_else(|| {
        FsascError::numerical(format!("symmetric eigensolver failed on a {n}x{n} Laplacian"))
    })
}

/// Sorted spectrum of the normalized Laplacian of `w`.
pub fn laplacian_eigenvalues(w: &DMatrix<f64>) -> Result<Vec<f64>> {
    let l = normalized_laplacian(w)?;
    let n = l.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut ev: Vec<f64> = l.symmetric_eigenvalues().iter().copied().collect();
    if ev.iter().any(|v| !v.is_finite()) {
        return Err(FsascError::numerical(format!(
            "non-finite eigenvalue of a {n}x{n} Laplacian"
        )));
    }
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Full sorted spectrum plus the eigenvectors of the `k` smallest eigenvalues.
pub fn laplacian_spectrum(w: &DMatrix<f64>, k: usize) -> Result<LaplacianSpectrum> {
    let l = normalized_laplacian(w)?;
    let n = l.nrows();
    if k > n {
        return Err(FsascError::contract(format!(
            "requested {k} eigenvectors of a {n}-vertex graph"
        )));
    }
    let eig = eigen(l)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, k, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(LaplacianSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// `lambda_{n+1} - lambda_n` with eigenvalues in increasing order.
pub fn eigengap_from_spectrum(eigenvalues: &[f64], n: usize) -> Result<f64> {
    if n == 0 || eigenvalues.len() <= n {
        return Err(FsascError::contract(format!(
            "eigengap after {n} eigenvalues needs more than {n} vertices, got {}",
            eigenvalues.len()
        )));
    }
    Ok(eigenvalues[n] - eigenvalues[n - 1])
}

pub fn eigengap_score(w: &DMatrix<f64>, n: usize) -> Result<f64> {
    if w.nrows() <= n {
        return Err(FsascError::contract(format!(
            "eigengap after {n} eigenvalues needs more than {n} vertices"
        )));
    }
    eigengap_from_spectrum(&laplacian_eigenvalues(w)?, n)
}

/// Normalized spectral clustering into `n` groups.
///
/// Embeds each vertex by the `n` lowest Laplacian eigenvectors, scales the
/// embedded rows to unit norm, then runs k-means.
pub fn spectral_cluster(w: &DMatrix<f64>, n: usize, seed: u64) -> Result<Vec<usize>> {
    let size = w.nrows();
    if n == 0 || size < n {
        return Err(FsascError::contract(format!(
            "cannot split {size} vertices into {n} clusters"
        )));
    }
    check_affinity(w)?;
    if n == 1 {
        return Ok(vec![0; size]);
    }
    let spec = laplacian_spectrum(w, n)?;
    let mut rows = vec![0.0; size * n];
    for (i, row) in rows.chunks_exact_mut(n).enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = spec.eigenvectors[(i, c)];
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            row.iter_mut().for_each(|v| *v /= norm);
        } else {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    Ok(kmeans(&rows, n, n, &KMeansConfig::with_seed(seed)).labels)
}
