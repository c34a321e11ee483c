//! Fitting vanishing polynomials to embedded data.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::cloud::{dot, PointCloud};
use crate::error::{FsascError, Result};
use crate::linalg::right_svd;
use crate::poly::{HomoPoly, MonomialBasis};

/// Singular values within this fraction of `sigma_max` of the smallest one
/// are treated as a tie.
pub const TIE_TOL: f64 = 1e-12;
/// Singular values at most this fraction of `sigma_max` span the numerical nullspace.
pub const NULL_TOL: f64 = 1e-8;
/// Gradients with norm at or below this are treated as zero.
pub const GRAD_ZERO_TOL: f64 = 1e-12;
/// Leading coefficients below this magnitude are skipped by the sign convention.
const SIGN_TOL: f64 = 1e-12;

/// The Veronese matrix `V_n(X)`, one embedded point per row.
#[derive(Debug, Clone)]
pub struct EmbeddedData {
    matrix: DMatrix<f64>,
    basis: Arc<MonomialBasis>,
}

impl EmbeddedData {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn basis(&self) -> &Arc<MonomialBasis> {
        &self.basis
    }
}

pub fn embed_data(x: &PointCloud, degree: usize) -> Result<EmbeddedData> {
    let basis = Arc::new(MonomialBasis::new(x.dim(), degree)?);
    embed_with_basis(x, basis)
}

/// Embeds `x` against a prebuilt basis.
pub fn embed_with_basis(x: &PointCloud, basis: Arc<MonomialBasis>) -> Result<EmbeddedData> {
    if x.dim() != basis.ambient_dim() {
        return Err(FsascError::DimensionMismatch {
            expected: basis.ambient_dim(),
            got: x.dim(),
        });
    }
    let m = basis.len();
    let mut rows = vec![0.0; x.len() * m];
    for (p, out) in x.points().zip(rows.chunks_exact_mut(m)) {
        basis.embed_into(p, out);
    }
    Ok(EmbeddedData {
        matrix: DMatrix::from_row_slice(x.len(), m, &rows),
        basis,
    })
}

/// Unit coefficient vector minimizing `||V_n(X) c||`: the right singular
/// vector of the smallest singular value.
pub fn fit_vanishing(e: &EmbeddedData) -> Result<HomoPoly> {
    fit_vanishing_at(e, None)
}

/// Like [`fit_vanishing`], but when the smallest singular value is repeated
/// the tied candidate with the largest gradient at `reference` wins.
pub fn fit_vanishing_at(e: &EmbeddedData, reference: Option<&[f64]>) -> Result<HomoPoly> {
    let m = e.basis.len();
    if m < 2 {
        return Err(FsascError::contract(
            "fitting a vanishing polynomial needs at least two monomials",
        ));
    }
    let svd = right_svd(&e.matrix)?;
    let sigma_max = svd.values[0];
    let sigma_min = svd.values[m - 1];
    let column = |k: usize| -> Vec<f64> { svd.vectors.column(k).iter().copied().collect() };

    let mut best = m - 1;
    if let Some(x) = reference {
        let tol = TIE_TOL * sigma_max;
        let mut best_norm = f64::NEG_INFINITY;
        // increasing singular value order, so ties fall back to the smallest one
        for k in (0..m).rev() {
            if svd.values[k] - sigma_min > tol {
                break;
            }
            let cand = HomoPoly::new(e.basis.clone(), column(k))?;
            let g = cand.grad(x)?;
            let gn = dot(&g, &g).sqrt();
            if gn > best_norm {
                best_norm = gn;
                best = k;
            }
        }
    }
    let mut c = column(best);
    canonical_sign(&mut c);
    HomoPoly::new(e.basis.clone(), c)
}

/// Flips `c` so its first non-negligible coefficient is positive.
fn canonical_sign(c: &mut [f64]) {
    if let Some(&lead) = c.iter().find(|v| v.abs() > SIGN_TOL) {
        if lead < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Orthonormal bases of the numerical right nullspaces of `V_m(X)` for
/// `m = 1..=max_degree`, concatenated by increasing degree.
pub fn null_candidates(x: &PointCloud, max_degree: usize) -> Result<Vec<HomoPoly>> {
    if max_degree == 0 {
        return Err(FsascError::contract("max_degree must be at least 1"));
    }
    let mut out = Vec::new();
    for degree in 1..=max_degree {
        let e = embed_data(x, degree)?;
        let svd = right_svd(&e.matrix)?;
        let cutoff = NULL_TOL * svd.values[0];
        for (k, &s) in svd.values.iter().enumerate() {
            if s <= cutoff {
                let mut c: Vec<f64> = svd.vectors.column(k).iter().copied().collect();
                canonical_sign(&mut c);
                out.push(HomoPoly::new(e.basis.clone(), c)?);
            }
        }
    }
    Ok(out)
}

/// Mean distance of each point to the hyperplane normal to `grad p` at that point.
pub fn beta_statistic(x: &PointCloud, p: &HomoPoly) -> Result<f64> {
    if p.is_zero() {
        return Err(FsascError::contract("beta statistic of the zero polynomial"));
    }
    if x.dim() != p.ambient_dim() {
        return Err(FsascError::DimensionMismatch {
            expected: p.ambient_dim(),
            got: x.dim(),
        });
    }
    let mut total = 0.0;
    for xj in x.points() {
        if let Some((g, _)) = p.unit_grad(xj, GRAD_ZERO_TOL)? {
            total += dot(xj, &g).abs();
        }
    }
    Ok(total / x.len() as f64)
}
