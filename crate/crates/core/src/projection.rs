//! Orthogonal projections onto hyperplanes, expressed in complement coordinates.

use serde::{Deserialize, Serialize};

use crate::cloud::{dot, norm};
use crate::error::{FsascError, Result};

const MIN_NORMAL_NORM: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-12;

/// `pi: R^d -> H = <b>^perp ~= R^(d-1)`.
///
/// The rows of `basis` are an orthonormal basis of `H`, so applying the
/// projection is a single `(d-1) x d` matrix-vector product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneProjection {
    normal: Vec<f64>,
    basis: Vec<f64>,
}

impl HyperplaneProjection {
    /// Builds the projection from a Householder reflector keyed to the
    /// largest-magnitude entry of the normal. The reflector maps `b` to
    /// `-sign(b_k) e_k`; dropping row `k` leaves a basis of `b^perp`.
    pub fn new(normal: &[f64]) -> Result<Self> {
        let d = normal.len();
        if d < 2 {
            return Err(FsascError::contract(
                "hyperplane projections need input dimension >= 2",
            ));
        }
        let n = norm(normal);
        if !(n > MIN_NORMAL_NORM) {
            return Err(FsascError::contract(format!(
                "hyperplane normal has norm {n:e}"
            )));
        }
        let b: Vec<f64> = normal.iter().map(|v| v / n).collect();
        let (k, bk) = b
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, v)| if v.abs() > acc.1.abs() { (i, v) } else { acc });
        let s = if bk >= 0.0 { 1.0 } else { -1.0 };
        let mut v = b.clone();
        v[k] += s;
        let scale = 1.0 / (1.0 + bk.abs());

        let mut basis = Vec::with_capacity((d - 1) * d);
        for i in (0..d).filter(|&i| i != k) {
            let f = v[i] * scale;
            basis.extend((0..d).map(|j| f64::from(u8::from(i == j)) - f * v[j]));
        }
        Ok(Self { normal: b, basis })
    }

    /// Uses a caller-supplied complement basis, row-major `(d-1) x d`.
    pub fn with_basis(normal: &[f64], basis: Vec<f64>) -> Result<Self> {
        let d = normal.len();
        if d < 2 || basis.len() != (d - 1) * d {
            return Err(FsascError::contract("complement basis has the wrong shape"));
        }
        let n = norm(normal);
        if !(n > MIN_NORMAL_NORM) {
            return Err(FsascError::contract("near-zero hyperplane normal"));
        }
        let b: Vec<f64> = normal.iter().map(|v| v / n).collect();
        let rows: Vec<&[f64]> = basis.chunks_exact(d).collect();
        for (i, r) in rows.iter().enumerate() {
            if dot(r, &b).abs() > 1e-10 {
                return Err(FsascError::contract("basis row is not orthogonal to the normal"));
            }
            for (j, s) in rows.iter().enumerate().skip(i) {
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot(r, s) - want).abs() > 1e-10 {
                    return Err(FsascError::contract("basis rows are not orthonormal"));
                }
            }
        }
        Ok(Self { normal: b, basis })
    }

    pub fn input_dim(&self) -> usize {
        self.normal.len()
    }

    pub fn output_dim(&self) -> usize {
        self.normal.len() - 1
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn basis_row(&self, i: usize) -> &[f64] {
        let d = self.input_dim();
        &self.basis[i * d..(i + 1) * d]
    }

    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.input_dim() {
            return Err(FsascError::DimensionMismatch {
                expected: self.input_dim(),
                got: y.len(),
            });
        }
        Ok(self.apply_unchecked(y))
    }

    pub(crate) fn apply_unchecked(&self, y: &[f64]) -> Vec<f64> {
        self.basis
            .chunks_exact(self.input_dim())
            .map(|row| dot(row, y))
            .collect()
    }

    /// Checks the orthonormality invariants at the stated tolerance.
    pub fn is_valid(&self) -> bool {
        let d = self.input_dim();
        (0..d - 1).all(|i| {
            let r = self.basis_row(i);
            dot(r, &self.normal).abs() <= ORTHO_TOL
                && (i..d - 1).all(|j| {
                    let want = if i == j { 1.0 } else { 0.0 };
                    (dot(r, self.basis_row(j)) - want).abs() <= ORTHO_TOL
                })
        })
    }
}

pub fn make_projection(normal: &[f64]) -> Result<HyperplaneProjection> {
    HyperplaneProjection::new(normal)
}

pub fn apply(p: &HyperplaneProjection, y: &[f64]) -> Result<Vec<f64>> {
    p.apply(y)
}

/// `pi_k o ... o pi_1`, each step one dimension lower than the last.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectionChain {
    steps: Vec<HyperplaneProjection>,
}

impl ProjectionChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step: HyperplaneProjection) -> Result<()> {
        if let Some(last) = self.steps.last() {
            if step.input_dim() != last.output_dim() {
                return Err(FsascError::DimensionMismatch {
                    expected: last.output_dim(),
                    got: step.input_dim(),
                });
            }
        }
        self.steps.push(step);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[HyperplaneProjection] {
        &self.steps
    }

    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.apply_prefix(y, self.steps.len())
    }

    /// Applies only the first `depth` steps.
    pub fn apply_prefix(&self, y: &[f64], depth: usize) -> Result<Vec<f64>> {
        let mut cur = y.to_vec();
        for s in self.steps.iter().take(depth) {
            cur = s.apply(&cur)?;
        }
        Ok(cur)
    }
}

pub fn apply_chain(c: &ProjectionChain, y: &[f64]) -> Result<Vec<f64>> {
    c.apply(y)
}
