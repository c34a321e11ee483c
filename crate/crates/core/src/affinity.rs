//! Single-polynomial spectral affinities.
//!
//! Both kinds use the unit-normalized gradient `g_j` of a fitted vanishing
//! polynomial at every point:
//!
//! * angle: `C_jj' = |<g_j, g_j'>|`
//! * distance: `D_jj' = 1 - |<g_j, x_j'>| / 2 - |<g_j', x_j>| / 2`
//!
//! Entries are clamped to `[0, 1]` and the diagonal is fixed at 1.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{dot, PointCloud};
use crate::error::{FsascError, Result};
use crate::poly::HomoPoly;
use crate::vanish::GRAD_ZERO_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffinityKind {
    Angle,
    Distance,
    Filtrated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    values: DMatrix<f64>,
    kind: AffinityKind,
}

impl AffinityMatrix {
    pub fn new(values: DMatrix<f64>, kind: AffinityKind) -> Result<Self> {
        if !values.is_square() {
            return Err(FsascError::contract("affinity matrix must be square"));
        }
        Ok(Self { values, kind })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn kind(&self) -> AffinityKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    /// `W + W^T`.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        &self.values + self.values.transpose()
    }

    /// Dense CSV, one matrix row per line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.len() {
            let line: Vec<String> = self.values.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

fn unit_gradients(x: &PointCloud, p: &HomoPoly) -> Result<Vec<Option<Vec<f64>>>> {
    if p.is_zero() {
        return Err(FsascError::contract("affinity from the zero polynomial"));
    }
    if x.dim() != p.ambient_dim() {
        return Err(FsascError::DimensionMismatch {
            expected: p.ambient_dim(),
            got: x.dim(),
        });
    }
    x.points()
        .map(|xj| Ok(p.unit_grad(xj, GRAD_ZERO_TOL)?.map(|(g, _)| g)))
        .collect()
}

fn build(n: usize, kind: AffinityKind, entry: impl Fn(usize, usize) -> f64 + Sync) -> AffinityMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { entry(i, j).clamp(0.0, 1.0) })
                .collect()
        })
        .collect();
    let values = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    AffinityMatrix { values, kind }
}

/// Absolute cosine between unit gradients (SASC-A).
pub fn angle_affinity(x: &PointCloud, p: &HomoPoly) -> Result<AffinityMatrix> {
    let g = unit_gradients(x, p)?;
    Ok(build(x.len(), AffinityKind::Angle, |i, j| match (&g[i], &g[j]) {
        (Some(a), Some(b)) => dot(a, b).abs(),
        _ => 0.0,
    }))
}

/// One minus the mean of the two point-to-hyperplane distances (SASC-D).
pub fn distance_affinity(x: &PointCloud, p: &HomoPoly) -> Result<AffinityMatrix> {
    let g = unit_gradients(x, p)?;
    let dist = |a: usize, b: usize| g[a].as_ref().map_or(0.0, |ga| dot(ga, x.point(b)).abs());
    Ok(build(x.len(), AffinityKind::Distance, |i, j| {
        1.0 - 0.5 * dist(i, j) - 0.5 * dist(j, i)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{gaussian_rows, lines_in_plane, rng};
    use crate::vanish::{embed_data, fit_vanishing};

    fn axes() -> (PointCloud, HomoPoly) {
        let x = PointCloud::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let p = HomoPoly::from_coeffs(2, 2, vec![0.0, 1.0, 0.0]).unwrap();
        (x, p)
    }

    #[test]
    fn two_axes() {
        let (x, p) = axes();
        let a = angle_affinity(&x, &p).unwrap();
        assert_eq!(a.values()[(0, 1)], 0.0);
        assert_eq!(a.values()[(0, 0)], 1.0);
        let d = distance_affinity(&x, &p).unwrap();
        assert_eq!(d.values()[(0, 1)], 0.0);
        assert_eq!(d.kind(), AffinityKind::Distance);
    }

    #[test]
    fn same_point_pairs() {
        let x = PointCloud::from_rows(&[vec![0.6, 0.8], vec![0.6, 0.8]]).unwrap();
        let p = HomoPoly::from_coeffs(2, 2, vec![0.0, 1.0, 0.0]).unwrap();
        assert!((angle_affinity(&x, &p).unwrap().values()[(0, 1)] - 1.0).abs() < 1e-15);
        // off the zero set: 1 - |<g, x>| = 1 - 2 p(x) / ||grad p||
        let g = p.unit_grad(x.point(0), 0.0).unwrap().unwrap().0;
        let want = 1.0 - dot(&g, x.point(0)).abs();
        assert!((distance_affinity(&x, &p).unwrap().values()[(0, 1)] - want).abs() < 1e-15);
    }

    #[test]
    fn same_line_pairs_are_one() {
        let x = lines_in_plane(&mut rng(7), 15);
        let p = fit_vanishing(&embed_data(&x, 2).unwrap()).unwrap();
        let labels = x.labels().unwrap();
        let d = distance_affinity(&x, &p).unwrap();
        let a = angle_affinity(&x, &p).unwrap();
        for i in 0..x.len() {
            for j in 0..x.len() {
                if labels[i] == labels[j] {
                    assert!(d.values()[(i, j)] >= 1.0 - 1e-10);
                    assert!(a.values()[(i, j)] >= 1.0 - 1e-8);
                }
            }
        }
    }

    #[test]
    fn csv_output() {
        let (x, p) = axes();
        let mut buf = Vec::new();
        angle_affinity(&x, &p).unwrap().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1,0\n0,1\n");
    }

    #[test]
    fn entries_stay_in_range() {
        let x = PointCloud::from_rows(&gaussian_rows(&mut rng(4), 40, 4))
            .unwrap()
            .normalized()
            .unwrap();
        let p = fit_vanishing(&embed_data(&x, 3).unwrap()).unwrap();
        for m in [angle_affinity(&x, &p).unwrap(), distance_affinity(&x, &p).unwrap()] {
            let v = m.values();
            assert!(v.iter().all(|&e| (0.0..=1.0).contains(&e)));
            assert!((v - v.transpose()).amax() <= 1e-12);
        }
    }
}
