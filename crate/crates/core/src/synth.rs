//! Random unions of linear subspaces with orthogonal Gaussian noise.
//!
//! Every subspace `i` draws from its own ChaCha8 streams of the seed:
//! stream `3i` for the basis, `3i + 1` for the point coefficients and
//! `3i + 2` for the noise. Adding a subspace, or changing the noise level,
//! leaves the earlier draws untouched.

use log::warn;
use nalgebra::{DMatrix, DVector, QR};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{FsascError, Result};

/// Principal angles below this (beyond the forced intersection) trigger a warning.
const MIN_PRINCIPAL_ANGLE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub ambient_dim: usize,
    pub dims: Vec<usize>,
    pub points_per_subspace: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ambient_dim < 2 {
            return Err(FsascError::contract("ambient dimension must be at least 2"));
        }
        if self.dims.is_empty() {
            return Err(FsascError::contract("at least one subspace is required"));
        }
        for &d in &self.dims {
            if d == 0 || d >= self.ambient_dim {
                return Err(FsascError::contract(format!(
                    "subspace dimension {d} must lie in [1, {})",
                    self.ambient_dim
                )));
            }
            if self.points_per_subspace < d {
                return Err(FsascError::contract(format!(
                    "{} points cannot identify a {d}-dimensional subspace",
                    self.points_per_subspace
                )));
            }
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(FsascError::contract("noise sigma must be a finite non-negative number"));
        }
        Ok(())
    }
}

/// A sampled cloud with its ground truth.
#[derive(Debug, Clone)]
pub struct LabeledCloud {
    /// Carries the labels as well.
    pub points: PointCloud,
    pub labels: Vec<usize>,
    /// `D x d_i` orthonormal basis per subspace.
    pub bases: Vec<DMatrix<f64>>,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}

fn gaussian_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // fill column by column so the draw order is fixed
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(r))
}

/// Orthonormal bases of random subspaces: the Q factor of a standard
/// Gaussian `D x d_i` matrix.
pub fn random_subspaces(ambient: usize, dims: &[usize], seed: u64) -> Result<Vec<DMatrix<f64>>> {
    let mut out = Vec::with_capacity(dims.len());
    for (i, &d) in dims.iter().enumerate() {
        if d == 0 || d >= ambient {
            return Err(FsascError::contract(format!(
                "subspace dimension {d} must lie in [1, {ambient})"
            )));
        }
        let g = gaussian_matrix(&mut stream(seed, 3 * i as u64), ambient, d);
        out.push(QR::new(g).q());
    }
    warn_if_degenerate(&out, ambient);
    Ok(out)
}

/// Warns when two subspaces are closer than their dimensions force them to be.
fn warn_if_degenerate(bases: &[DMatrix<f64>], ambient: usize) {
    for i in 0..bases.len() {
        for j in i + 1..bases.len() {
            let (di, dj) = (bases[i].ncols(), bases[j].ncols());
            let forced = (di + dj).saturating_sub(ambient);
            let m = bases[i].transpose() * &bases[j];
            let mut cosines: Vec<f64> = m.singular_values().iter().copied().collect();
            cosines.sort_by(|a, b| b.total_cmp(a));
            if let Some(&c) = cosines.get(forced) {
                let angle = c.clamp(-1.0, 1.0).acos();
                if angle < MIN_PRINCIPAL_ANGLE {
                    warn!("subspaces {i} and {j} are nearly non-transversal (angle {angle:e})");
                }
            }
        }
    }
}

/// Samples unit points uniformly on each subspace's sphere and adds noise
/// confined to the subspace's orthogonal complement. Points are not
/// re-normalized after the noise is added.
pub fn sample_cloud(cfg: &SynthConfig) -> Result<LabeledCloud> {
    cfg.validate()?;
    let ambient = cfg.ambient_dim;
    let bases = random_subspaces(ambient, &cfg.dims, cfg.seed)?;
    let total = cfg.dims.len() * cfg.points_per_subspace;
    let mut data = Vec::with_capacity(total * ambient);
    let mut labels = Vec::with_capacity(total);

    for (i, basis) in bases.iter().enumerate() {
        let d = basis.ncols();
        let mut coef_rng = stream(cfg.seed, 3 * i as u64 + 1);
        let mut noise_rng = stream(cfg.seed, 3 * i as u64 + 2);
        let complement = DMatrix::<f64>::identity(ambient, ambient) - basis * basis.transpose();
        for _ in 0..cfg.points_per_subspace {
            let coef = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut coef_rng));
            let mut x = basis * coef;
            let n = x.norm();
            if n > 0.0 {
                x /= n;
            }
            if cfg.noise_sigma > 0.0 {
                let g = DVector::from_fn(ambient, |_, _| {
                    let z: f64 = StandardNormal.sample(&mut noise_rng);
                    cfg.noise_sigma * z
                });
                x += &complement * g;
            }
            data.extend(x.iter());
            labels.push(i);
        }
    }

    let points = PointCloud::from_flat(ambient, data)?.with_labels(labels.clone())?;
    Ok(LabeledCloud {
        points,
        labels,
        bases,
    })
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    config: SynthConfig,
    labels: Vec<usize>,
    /// Basis vectors of each subspace, one inner list per vector.
    bases: Vec<Vec<Vec<f64>>>,
}

impl LabeledCloud {
    /// JSON description of the ground truth: config, labels and bases.
    pub fn sidecar_json(&self, cfg: &SynthConfig) -> Result<String> {
        let bases = self
            .bases
            .iter()
            .map(|b| b.column_iter().map(|c| c.iter().copied().collect()).collect())
            .collect();
        Ok(serde_json::to_string_pretty(&Sidecar {
            config: cfg.clone(),
            labels: self.labels.clone(),
            bases,
        })?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dims: &[usize], sigma: f64, seed: u64) -> SynthConfig {
        SynthConfig {
            ambient_dim: 5,
            dims: dims.to_vec(),
            points_per_subspace: 100,
            noise_sigma: sigma,
            seed,
        }
    }

    #[test]
    fn bases_are_orthonormal_and_deterministic() {
        let b = random_subspaces(5, &[4, 4, 4], 3).unwrap();
        assert_eq!(b.len(), 3);
        for m in &b {
            assert_eq!(m.shape(), (5, 4));
            let gram = m.transpose() * m;
            assert!((gram - DMatrix::<f64>::identity(4, 4)).amax() < 1e-12);
        }
        let again = random_subspaces(5, &[4, 4, 4], 3).unwrap();
        assert_eq!(b, again);
        let line = random_subspaces(2, &[1], 0).unwrap();
        assert!((line[0].norm() - 1.0).abs() < 1e-15);
        assert!(random_subspaces(5, &[5], 0).is_err());
    }

    #[test]
    fn adding_a_subspace_keeps_earlier_ones() {
        let a = random_subspaces(5, &[2, 3], 9).unwrap();
        let b = random_subspaces(5, &[2, 3, 1], 9).unwrap();
        assert_eq!(a[..], b[..2]);
    }

    #[test]
    fn noiseless_points_lie_on_their_subspace() {
        let c = sample_cloud(&cfg(&[1, 2, 3], 0.0, 4)).unwrap();
        assert_eq!(c.points.len(), 300);
        for (j, x) in c.points.points().enumerate() {
            let b = &c.bases[c.labels[j]];
            let x = DVector::from_column_slice(x);
            let resid = &x - b * (b.transpose() * &x);
            assert!(resid.norm() <= 1e-12);
            assert!((x.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn noise_is_orthogonal_and_has_the_right_scale() {
        let clean = sample_cloud(&cfg(&[4], 0.0, 6)).unwrap();
        let mut noisy_cfg = cfg(&[4], 0.05, 6);
        noisy_cfg.points_per_subspace = 10_000;
        let mut clean_cfg = noisy_cfg.clone();
        clean_cfg.noise_sigma = 0.0;
        let noisy = sample_cloud(&noisy_cfg).unwrap();
        let clean_big = sample_cloud(&clean_cfg).unwrap();
        assert_eq!(clean.bases, noisy.bases);

        let b = &noisy.bases[0];
        // unit normal of the hyperplane: project e_k off the basis
        let normal: Vec<f64> = (0..5)
            .map(|k| {
                let e = DVector::from_fn(5, |i, _| f64::from(u8::from(i == k)));
                &e - b * (b.transpose() * &e)
            })
            .max_by(|a, c| a.norm().total_cmp(&c.norm()))
            .map(|v| v.normalize().iter().copied().collect())
            .unwrap();

        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for (xn, xc) in noisy.points.points().zip(clean_big.points.points()) {
            let diff = DVector::from_iterator(5, xn.iter().zip(xc).map(|(a, c)| a - c));
            let inside = b.transpose() * &diff;
            assert!(inside.norm() <= 1e-12);
            let along: f64 = diff.iter().zip(&normal).map(|(a, c)| a * c).sum();
            assert!((along.abs() - diff.norm()).abs() <= 1e-12);
            sum += along;
            sum_sq += along * along;
        }
        let n = 10_000.0;
        let std = (sum_sq / n - (sum / n).powi(2)).sqrt();
        assert!((std - 0.05).abs() <= 0.15 * 0.05, "std {std}");
    }

    #[test]
    fn config_validation() {
        assert!(sample_cloud(&cfg(&[5], 0.0, 0)).is_err());
        let mut c = cfg(&[3], 0.0, 0);
        c.points_per_subspace = 2;
        assert!(sample_cloud(&c).is_err());
        assert!(sample_cloud(&cfg(&[2], -1.0, 0)).is_err());
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = sample_cloud(&cfg(&[2, 2, 2], 0.03, 11)).unwrap();
        let b = sample_cloud(&cfg(&[2, 2, 2], 0.03, 11)).unwrap();
        assert_eq!(a.points, b.points);
        let c = sample_cloud(&cfg(&[2, 2, 2], 0.03, 12)).unwrap();
        assert_ne!(a.points, c.points);
    }
}
