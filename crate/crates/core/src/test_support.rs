//! Shared fixtures for unit tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cloud::PointCloud;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian_rows(r: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(r)).collect())
        .collect()
}

/// Unit points on two random lines through the origin of `R^2`.
pub(crate) fn lines_in_plane(r: &mut ChaCha8Rng, per_line: usize) -> PointCloud {
    let dirs = gaussian_rows(r, 2, 2);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (l, d) in dirs.iter().enumerate() {
        for _ in 0..per_line {
            let t: f64 = StandardNormal.sample(r);
            rows.push(vec![d[0] * t, d[1] * t]);
            labels.push(l);
        }
    }
    PointCloud::from_rows(&rows)
        .unwrap()
        .with_labels(labels)
        .unwrap()
        .normalized()
        .unwrap()
}
