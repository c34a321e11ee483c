//! Lloyd's k-means with greedy k-means++ seeding and seeded restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when the relative inertia decrease falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            restarts: 50,
            max_iter: 300,
            tol: 1e-9,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Clusters the row-major `data` (rows of length `dim`) into `k` groups and
/// keeps the lowest-inertia run. Each restart draws from its own ChaCha
/// stream of `seed`, so the result does not depend on restart scheduling.
pub fn kmeans(data: &[f64], dim: usize, k: usize, cfg: &KMeansConfig) -> KMeansResult {
    let n = data.len() / dim;
    assert!(k >= 1 && k <= n, "k-means needs 1 <= k <= n");
    let mut best: Option<KMeansResult> = None;
    for restart in 0..cfg.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(restart as u64);
        let centers = greedy_plus_plus(data, dim, k, &mut rng);
        let run = lloyd(data, dim, centers, cfg);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    best.expect("at least one restart")
}

fn greedy_plus_plus(data: &[f64], dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = data.len() / dim;
    let row = |i: usize| &data[i * dim..(i + 1) * dim];
    let trials = 2 + (k as f64).ln().floor() as usize;

    let first = rng.random_range(0..n);
    let mut centers = row(first).to_vec();
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(row(i), row(first))).collect();

    for _ in 1..k {
        let potential: f64 = closest.iter().sum();
        let mut best_cand = None;
        let mut best_pot = f64::INFINITY;
        let mut best_closest = Vec::new();
        for _ in 0..trials {
            let cand = if potential > 0.0 {
                sample_weighted(&closest, potential, rng)
            } else {
                rng.random_range(0..n)
            };
            let updated: Vec<f64> = (0..n)
                .map(|i| closest[i].min(sq_dist(row(i), row(cand))))
                .collect();
            let pot: f64 = updated.iter().sum();
            if pot < best_pot {
                best_pot = pot;
                best_cand = Some(cand);
                best_closest = updated;
            }
        }
        let c = best_cand.expect("at least one candidate");
        centers.extend_from_slice(row(c));
        closest = best_closest;
    }
    centers
}

fn sample_weighted(weights: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if acc > target {
            return i;
        }
    }
    // rounding left the target past the last positive weight
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

fn lloyd(data: &[f64], dim: usize, mut centers: Vec<f64>, cfg: &KMeansConfig) -> KMeansResult {
    let n = data.len() / dim;
    let k = centers.len() / dim;
    let row = |i: usize| &data[i * dim..(i + 1) * dim];
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut prev = f64::INFINITY;
    let mut inertia = f64::INFINITY;

    for _ in 0..cfg.max_iter {
        inertia = 0.0;
        for i in 0..n {
            let (mut bl, mut bd) = (0, f64::INFINITY);
            for c in 0..k {
                let d = sq_dist(row(i), &centers[c * dim..(c + 1) * dim]);
                if d < bd {
                    bl = c;
                    bd = d;
                }
            }
            labels[i] = bl;
            dists[i] = bd;
            inertia += bd;
        }

        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (s, v) in sums[labels[i] * dim..(labels[i] + 1) * dim].iter_mut().zip(row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // re-seed an empty cluster at the worst-served point
                let far = (0..n)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]))
                    .expect("non-empty data");
                dists[far] = 0.0;
                centers[c * dim..(c + 1) * dim].copy_from_slice(row(far));
            } else {
                for d in 0..dim {
                    centers[c * dim + d] = sums[c * dim + d] / counts[c] as f64;
                }
            }
        }

        if prev.is_finite() && prev - inertia <= cfg.tol * prev.max(f64::MIN_POSITIVE) {
            break;
        }
        prev = inertia;
    }
    KMeansResult { labels, inertia }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_groups() {
        let data = [0.0, 0.0, 0.1, 0.0, 5.0, 5.0, 5.1, 5.0, -5.0, 5.0, -5.1, 5.0];
        let r = kmeans(&data, 2, 3, &KMeansConfig::with_seed(3));
        assert_eq!(r.labels[0], r.labels[1]);
        assert_eq!(r.labels[2], r.labels[3]);
        assert_eq!(r.labels[4], r.labels[5]);
        assert_ne!(r.labels[0], r.labels[2]);
        assert_ne!(r.labels[2], r.labels[4]);
        assert!(r.inertia < 0.1);
    }

    #[test]
    fn deterministic_for_seed() {
        let data: Vec<f64> = (0..60).map(|i| ((i * 37) % 11) as f64).collect();
        let a = kmeans(&data, 3, 4, &KMeansConfig::with_seed(9));
        let b = kmeans(&data, 3, 4, &KMeansConfig::with_seed(9));
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn duplicate_points() {
        let data = [1.0; 8];
        let r = kmeans(&data, 2, 2, &KMeansConfig::with_seed(0));
        assert_eq!(r.labels.len(), 4);
        assert_eq!(r.inertia, 0.0);
    }
}
