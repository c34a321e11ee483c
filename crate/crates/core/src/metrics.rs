//! Clustering error and affinity connectivity diagnostics.

use std::io::Write;

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{FsascError, Result};
use crate::spectral::{laplacian_eigenvalues, ISOLATED_DEGREE};

/// Largest cluster count solved by exhaustive permutation search.
const EXACT_SEARCH_MAX: usize = 8;

fn confusion(pred: &[usize], truth: &[usize], n: usize) -> Result<Vec<Vec<u64>>> {
    if pred.len() != truth.len() {
        return Err(FsascError::contract(format!(
            "label vectors differ in length ({} vs {})",
            pred.len(),
            truth.len()
        )));
    }
    if n == 0 {
        return Err(FsascError::contract("number of clusters must be positive"));
    }
    let mut m = vec![vec![0u64; n]; n];
    for (&p, &t) in pred.iter().zip(truth) {
        if p >= n || t >= n {
            return Err(FsascError::contract(format!(
                "label {} outside [0, {n})",
                p.max(t)
            )));
        }
        m[p][t] += 1;
    }
    Ok(m)
}

/// Misclassification rate in percent under the best matching of predicted
/// to true labels.
pub fn clustering_error(pred: &[usize], truth: &[usize], n: usize) -> Result<f64> {
    let m = confusion(pred, truth, n)?;
    if pred.is_empty() {
        return Ok(0.0);
    }
    let matched = if n <= EXACT_SEARCH_MAX {
        best_by_permutation(&m)
    } else {
        best_by_assignment(&m)
    };
    Ok(100.0 * (pred.len() as u64 - matched) as f64 / pred.len() as f64)
}

/// Heap's algorithm over all assignments.
fn best_by_permutation(m: &[Vec<u64>]) -> u64 {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let score = |p: &[usize]| (0..n).map(|i| m[i][p[i]]).sum::<u64>();
    let mut best = score(&perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.max(score(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Maximum-weight perfect matching via the O(n^3) Hungarian method on
/// costs `max - m[i][j]`.
fn best_by_assignment(m: &[Vec<u64>]) -> u64 {
    let n = m.len();
    let top = m.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost = |i: usize, j: usize| top - m[i][j] as i64;

    // 1-based potentials; column 0 is the virtual start
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let i0 = owner[col0];
            let mut delta = i64::MAX;
            let mut col1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = col0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        col1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| m[owner[j] - 1][j - 1]).sum()
}

fn check_square(w: &DMatrix<f64>, truth: &[usize]) -> Result<()> {
    if !w.is_square() || w.nrows() != truth.len() {
        return Err(FsascError::contract(format!(
            "affinity of shape {:?} does not match {} labels",
            w.shape(),
            truth.len()
        )));
    }
    Ok(())
}

fn groups(truth: &[usize]) -> Vec<Vec<usize>> {
    let k = truth.iter().max().map_or(0, |m| m + 1);
    let mut g = vec![Vec::new(); k];
    for (i, &t) in truth.iter().enumerate() {
        g[t].push(i);
    }
    g
}

/// Smallest algebraic connectivity over the ground-truth clusters, in
/// percent. Each cluster's `lambda_2` of the normalized Laplacian of its
/// induced subgraph is clamped to `[0, 1]`.
///
/// A subgraph with an isolated vertex is disconnected and scores 0.
/// Clusters with fewer than two points are skipped.
pub fn intra_connectivity(w: &DMatrix<f64>, truth: &[usize]) -> Result<f64> {
    check_square(w, truth)?;
    let mut worst: Option<f64> = None;
    for (c, members) in groups(truth).iter().enumerate() {
        if members.len() < 2 {
            if !members.is_empty() {
                warn!("cluster {c} has a single point, skipping its connectivity");
            }
            continue;
        }
        let k = members.len();
        let sub = DMatrix::from_fn(k, k, |a, b| w[(members[a], members[b])]);
        let isolated = (0..k).any(|a| sub.row(a).iter().map(|v| v.max(0.0)).sum::<f64>() <= ISOLATED_DEGREE);
        let lambda2 = if isolated {
            0.0
        } else {
            laplacian_eigenvalues(&sub)?[1]
        };
        let score = lambda2.clamp(0.0, 1.0);
        worst = Some(worst.map_or(score, |w: f64| w.min(score)));
    }
    Ok(100.0 * worst.unwrap_or(0.0))
}

/// Percentage of the total affinity mass (diagonal included) placed on
/// pairs from different ground-truth clusters.
pub fn inter_connectivity(w: &DMatrix<f64>, truth: &[usize]) -> Result<f64> {
    check_square(w, truth)?;
    let mut total = 0.0;
    let mut cross = 0.0;
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            let v = w[(i, j)].abs();
            total += v;
            if truth[i] != truth[j] {
                cross += v;
            }
        }
    }
    Ok(if total > 0.0 { 100.0 * cross / total } else { 0.0 })
}

/// Error and connectivity of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub error_pct: f64,
    pub intra_pct: f64,
    pub inter_pct: f64,
}

impl TrialMetrics {
    pub fn compute(pred: &[usize], truth: &[usize], n: usize, w: &DMatrix<f64>) -> Result<Self> {
        Ok(Self {
            error_pct: clustering_error(pred, truth, n)?,
            intra_pct: intra_connectivity(w, truth)?,
            inter_pct: inter_connectivity(w, truth)?,
        })
    }
}

/// Means over trials, optionally with the per-trial values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub error_pct: f64,
    pub intra_pct: f64,
    pub inter_pct: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_trial: Option<Vec<TrialMetrics>>,
}

impl EvalReport {
    pub fn from_trials(trials: &[TrialMetrics], keep_trials: bool) -> Self {
        let n = trials.len().max(1) as f64;
        let mean = |f: fn(&TrialMetrics) -> f64| trials.iter().map(f).sum::<f64>() / n;
        Self {
            error_pct: mean(|t| t.error_pct),
            intra_pct: mean(|t| t.intra_pct),
            inter_pct: mean(|t| t.inter_pct),
            per_trial: keep_trials.then(|| trials.to_vec()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub const CSV_HEADER: &'static str = "label,error_pct,intra_pct,inter_pct";

    /// One summary line in the [`EvalReport::CSV_HEADER`] layout.
    pub fn write_csv_row<W: Write>(&self, label: &str, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{label},{},{},{}",
            self.error_pct, self.intra_pct, self.inter_pct
        )?;
        Ok(())
    }
}
