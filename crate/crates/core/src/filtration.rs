//! Filtrations of hyperplane projections.
//!
//! A filtration anchored at a reference point repeatedly fits a vanishing
//! polynomial, projects onto the hyperplane normal to its gradient at the
//! reference, and keeps only the points that (approximately) lie in that
//! hyperplane. On noiseless data it stops after exactly `D - dim(S)` steps
//! with the reference subspace `S` isolated.
//!
//! [`fasc`] is the exact, noiseless procedure. [`filtration_row`] is the
//! noise-tolerant variant run once per point by [`fsasc`], which turns the
//! surviving norms into affinity rows and picks the survival threshold by
//! Laplacian eigengap.

use std::borrow::Cow;
use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{dot, norm, PointCloud};
use crate::error::{FsascError, Result};
use crate::linalg::numerical_rank;
use crate::poly::{monomial_count, HomoPoly, MonomialBasis};
use crate::projection::{HyperplaneProjection, ProjectionChain};
use crate::spectral::{eigengap_from_spectrum, laplacian_eigenvalues, spectral_cluster};
use crate::vanish::{
    beta_statistic, embed_with_basis, fit_vanishing_at, null_candidates,
    GRAD_ZERO_TOL,
};

/// Membership tolerance for the exact procedure.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Relative singular value cutoff for the final rank estimate.
pub const RANK_TOL: f64 = 1e-8;
/// Candidate polynomials with a smaller gradient at the reference are ignored.
pub const FASC_GRAD_TOL: f64 = 1e-8;

pub const DEFAULT_GAMMAS: [f64; 9] = [0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0];
pub const DEFAULT_MU: usize = 10;

/// Parameters of a filtrated spectral clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsascParams {
    /// Number of subspaces, also the polynomial degree.
    pub n: usize,
    /// Smallest number of points accepted as a cluster.
    pub mu: usize,
    /// Candidate multipliers of the noise statistic.
    pub gammas: Vec<f64>,
    /// Seed for the k-means stage.
    pub seed: u64,
}

impl FsascParams {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            mu: DEFAULT_MU,
            gammas: DEFAULT_GAMMAS.to_vec(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(FsascError::contract("number of subspaces must be positive"));
        }
        if self.mu == 0 {
            return Err(FsascError::contract("mu must be at least 1"));
        }
        if self.gammas.is_empty() || self.gammas.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(FsascError::contract("gammas must be a non-empty list of positive reals"));
        }
        Ok(())
    }

    /// Fixes the survival threshold for one filtration sweep.
    pub fn at_delta(&self, delta: f64) -> FiltrationConfig {
        FiltrationConfig {
            n: self.n,
            mu: self.mu,
            delta,
        }
    }
}

/// Resolved settings of a single filtration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiltrationConfig {
    pub n: usize,
    pub mu: usize,
    /// Largest relative norm drop a point may suffer and still survive a step.
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The reference failed the very first step; the row holds every point's
    /// first projected norm.
    ReferenceDroppedFirstStep,
    ReferenceDropped,
    TooFewPointsMu,
    TooFewPointsVeronese,
    DimensionFloor,
}

/// One affinity row produced by a filtration.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationRow {
    pub values: Vec<f64>,
    /// Steps whose survivors were written into the row.
    pub depth: usize,
    pub terminated_by: Termination,
}

/// Degree-`n` bases for every dimension a filtration can visit.
struct BasisCache {
    by_dim: Vec<Option<Arc<MonomialBasis>>>,
}

impl BasisCache {
    fn new(max_dim: usize, degree: usize) -> Result<Self> {
        let mut by_dim = vec![None; max_dim + 1];
        for (d, slot) in by_dim.iter_mut().enumerate().skip(1) {
            *slot = Some(Arc::new(MonomialBasis::new(d, degree)?));
        }
        Ok(Self { by_dim })
    }

    fn get(&self, d: usize) -> &Arc<MonomialBasis> {
        self.by_dim[d].as_ref().expect("basis for every visited dimension")
    }
}

type ProjectionBuilder<'a> = dyn Fn(&[f64]) -> Result<HyperplaneProjection> + Sync + 'a;

/// `(||y|| - ||pi(y)||) / ||y||`, evaluated as `<b,y>^2 / (||y|| (||y|| + ||pi y||))`
/// so that points inside the hyperplane give a drop at rounding level of
/// `<b,y>^2` rather than of `||y||`.
fn relative_drop(y: &[f64], b: &[f64], projected_norm: f64) -> f64 {
    let ny = norm(y);
    if ny == 0.0 {
        return 1.0;
    }
    let t = dot(b, y);
    t * t / (ny * (ny + projected_norm))
}

/// Runs the filtration anchored at point `j` and returns its affinity row.
///
/// `x` must be unit-normalized and `p` the degree-`n` polynomial fitted on all
/// of `x`.
pub fn filtration_row(
    x: &PointCloud,
    j: usize,
    p: &HomoPoly,
    cfg: &FiltrationConfig,
) -> Result<FiltrationRow> {
    check_row_inputs(x, j, p, cfg)?;
    let bases = BasisCache::new(x.dim(), cfg.n)?;
    filtration_row_with(x, j, p, cfg, &bases, &HyperplaneProjection::new)
}

fn check_row_inputs(x: &PointCloud, j: usize, p: &HomoPoly, cfg: &FiltrationConfig) -> Result<()> {
    if j >= x.len() {
        return Err(FsascError::contract(format!(
            "reference index {j} out of range for {} points",
            x.len()
        )));
    }
    if p.ambient_dim() != x.dim() || p.degree() != cfg.n {
        return Err(FsascError::contract(format!(
            "polynomial of degree {} in {} variables does not match n = {} in R^{}",
            p.degree(),
            p.ambient_dim(),
            cfg.n,
            x.dim()
        )));
    }
    if cfg.mu == 0 || !(cfg.delta >= 0.0) {
        return Err(FsascError::contract("filtration needs mu >= 1 and delta >= 0"));
    }
    x.check_unit_norm()
}

fn filtration_row_with(
    x: &PointCloud,
    j: usize,
    p: &HomoPoly,
    cfg: &FiltrationConfig,
    bases: &BasisCache,
    project: &ProjectionBuilder<'_>,
) -> Result<FiltrationRow> {
    let ambient = x.dim();
    let total = x.len();
    let mut d = ambient;
    let mut row = vec![0.0; total];
    let mut depth = 0;

    // survivors as original indices, with their current images in R^d
    let mut active: Vec<usize> = (0..total).collect();
    let mut images: Vec<Vec<f64>> = x.to_rows();
    let mut reference = x.point(j).to_vec();
    let mut q: Cow<'_, HomoPoly> = Cow::Borrowed(p);

    let terminated_by = loop {
        if d <= 1 {
            break Termination::DimensionFloor;
        }
        let Some((b, _)) = q.unit_grad(&reference, GRAD_ZERO_TOL)? else {
            break Termination::ReferenceDropped;
        };
        let pi = project(&b)?;

        let ref_image = pi.apply_unchecked(&reference);
        if relative_drop(&reference, &b, norm(&ref_image)) > cfg.delta {
            if d == ambient {
                for (slot, y) in row.iter_mut().zip(&images) {
                    *slot = norm(&pi.apply_unchecked(y));
                }
                break Termination::ReferenceDroppedFirstStep;
            }
            break Termination::ReferenceDropped;
        }

        let mut next_active = Vec::with_capacity(active.len());
        let mut next_images = Vec::with_capacity(active.len());
        for (&idx, y) in active.iter().zip(&images) {
            let img = pi.apply_unchecked(y);
            if relative_drop(y, &b, norm(&img)) <= cfg.delta {
                next_active.push(idx);
                next_images.push(img);
            }
        }
        if next_active.len() < cfg.mu {
            break Termination::TooFewPointsMu;
        }

        row.iter_mut().for_each(|v| *v = 0.0);
        for (&idx, img) in next_active.iter().zip(&next_images) {
            row[idx] = norm(img);
        }
        depth += 1;

        if next_active.len() < bases.get(d).len() {
            break Termination::TooFewPointsVeronese;
        }

        d -= 1;
        reference = ref_image;
        active = next_active;
        images = next_images;
        if d <= 1 {
            break Termination::DimensionFloor;
        }
        let survivors = PointCloud::from_flat(d, images.concat())?;
        let e = embed_with_basis(&survivors, bases.get(d).clone())?;
        q = Cow::Owned(fit_vanishing_at(&e, Some(&reference))?);
    };

    Ok(FiltrationRow {
        values: row,
        depth,
        terminated_by,
    })
}

/// Output of a filtrated spectral clustering run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterResult {
    pub labels: Vec<usize>,
    pub chosen_gamma: f64,
    pub eigengap: f64,
    /// Filtration depth per point at the chosen threshold.
    pub depths: Vec<usize>,
    pub params: FsascParams,
    /// Eigengap per candidate threshold; `None` where the affinity was all zero.
    #[serde(skip)]
    pub gamma_scores: Vec<(f64, Option<f64>)>,
    #[serde(skip)]
    pub beta: f64,
    /// The symmetrized affinity `C* + C*^T` handed to spectral clustering.
    #[serde(skip)]
    pub affinity: DMatrix<f64>,
    #[serde(skip)]
    pub ambient_dim: usize,
}

impl ClusterResult {
    /// Subspace dimension estimate per point, `D - depth`.
    pub fn estimated_dims(&self) -> Vec<usize> {
        self.depths
            .iter()
            .map(|&k| self.ambient_dim.saturating_sub(k))
            .collect()
    }
}

/// All filtration rows for one threshold.
pub fn filtration_affinity(
    x: &PointCloud,
    p: &HomoPoly,
    cfg: &FiltrationConfig,
) -> Result<Vec<FiltrationRow>> {
    check_row_inputs(x, 0, p, cfg)?;
    let bases = BasisCache::new(x.dim(), cfg.n)?;
    filtration_rows(x, p, cfg, &bases, &HyperplaneProjection::new)
}

fn filtration_rows(
    x: &PointCloud,
    p: &HomoPoly,
    cfg: &FiltrationConfig,
    bases: &BasisCache,
    project: &ProjectionBuilder<'_>,
) -> Result<Vec<FiltrationRow>> {
    (0..x.len())
        .into_par_iter()
        .map(|j| filtration_row_with(x, j, p, cfg, bases, project))
        .collect()
}

fn rows_to_matrix(rows: &[FiltrationRow]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i].values[j])
}

/// Filtrated spectral algebraic subspace clustering.
pub fn fsasc(x: &PointCloud, params: &FsascParams) -> Result<ClusterResult> {
    fsasc_with(x, params, &HyperplaneProjection::new)
}

fn fsasc_with(
    x: &PointCloud,
    params: &FsascParams,
    project: &ProjectionBuilder<'_>,
) -> Result<ClusterResult> {
    params.validate()?;
    let n = params.n;
    let total = x.len();
    let ambient = x.dim();
    if ambient < 2 {
        return Err(FsascError::contract("ambient dimension must be at least 2"));
    }
    let required = monomial_count(ambient, n)?;
    if total < required {
        return Err(FsascError::NotEnoughPoints {
            points: total,
            required,
            degree: n,
            dim: ambient,
        });
    }

    let x = x.normalized()?;
    let bases = BasisCache::new(ambient, n)?;
    let e = embed_with_basis(&x, bases.get(ambient).clone())?;
    let p = fit_vanishing_at(&e, None)?;
    let beta = beta_statistic(&x, &p)?;

    let mut best: Option<(f64, f64, Vec<FiltrationRow>, DMatrix<f64>)> = None;
    let mut gamma_scores = Vec::with_capacity(params.gammas.len());
    for &gamma in &params.gammas {
        let cfg = params.at_delta(beta * gamma);
        let rows = filtration_rows(&x, &p, &cfg, &bases, project)?;
        let c = rows_to_matrix(&rows);
        let w = &c + c.transpose();
        if w.iter().all(|&v| v == 0.0) {
            warn!("gamma = {gamma}: every filtration row is zero, skipping");
            gamma_scores.push((gamma, None));
            continue;
        }
        let gap = eigengap_from_spectrum(&laplacian_eigenvalues(&w)?, n)?;
        gamma_scores.push((gamma, Some(gap)));
        if best.as_ref().is_none_or(|b| gap > b.1) {
            best = Some((gamma, gap, rows, w));
        }
    }

    let (chosen_gamma, eigengap, rows, affinity) = best.ok_or_else(|| {
        FsascError::numerical("every candidate gamma produced an all-zero affinity")
    })?;
    let labels = spectral_cluster(&affinity, n, params.seed)?;
    Ok(ClusterResult {
        labels,
        chosen_gamma,
        eigengap,
        depths: rows.iter().map(|r| r.depth).collect(),
        params: params.clone(),
        gamma_scores,
        beta,
        affinity,
        ambient_dim: ambient,
    })
}

/// One cluster found by [`fasc`] with its estimated subspace dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FascCluster {
    pub indices: Vec<usize>,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FascOutput {
    pub clusters: Vec<FascCluster>,
}

impl FascOutput {
    /// Cluster index per point.
    pub fn labels(&self, total: usize) -> Vec<usize> {
        let mut labels = vec![usize::MAX; total];
        for (c, cl) in self.clusters.iter().enumerate() {
            for &i in &cl.indices {
                labels[i] = c;
            }
        }
        labels
    }
}

/// Exact filtrated algebraic subspace clustering of noiseless data.
///
/// Each of the first `n - 1` rounds takes the lowest-index unclustered point
/// as reference, filters down to its subspace, and removes the recovered
/// points. Whatever remains forms the last cluster, whose dimension is its
/// numerical rank.
pub fn fasc(x: &PointCloud, n: usize) -> Result<FascOutput> {
    if n == 0 {
        return Err(FsascError::contract("number of subspaces must be positive"));
    }
    let x = x.normalized()?;
    let ambient = x.dim();
    let mut clustered = vec![false; x.len()];
    let mut clusters = Vec::with_capacity(n);

    for _ in 1..n {
        let remaining: Vec<usize> = (0..x.len()).filter(|&i| !clustered[i]).collect();
        let Some(&reference_idx) = remaining.first() else {
            break;
        };
        let chain = fasc_chain(&x, &remaining, reference_idx, n)?;

        let mut members = Vec::new();
        for &i in &remaining {
            if survives_chain(&chain, x.point(i)) {
                members.push(i);
                clustered[i] = true;
            }
        }
        clusters.push(FascCluster {
            indices: members,
            dim: ambient - chain.len(),
        });
    }

    let rest: Vec<usize> = (0..x.len()).filter(|&i| !clustered[i]).collect();
    if !rest.is_empty() {
        let dim = numerical_rank(&x.select(&rest)?.to_matrix(), RANK_TOL)?;
        clusters.push(FascCluster { indices: rest, dim });
    }
    Ok(FascOutput { clusters })
}

/// A point belongs to the isolated subspace when it lies in every hyperplane
/// of the chain and so keeps its unit norm. Checking the final norm alone is
/// too loose: a drop of `t` in `<b,y>` only costs `t^2 / 2` in norm.
fn survives_chain(chain: &ProjectionChain, point: &[f64]) -> bool {
    let mut y = point.to_vec();
    for step in chain.steps() {
        if dot(step.normal(), &y).abs() > MEMBERSHIP_TOL {
            return false;
        }
        y = step.apply_unchecked(&y);
    }
    norm(&y) >= 1.0 - MEMBERSHIP_TOL
}

/// Builds the projection chain isolating the subspace through `reference_idx`.
fn fasc_chain(
    x: &PointCloud,
    remaining: &[usize],
    reference_idx: usize,
    n: usize,
) -> Result<ProjectionChain> {
    let mut chain = ProjectionChain::new();
    let mut current = x.select(remaining)?;
    let mut reference = x.point(reference_idx).to_vec();
    loop {
        if current.dim() <= 1 {
            break;
        }
        let mut best: Option<(Vec<f64>, f64)> = None;
        for cand in null_candidates(&current, n)? {
            let g = cand.grad(&reference)?;
            let gn = norm(&g);
            if gn > FASC_GRAD_TOL && best.as_ref().is_none_or(|b| gn > b.1) {
                best = Some((g, gn));
            }
        }
        let Some((g, _)) = best else {
            if chain.is_empty() {
                return Err(FsascError::numerical(format!(
                    "no vanishing polynomial has a nonzero gradient at reference point {reference_idx}; \
                     the data are not in general position"
                )));
            }
            break;
        };
        let pi = HyperplaneProjection::new(&g)?;
        let b = pi.normal().to_vec();
        let kept: Vec<Vec<f64>> = current
            .points()
            .filter(|y| dot(&b, y).abs() <= MEMBERSHIP_TOL)
            .map(|y| pi.apply_unchecked(y))
            .collect();
        reference = pi.apply_unchecked(&reference);
        chain.push(pi)?;
        if kept.is_empty() {
            break;
        }
        current = PointCloud::from_rows(&kept)?;
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{sample_cloud, SynthConfig};
    use crate::test_support::{gaussian_rows, lines_in_plane, rng};
    use crate::vanish::{embed_data, fit_vanishing};

    fn cloud(dims: &[usize], sigma: f64, seed: u64, per: usize) -> PointCloud {
        let c = sample_cloud(&SynthConfig {
            ambient_dim: 5,
            dims: dims.to_vec(),
            points_per_subspace: per,
            noise_sigma: sigma,
            seed,
        })
        .unwrap();
        let labels = c.labels.clone();
        c.points.normalized().unwrap().with_labels(labels).unwrap()
    }

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    fn global_fit(x: &PointCloud, n: usize) -> HomoPoly {
        fit_vanishing(&embed_data(x, n).unwrap()).unwrap()
    }

    fn row(x: &PointCloud, j: usize, n: usize, mu: usize, delta: f64) -> FiltrationRow {
        let p = global_fit(x, n);
        filtration_row(x, j, &p, &FiltrationConfig { n, mu, delta }).unwrap()
    }

    #[test]
    fn fasc_two_lines() {
        let x = lines_in_plane(&mut rng(1), 20);
        let out = fasc(&x, 2).unwrap();
        assert_eq!(out.clusters.len(), 2);
        for c in &out.clusters {
            assert_eq!(c.indices.len(), 20);
            assert_eq!(c.dim, 1);
        }
        assert!(same_partition(&out.labels(40), x.labels().unwrap()));
    }

    #[test]
    fn fasc_point_close_to_the_other_plane() {
        // planes x3 = 0 and x1 = 0; the last point is on x1 = 0 but only
        // 1e-6 away from x3 = 0, well inside a norm-only tolerance
        let mut rows = gaussian_rows(&mut rng(8), 40, 3);
        for (k, r) in rows.iter_mut().enumerate() {
            r[if k < 20 { 2 } else { 0 }] = 0.0;
        }
        rows.push(vec![0.0, 1.0, 1e-6]);
        let x = PointCloud::from_rows(&rows).unwrap();
        let out = fasc(&x, 2).unwrap();
        let labels = out.labels(41);
        assert!(labels[..20].iter().all(|&l| l == labels[0]));
        assert!(labels[20..].iter().all(|&l| l == labels[20]));
        assert_ne!(labels[0], labels[20]);
    }

    #[test]
    fn fasc_plane_and_line() {
        let mut r = rng(2);
        let plane = gaussian_rows(&mut r, 2, 3);
        let line = gaussian_rows(&mut r, 1, 3);
        let mut rows = Vec::new();
        for coef in gaussian_rows(&mut r, 50, 2) {
            rows.push((0..3).map(|k| coef[0] * plane[0][k] + coef[1] * plane[1][k]).collect());
        }
        for coef in gaussian_rows(&mut r, 50, 1) {
            rows.push((0..3).map(|k| coef[0] * line[0][k]).collect());
        }
        let x = PointCloud::from_rows(&rows).unwrap().normalized().unwrap();
        let labels: Vec<usize> = (0..100).map(|i| i / 50).collect();

        let out = fasc(&x, 2).unwrap();
        let dims: Vec<usize> = out.clusters.iter().map(|c| c.dim).collect();
        assert_eq!(dims, vec![2, 1]);
        assert!(same_partition(&out.labels(100), &labels));

        // filtration depth is the codimension of the reference's subspace
        let plane_row = row(&x, 0, 2, 10, 1e-6);
        let line_row = row(&x, 50, 2, 10, 1e-6);
        assert_eq!(plane_row.depth, 1);
        assert_eq!(line_row.depth, 2);
        for (k, v) in line_row.values.iter().enumerate() {
            if k >= 50 {
                assert!((v - 1.0).abs() <= 1e-10);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn noiseless_mixed_dimensions() {
        let x = cloud(&[2, 3, 4], 0.0, 3, 100);
        let labels = x.labels().unwrap().to_vec();

        let out = fasc(&x, 3).unwrap();
        assert!(same_partition(&out.labels(300), &labels));
        let mut dims: Vec<usize> = out.clusters.iter().map(|c| c.dim).collect();
        dims.sort();
        assert_eq!(dims, vec![2, 3, 4]);

        let res = fsasc(&x, &FsascParams::new(3)).unwrap();
        assert!(same_partition(&res.labels, &labels));
        let want: Vec<usize> = labels.iter().map(|&l| [2, 3, 4][l]).collect();
        assert_eq!(res.estimated_dims(), want);
    }

    #[test]
    fn noiseless_rows_keep_exactly_the_reference_subspace() {
        let x = cloud(&[2, 3, 4], 0.0, 4, 100);
        let labels = x.labels().unwrap();
        let p = global_fit(&x, 3);
        let beta = beta_statistic(&x, &p).unwrap();
        let cfg = FiltrationConfig { n: 3, mu: 10, delta: 0.01 * beta };
        for j in [0, 150, 299] {
            let r = filtration_row(&x, j, &p, &cfg).unwrap();
            assert_eq!(r.depth, 5 - [2, 3, 4][labels[j]]);
            for (k, v) in r.values.iter().enumerate() {
                if labels[k] == labels[j] {
                    assert!((v - 1.0).abs() <= 1e-10, "{j} {k} {v}");
                } else {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }

    #[test]
    fn reference_dropping_at_the_first_step() {
        let x = cloud(&[4, 4, 4], 0.05, 5, 30);
        let p = global_fit(&x, 3);
        let j = 7;
        let r = filtration_row(&x, j, &p, &FiltrationConfig { n: 3, mu: 10, delta: 0.0 }).unwrap();
        assert_eq!(r.terminated_by, Termination::ReferenceDroppedFirstStep);
        assert_eq!(r.depth, 0);
        // one step is a single distance-to-hyperplane computation
        let (g, _) = p.unit_grad(x.point(j), 0.0).unwrap().unwrap();
        for (k, v) in r.values.iter().enumerate() {
            let t = dot(&g, x.point(k));
            assert!((v - (1.0 - t * t).sqrt()).abs() <= 1e-10);
        }
    }

    #[test]
    fn mu_above_n_stops_with_an_empty_row() {
        let x = cloud(&[2, 3, 4], 0.0, 6, 20);
        let r = row(&x, 0, 3, x.len() + 1, 1e-6);
        assert_eq!(r.terminated_by, Termination::TooFewPointsMu);
        assert_eq!(r.depth, 0);
        assert!(r.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn noisy_rows_are_bounded_and_favour_the_reference() {
        let x = cloud(&[2, 2, 2], 0.05, 7, 60);
        let p = global_fit(&x, 3);
        let beta = beta_statistic(&x, &p).unwrap();
        for gamma in [0.1, 1.0, 10.0] {
            let cfg = FiltrationConfig { n: 3, mu: 10, delta: gamma * beta };
            for j in (0..x.len()).step_by(17) {
                let r = filtration_row(&x, j, &p, &cfg).unwrap();
                assert!(r.values.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
                if r.terminated_by != Termination::ReferenceDroppedFirstStep && r.depth > 0 {
                    // every survivor, the reference included, keeps at least
                    // (1 - delta)^depth of its norm
                    let floor = (1.0 - cfg.delta).powi(r.depth as i32);
                    let top = r.values.iter().copied().fold(0.0, f64::max);
                    assert!(r.values[j] >= floor - 1e-12, "gamma {gamma} row {j}");
                    assert!(r.values[j] >= top - (1.0 - floor) - 1e-12);
                    assert!(r.values.iter().all(|&v| v == 0.0 || v >= floor - 1e-12));
                }
            }
        }
    }

    #[test]
    fn recorded_norms_never_grow_with_depth() {
        let x = cloud(&[1, 2, 3], 0.03, 8, 60);
        let p = global_fit(&x, 3);
        let beta = beta_statistic(&x, &p).unwrap();
        let shallow = FiltrationConfig { n: 3, mu: 10, delta: 0.5 * beta };
        let j = 0;
        let full = filtration_row(&x, j, &p, &shallow).unwrap();
        // rerun with mu just above the survivors of the final step to stop one step earlier
        if full.depth >= 2 {
            let survivors = full.values.iter().filter(|&&v| v > 0.0).count();
            let earlier =
                filtration_row(&x, j, &p, &FiltrationConfig { mu: survivors + 1, ..shallow })
                    .unwrap();
            assert!(earlier.depth < full.depth);
            for (a, b) in full.values.iter().zip(&earlier.values) {
                if *a > 0.0 {
                    assert!(*a <= *b + 1e-12);
                }
            }
        }
    }

    #[test]
    fn projection_basis_does_not_matter() {
        // rotate every complement basis by a fixed orthogonal mixing of its rows
        let rotated = |normal: &[f64]| -> Result<HyperplaneProjection> {
            let h = HyperplaneProjection::new(normal)?;
            let (m, d) = (h.output_dim(), h.input_dim());
            let q = nalgebra::DMatrix::from_fn(m, m, |i, k| ((i * 7 + k * 3 + 1) as f64).sin());
            let q = nalgebra::QR::new(q).q();
            let mut basis = vec![0.0; m * d];
            for i in 0..m {
                for k in 0..m {
                    for (t, v) in h.basis_row(k).iter().enumerate() {
                        basis[i * d + t] += q[(i, k)] * v;
                    }
                }
            }
            HyperplaneProjection::with_basis(normal, basis)
        };
        for dims in [[4, 4, 4], [2, 3, 4]] {
            let x = cloud(&dims, 0.0, 9, 100);
            let params = FsascParams::new(3);
            let a = fsasc(&x, &params).unwrap();
            let b = fsasc_with(&x, &params, &rotated).unwrap();
            assert!((&a.affinity - &b.affinity).amax() <= 1e-8, "{dims:?}");
            assert_eq!(a.labels, b.labels);
        }
    }

    #[test]
    fn single_subspace() {
        let x = cloud(&[3], 0.02, 10, 60);
        let res = fsasc(&x, &FsascParams::new(1)).unwrap();
        assert!(res.labels.iter().all(|&l| l == 0));
        let out = fasc(&cloud(&[3], 0.0, 10, 60), 1).unwrap();
        assert_eq!(out.clusters.len(), 1);
        assert_eq!(out.clusters[0].dim, 3);
    }

    #[test]
    fn permuting_points_permutes_labels() {
        let x = cloud(&[1, 2, 3], 0.02, 11, 60);
        let total = x.len();
        let perm: Vec<usize> = (0..total).map(|i| (i * 53) % total).collect();
        let xp = x.select(&perm).unwrap();
        let params = FsascParams::new(3);
        let a = fsasc(&x, &params).unwrap();
        let b = fsasc(&xp, &params).unwrap();
        let want: Vec<usize> = perm.iter().map(|&p| a.labels[p]).collect();
        assert!(same_partition(&b.labels, &want));
        assert_eq!(a.chosen_gamma, b.chosen_gamma);
    }

    #[test]
    fn input_checks() {
        let x = cloud(&[2, 2, 2], 0.0, 12, 5);
        assert!(matches!(
            fsasc(&x, &FsascParams::new(3)),
            Err(FsascError::NotEnoughPoints { points: 15, required: 35, .. })
        ));
        let mut bad = FsascParams::new(3);
        bad.gammas = vec![0.1, -1.0];
        assert!(fsasc(&cloud(&[2, 2, 2], 0.0, 12, 20), &bad).is_err());
        bad.gammas.clear();
        assert!(bad.validate().is_err());
        let p = global_fit(&x, 3);
        let cfg = FiltrationConfig { n: 3, mu: 1, delta: 0.1 };
        assert!(filtration_row(&x, 99, &p, &cfg).is_err());
        assert!(filtration_row(&x, 0, &p, &FiltrationConfig { n: 2, ..cfg }).is_err());
        assert!(fasc(&x, 0).is_err());
    }
}
