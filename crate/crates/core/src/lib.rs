//! Filtrated spectral algebraic subspace clustering.
//!
//! Points drawn from a union of linear subspaces are clustered by fitting
//! homogeneous polynomials that vanish on the data, building per-point
//! filtrations of hyperplane projections from their gradients, and running
//! spectral clustering on the resulting affinities.
//!
//! The crate also carries the angle- and distance-based single-polynomial
//! affinities, the exact noiseless procedure, a synthetic union-of-subspaces
//! generator, evaluation metrics, and the experiment pipeline used by the
//! `fsasc` command-line tool.

pub mod affinity;
pub mod cloud;
pub mod error;
pub mod filtration;
pub mod kmeans;
pub mod metrics;
pub mod pipeline;
mod linalg;
pub mod poly;
pub mod projection;
pub mod spectral;
pub mod synth;
pub mod vanish;

#[cfg(test)]
mod test_support;

pub use affinity::{angle_affinity, distance_affinity, AffinityKind, AffinityMatrix};
pub use cloud::PointCloud;
pub use error::{FsascError, Result};
pub use filtration::{
    fasc, filtration_row, fsasc, ClusterResult, FascCluster, FascOutput, FiltrationConfig,
    FiltrationRow, FsascParams, Termination,
};
pub use metrics::{
    clustering_error, inter_connectivity, intra_connectivity, EvalReport, TrialMetrics,
};
pub use poly::{eval_poly, grad_poly, monomial_count, veronese_embed, HomoPoly, MonomialBasis};
pub use projection::{apply_chain, make_projection, HyperplaneProjection, ProjectionChain};
pub use spectral::{eigengap_score, normalized_laplacian, spectral_cluster, LaplacianSpectrum};
pub use synth::{random_subspaces, sample_cloud, LabeledCloud, SynthConfig};
pub use vanish::{beta_statistic, embed_data, fit_vanishing, null_candidates, EmbeddedData};
