//! Data files, PCA preprocessing and repeated experiments.

pub mod experiment;
pub mod io;
pub mod pca;

pub use experiment::{
    cluster, run_experiment, run_trial, trial_seed, DataSource, ExperimentReport, ExperimentSpec,
    Method, MethodOutput, Projection, TrialRecord, TrialRun,
};
pub use io::{load_cloud, load_labels, parse_matrix_csv, save_cloud, write_matrix_csv};
pub use pca::{auto_target_dim, pca_project};
