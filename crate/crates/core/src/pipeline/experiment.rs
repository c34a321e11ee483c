//! Seeded, repeated clustering experiments.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::io::load_cloud;
use super::pca::{auto_target_dim, pca_project};
use crate::affinity::{angle_affinity, distance_affinity};
use crate::cloud::PointCloud;
use crate::error::{FsascError, Result};
use crate::filtration::{fasc, fsasc, FsascParams};
use crate::metrics::{clustering_error, inter_connectivity, intra_connectivity};
use crate::poly::monomial_count;
use crate::spectral::spectral_cluster;
use crate::synth::{sample_cloud, SynthConfig};
use crate::vanish::{embed_data, fit_vanishing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fsasc,
    SascD,
    SascA,
    Fasc,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Fsasc, Method::SascD, Method::SascA, Method::Fasc];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fsasc => "fsasc",
            Method::SascD => "sasc_d",
            Method::SascA => "sasc_a",
            Method::Fasc => "fasc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = FsascError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| {
                FsascError::contract(format!(
                    "unknown method {s:?}; expected one of fsasc, sasc_d, sasc_a, fasc"
                ))
            })
    }
}

/// Labels and diagnostics from one clustering call.
#[derive(Debug, Clone)]
pub struct MethodOutput {
    pub labels: Vec<usize>,
    /// Affinity handed to spectral clustering; absent for FASC.
    pub affinity: Option<DMatrix<f64>>,
    pub chosen_gamma: Option<f64>,
    pub eigengap: Option<f64>,
    pub depths: Option<Vec<usize>>,
}

fn check_points(x: &PointCloud, n: usize) -> Result<()> {
    let required = monomial_count(x.dim(), n)?;
    if x.len() < required {
        return Err(FsascError::NotEnoughPoints {
            points: x.len(),
            required,
            degree: n,
            dim: x.dim(),
        });
    }
    Ok(())
}

/// Clusters `x` into `params.n` groups. `params.seed` seeds k-means.
pub fn cluster(x: &PointCloud, method: Method, params: &FsascParams) -> Result<MethodOutput> {
    params.validate()?;
    match method {
        Method::Fsasc => {
            let r = fsasc(x, params)?;
            Ok(MethodOutput {
                labels: r.labels,
                affinity: Some(r.affinity),
                chosen_gamma: Some(r.chosen_gamma),
                eigengap: Some(r.eigengap),
                depths: Some(r.depths),
            })
        }
        Method::SascD | Method::SascA => {
            check_points(x, params.n)?;
            let x = x.normalized()?;
            let p = fit_vanishing(&embed_data(&x, params.n)?)?;
            let w = if method == Method::SascD {
                distance_affinity(&x, &p)?
            } else {
                angle_affinity(&x, &p)?
            }
            .into_values();
            let labels = spectral_cluster(&w, params.n, params.seed)?;
            Ok(MethodOutput {
                labels,
                affinity: Some(w),
                chosen_gamma: None,
                eigengap: None,
                depths: None,
            })
        }
        Method::Fasc => {
            check_points(x, params.n)?;
            let out = fasc(x, params.n)?;
            Ok(MethodOutput {
                labels: out.labels(x.len()),
                affinity: None,
                chosen_gamma: None,
                eigengap: None,
                depths: None,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "dim")]
pub enum Projection {
    None,
    Auto,
    Fixed(usize),
}

/// Where each trial's data come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DataSource {
    /// A fresh cloud per trial; the config's seed is replaced by the trial seed.
    Synthetic(SynthConfig),
    /// The same labelled file in every trial; only the k-means seed varies.
    File { path: PathBuf, projection: Projection },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub source: DataSource,
    pub method: Method,
    /// `params.seed` is replaced by the trial seed.
    pub params: FsascParams,
    pub trials: usize,
    pub seed: u64,
}

/// Seed of trial `trial`, independent of how trials are scheduled.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial as u64);
    r.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub error_pct: Option<f64>,
    pub intra_pct: Option<f64>,
    pub inter_pct: Option<f64>,
    pub chosen_gamma: Option<f64>,
    pub eigengap: Option<f64>,
    pub failure: Option<String>,
}

/// A completed trial with its data, for callers that need more than the record.
#[derive(Debug, Clone)]
pub struct TrialRun {
    pub record: TrialRecord,
    pub cloud: PointCloud,
    pub truth: Vec<usize>,
    pub output: MethodOutput,
}

fn trial_data(source: &DataSource, n: usize, seed: u64) -> Result<PointCloud> {
    match source {
        DataSource::Synthetic(cfg) => {
            let cfg = SynthConfig {
                seed,
                ..cfg.clone()
            };
            Ok(sample_cloud(&cfg)?.points)
        }
        DataSource::File { path, projection } => {
            let x = load_cloud(path)?;
            match *projection {
                Projection::None => Ok(x),
                Projection::Fixed(d) => pca_project(&x, d),
                Projection::Auto => {
                    let d = auto_target_dim(n, x.len(), x.dim().min(x.len()))?;
                    pca_project(&x, d)
                }
            }
        }
    }
}

pub fn run_trial(spec: &ExperimentSpec, trial: usize) -> Result<TrialRun> {
    let seed = trial_seed(spec.seed, trial);
    let cloud = trial_data(&spec.source, spec.params.n, seed)?;
    let truth = cloud
        .labels()
        .ok_or_else(|| FsascError::contract("experiment data carry no ground-truth labels"))?
        .to_vec();
    let params = FsascParams {
        seed,
        ..spec.params.clone()
    };
    let output = cluster(&cloud, spec.method, &params)?;
    let k = params.n.max(truth.iter().max().map_or(0, |m| m + 1));
    let error_pct = clustering_error(&output.labels, &truth, k)?;
    let (intra_pct, inter_pct) = match &output.affinity {
        Some(w) => (
            Some(intra_connectivity(w, &truth)?),
            Some(inter_connectivity(w, &truth)?),
        ),
        None => (None, None),
    };
    Ok(TrialRun {
        record: TrialRecord {
            trial,
            seed,
            error_pct: Some(error_pct),
            intra_pct,
            inter_pct,
            chosen_gamma: output.chosen_gamma,
            eigengap: output.eigengap,
            failure: None,
        },
        cloud,
        truth,
        output,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub version: String,
    pub started_unix_secs: u64,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub method: Method,
    pub params: ExperimentSpec,
    pub trials: usize,
    /// Means over successful trials.
    pub mean_error_pct: Option<f64>,
    pub intra_pct: Option<f64>,
    pub inter_pct: Option<f64>,
    pub failures: usize,
    pub per_trial: Vec<TrialRecord>,
    /// Run-dependent fields; everything else is a function of the spec.
    pub metadata: ReportMetadata,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    if spec.trials == 0 {
        return Err(FsascError::contract("trials must be at least 1"));
    }
    spec.params.validate()?;
    if let DataSource::Synthetic(cfg) = &spec.source {
        cfg.validate()?;
    }
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let clock = Instant::now();

    let per_trial: Vec<TrialRecord> = (0..spec.trials)
        .into_par_iter()
        .map(|t| match run_trial(spec, t) {
            Ok(run) => run.record,
            Err(e) => TrialRecord {
                trial: t,
                seed: trial_seed(spec.seed, t),
                error_pct: None,
                intra_pct: None,
                inter_pct: None,
                chosen_gamma: None,
                eigengap: None,
                failure: Some(e.to_string()),
            },
        })
        .collect();

    let ok = || per_trial.iter().filter(|r| r.failure.is_none());
    Ok(ExperimentReport {
        method: spec.method,
        params: spec.clone(),
        trials: spec.trials,
        mean_error_pct: mean(ok().filter_map(|r| r.error_pct)),
        intra_pct: mean(ok().filter_map(|r| r.intra_pct)),
        inter_pct: mean(ok().filter_map(|r| r.inter_pct)),
        failures: per_trial.iter().filter(|r| r.failure.is_some()).count(),
        per_trial,
        metadata: ReportMetadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_secs: started,
            elapsed_secs: clock.elapsed().as_secs_f64(),
        },
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_trials_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "trial,seed,error_pct,intra_pct,inter_pct,chosen_gamma,eigengap,failure"
        )?;
        for r in &self.per_trial {
            let failure = r
                .failure
                .as_deref()
                .map(|f| format!("\"{}\"", f.replace('"', "\"\"")))
                .unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.trial,
                r.seed,
                opt(r.error_pct),
                opt(r.intra_pct),
                opt(r.inter_pct),
                opt(r.chosen_gamma),
                opt(r.eigengap),
                failure
            )?;
        }
        Ok(())
    }

    /// Writes the JSON report to `path` and the per-trial CSV beside it
    /// (`<stem>.trials.csv`). Returns the CSV path.
    pub fn save(&self, path: &Path) -> Result<PathBuf> {
        std::fs::write(path, self.to_json()?)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
        let csv_path = path.with_file_name(format!("{stem}.trials.csv"));
        let mut buf = Vec::new();
        self.write_trials_csv(&mut buf)?;
        std::fs::write(&csv_path, buf)?;
        Ok(csv_path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(method: Method, dims: &[usize], sigma: f64, trials: usize) -> ExperimentSpec {
        ExperimentSpec {
            source: DataSource::Synthetic(SynthConfig {
                ambient_dim: 5,
                dims: dims.to_vec(),
                points_per_subspace: 100,
                noise_sigma: sigma,
                seed: 0,
            }),
            method,
            params: FsascParams::new(dims.len()),
            trials,
            seed: 42,
        }
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
        assert_eq!("SASC-D".parse::<Method>().unwrap(), Method::SascD);
        assert!("ssc".parse::<Method>().is_err());
    }

    #[test]
    fn trial_seeds_differ_and_repeat() {
        let a: Vec<u64> = (0..5).map(|t| trial_seed(1, t)).collect();
        let b: Vec<u64> = (0..5).map(|t| trial_seed(1, t)).collect();
        assert_eq!(a, b);
        let mut s = a.clone();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), 5);
        assert_ne!(trial_seed(2, 0), a[0]);
    }

    #[test]
    fn reports_are_deterministic() {
        for method in Method::ALL {
            // the exact method is only defined on noiseless data
            let sigma = if method == Method::Fasc { 0.0 } else { 0.01 };
            let s = spec(method, &[1, 2, 3], sigma, 2);
            let mut a = run_experiment(&s).unwrap();
            let mut b = run_experiment(&s).unwrap();
            a.metadata = ReportMetadata::default();
            b.metadata = ReportMetadata::default();
            assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
            assert_eq!(a.failures, 0);
            assert_eq!(a.per_trial.len(), 2);
            assert_eq!(a.intra_pct.is_some(), method != Method::Fasc);
            assert_eq!(a.per_trial[0].chosen_gamma.is_some(), method == Method::Fsasc);
        }
    }

    #[test]
    fn failures_are_counted() {
        let mut s = spec(Method::Fsasc, &[2, 2, 2], 0.0, 2);
        if let DataSource::Synthetic(cfg) = &mut s.source {
            cfg.points_per_subspace = 5;
        }
        let r = run_experiment(&s).unwrap();
        assert_eq!(r.failures, 2);
        assert!(r.mean_error_pct.is_none());
        assert!(r.per_trial[0].failure.as_deref().unwrap().contains("points"));
        s.trials = 0;
        assert!(run_experiment(&s).is_err());
    }

    #[test]
    fn report_files() {
        let r = run_experiment(&spec(Method::SascD, &[4, 4, 4], 0.0, 1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        let csv = r.save(&path).unwrap();
        let back: ExperimentReport =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, r);
        let text = std::fs::read_to_string(csv).unwrap();
        assert_eq!(text.lines().count(), 2);
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in ["method", "params", "trials", "mean_error_pct", "intra_pct", "inter_pct", "failures", "per_trial"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn file_source_with_projection() {
        // two planes in R^6 span only four dimensions
        let cloud = sample_cloud(&SynthConfig {
            ambient_dim: 6,
            dims: vec![2, 2],
            points_per_subspace: 30,
            noise_sigma: 0.0,
            seed: 3,
        })
        .unwrap()
        .points;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        super::super::io::save_cloud(&cloud, &path).unwrap();
        let mut s = ExperimentSpec {
            source: DataSource::File {
                path: path.clone(),
                projection: Projection::Fixed(4),
            },
            method: Method::Fsasc,
            params: FsascParams::new(2),
            trials: 1,
            seed: 0,
        };
        let run = run_trial(&s, 0).unwrap();
        assert_eq!(run.cloud.dim(), 4);
        assert_eq!(run.record.error_pct, Some(0.0));

        s.source = DataSource::File {
            path,
            projection: Projection::Auto,
        };
        assert_eq!(trial_data(&s.source, 2, 0).unwrap().dim(), 6);
        // rank-deficient data are not in general position: every fitted
        // polynomial has a vanishing gradient and no affinity survives
        assert!(run_trial(&s, 0).unwrap_err().is_numerical());
    }
}
