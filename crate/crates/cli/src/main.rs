use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fsasc::filtration::{FsascParams, DEFAULT_GAMMAS, DEFAULT_MU};
use fsasc::metrics::{EvalReport, TrialMetrics};
use fsasc::pipeline::experiment::TrialRecord;
use fsasc::pipeline::io::{parse_matrix_csv, write_csv, write_matrix_csv};
use fsasc::pipeline::{
    auto_target_dim, cluster, load_cloud, load_labels, pca_project, run_experiment, save_cloud,
    DataSource, ExperimentSpec, Method, Projection,
};
use fsasc::{clustering_error, inter_connectivity, intra_connectivity, sample_cloud, FsascError, SynthConfig};
use serde::Serialize;

const EXIT_ERROR: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "fsasc", version, about = "Subspace clustering with filtrations of vanishing polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a labelled union of random subspaces.
    Synth(SynthArgs),
    /// Cluster one point cloud.
    Cluster(ClusterArgs),
    /// Run repeated seeded experiments and write a report.
    Bench(BenchArgs),
    /// Score predicted labels against ground truth.
    Eval(EvalArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Subspace dimensions, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    dims: Vec<usize>,
    /// Ambient dimension.
    #[arg(long, default_value_t = 5)]
    ambient: usize,
    /// Points per subspace.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Standard deviation of the orthogonal noise.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
}

impl DataArgs {
    fn config(&self, seed: u64) -> SynthConfig {
        SynthConfig {
            ambient_dim: self.ambient,
            dims: self.dims.clone(),
            points_per_subspace: self.points,
            noise_sigma: self.sigma,
            seed,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (.csv or .json); ground truth goes to <stem>.truth.json.
    /// Without it the CSV is printed.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, default_value = "fsasc")]
    method: String,
    /// Number of subspaces.
    #[arg(long)]
    n: Option<usize>,
    /// Smallest accepted cluster size.
    #[arg(long, default_value_t = DEFAULT_MU)]
    mu: usize,
    /// Threshold multipliers, comma separated.
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
}

impl MethodArgs {
    fn resolve(&self, default_n: Option<usize>, seed: u64) -> Result<(Method, FsascParams), FsascError> {
        let method: Method = self.method.parse()?;
        let n = self
            .n
            .or(default_n)
            .ok_or_else(|| FsascError::Contract("--n is required".into()))?;
        Ok((
            method,
            FsascParams {
                n,
                mu: self.mu,
                gammas: self.gammas.clone().unwrap_or_else(|| DEFAULT_GAMMAS.to_vec()),
                seed,
            },
        ))
    }
}

#[derive(Args)]
struct ClusterArgs {
    /// Point cloud (.csv or .json).
    input: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    /// Project onto principal components first: none, auto, or a dimension.
    #[arg(long, default_value = "none")]
    project: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result JSON; printed when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the affinity matrix handed to spectral clustering as CSV.
    #[arg(long)]
    dump_affinity: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Labelled point cloud used in every trial instead of synthetic data.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "none")]
    project: String,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON; the per-trial CSV is written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted labels.
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth labels (labels file or labelled cloud).
    #[arg(long)]
    truth: PathBuf,
    /// Number of clusters; defaults to the largest label plus one.
    #[arg(long)]
    n: Option<usize>,
    /// Affinity CSV for the connectivity scores.
    #[arg(long)]
    affinity: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_projection(s: &str) -> Result<Projection, FsascError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "none" => Ok(Projection::None),
        "auto" => Ok(Projection::Auto),
        other => other
            .parse()
            .map(Projection::Fixed)
            .map_err(|_| FsascError::Contract(format!("--project expects none, auto or a dimension, got {s:?}"))),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), FsascError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<(), FsascError> {
    let cfg = args.data.config(args.seed);
    let c = sample_cloud(&cfg)?;
    match &args.out {
        Some(path) => {
            save_cloud(&c.points, path)?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("cloud");
            fs::write(path.with_file_name(format!("{stem}.truth.json")), c.sidecar_json(&cfg)?)?;
        }
        None => write_csv(&c.points, io::stdout().lock())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ClusterOutput {
    method: Method,
    labels: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chosen_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigengap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    depths: Option<Vec<usize>>,
    params: FsascParams,
    ambient_dim: usize,
}

fn cluster_cmd(args: &ClusterArgs) -> Result<(), FsascError> {
    let mut x = load_cloud(&args.input)?;
    let default_n = x.labels().and_then(|l| l.iter().max()).map(|m| m + 1);
    let (method, params) = args.method.resolve(default_n, args.seed)?;
    x = match parse_projection(&args.project)? {
        Projection::None => x,
        Projection::Fixed(d) => pca_project(&x, d)?,
        Projection::Auto => {
            let d = auto_target_dim(params.n, x.len(), x.dim().min(x.len()))?;
            pca_project(&x, d)?
        }
    };
    let out = cluster(&x, method, &params)?;
    if let Some(path) = &args.dump_affinity {
        let w = out.affinity.as_ref().ok_or_else(|| {
            FsascError::Contract(format!("method {method} builds no affinity matrix"))
        })?;
        let mut buf = Vec::new();
        write_matrix_csv(w, &mut buf)?;
        fs::write(path, buf)?;
    }
    let result = ClusterOutput {
        method,
        labels: out.labels,
        chosen_gamma: out.chosen_gamma,
        eigengap: out.eigengap,
        depths: out.depths,
        params,
        ambient_dim: x.dim(),
    };
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&result)?)
}

fn bench(args: &BenchArgs) -> Result<(), FsascError> {
    let source = match &args.input {
        Some(path) => DataSource::File {
            path: path.clone(),
            projection: parse_projection(&args.project)?,
        },
        None => DataSource::Synthetic(args.data.config(args.seed)),
    };
    let default_n = args.input.is_none().then_some(args.data.dims.len());
    let (method, params) = args.method.resolve(default_n, args.seed)?;
    let spec = ExperimentSpec {
        source,
        method,
        params,
        trials: args.trials,
        seed: args.seed,
    };
    let report = run_experiment(&spec)?;
    match &args.out {
        Some(path) => {
            report.save(path)?;
        }
        None => emit(None, &report.to_json()?)?,
    }
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.2}"));
    eprintln!(
        "{method}: error {}%  intra {}  inter {}  failures {}/{}",
        fmt(report.mean_error_pct),
        fmt(report.intra_pct),
        fmt(report.inter_pct),
        report.failures,
        report.trials
    );
    if report.failures == report.trials {
        let first = report.per_trial.iter().find_map(|r: &TrialRecord| r.failure.clone());
        return Err(FsascError::Numerical(format!(
            "every trial failed; first failure: {}",
            first.unwrap_or_default()
        )));
    }
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<(), FsascError> {
    let pred = load_labels(&args.pred)?;
    let truth = load_labels(&args.truth)?;
    let top = pred.iter().chain(&truth).max().map_or(1, |m| m + 1);
    let n = args.n.unwrap_or(top);
    let error_pct = clustering_error(&pred, &truth, n)?;
    let (intra_pct, inter_pct) = match &args.affinity {
        Some(path) => {
            let w = parse_matrix_csv(&fs::read_to_string(path)?)?;
            (intra_connectivity(&w, &truth)?, inter_connectivity(&w, &truth)?)
        }
        None => (f64::NAN, f64::NAN),
    };
    let metrics = TrialMetrics {
        error_pct,
        intra_pct,
        inter_pct,
    };
    let report = EvalReport::from_trials(&[metrics], false);
    let json = if args.affinity.is_some() {
        report.to_json()?
    } else {
        serde_json::to_string_pretty(&serde_json::json!({ "error_pct": report.error_pct }))?
    };
    emit(args.out.as_deref(), &json)
}

fn exit_code(e: &FsascError) -> u8 {
    if e.is_parse_error() {
        EXIT_PARSE
    } else if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_ERROR
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_PARSE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Cluster(a) => cluster_cmd(a),
        Command::Bench(a) => bench(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
