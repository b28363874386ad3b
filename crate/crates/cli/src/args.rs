use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "gaussdiv",
    version,
    about = "Divergences between Gaussian summaries and resampling two-sample tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance between two samples (CSV) or two Gaussian summaries (JSON).
    Dist(DistArgs),
    /// ROC curve of H0 against H1 pseudo-pair distances.
    Roc(RocArgs),
    /// AUC of every grid value and the selected parameter.
    Select(SelectArgs),
    /// Resampling test of equal mean and covariance.
    Test(TestArgs),
    /// Simulation of the two covariance presets.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// First input: CSV sample, or a `.json` summary.
    #[arg(long)]
    pub x: PathBuf,
    /// Second input; defaults to the file of `--x` (with `--y-class`).
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// CSV files start with a header row.
    #[arg(long)]
    pub header: bool,
    /// Zero-based column holding class labels.
    #[arg(long)]
    pub class_column: Option<usize>,
    /// Class label selecting the first sample.
    #[arg(long)]
    pub x_class: Option<String>,
    /// Class label selecting the second sample.
    #[arg(long)]
    pub y_class: Option<String>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    /// kl, js, bhattacharyya, logphi-p-jb, logphi-p-br, logsimplicial-jb,
    /// logsimplicial-br or energy.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Accept p < 0 for the log φ_p families.
    #[arg(long)]
    pub allow_negative_p: bool,
    /// Handling of eigenvalues near zero in negative or fractional powers.
    #[arg(long, value_enum, default_value_t = FloorArg::Reject)]
    pub floor: FloorArg,
    /// Unbiased Φ_k estimator in log-simplicial Burbea–Rao terms.
    #[arg(long)]
    pub unbiased_simplicial: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FloorArg {
    Reject,
    Clamp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Subsample,
    Bootstrap,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    /// Number of pseudo pairs per hypothesis (default: size of the first sample).
    #[arg(long = "N")]
    pub n_pairs: Option<usize>,
    /// Points discarded per sample when subsampling.
    #[arg(long, default_value_t = 5)]
    pub r: usize,
    #[arg(long, value_enum, default_value_t = SchemeArg::Subsample)]
    pub scheme: SchemeArg,
    /// Master seed; required for reproducibility.
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub distance: DistanceArgs,
    /// Write the first input's Gaussian summary as JSON.
    #[arg(long)]
    pub x_summary_out: Option<PathBuf>,
    /// Write the second input's Gaussian summary as JSON.
    #[arg(long)]
    pub y_summary_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RocArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub distance: DistanceArgs,
    #[command(flatten)]
    pub resample: ResampleArgs,
    /// ROC CSV (`threshold,fpr,tpr`); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub distance: DistanceArgs,
    #[command(flatten)]
    pub resample: ResampleArgs,
    /// Comma-separated candidate values, or `default`.
    #[arg(long, default_value = "default")]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub distance: DistanceArgs,
    #[command(flatten)]
    pub resample: ResampleArgs,
    /// Select the parameter by AUC over these values (comma-separated, or
    /// `default`) instead of fixing it.
    #[arg(long, num_args = 0..=1, default_missing_value = "default")]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub significance: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Preset 1 (scaled block) or 2 (rotated block).
    #[arg(long)]
    pub example: u8,
    /// α for preset 1, θ for preset 2.
    #[arg(long)]
    pub param: f64,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(long, default_value_t = 20)]
    pub d: usize,
    /// Distance as `family` or `family:param`; repeatable.
    #[arg(long = "distance")]
    pub distances: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    pub significance: f64,
    #[arg(long)]
    pub seed: u64,
    /// Also run full resampling tests and report their rejection rates.
    #[arg(long)]
    pub rates: bool,
    /// Family whose parameter is selected inside each test; repeatable.
    #[arg(long = "select")]
    pub select: Vec<String>,
    #[arg(long = "N")]
    pub n_pairs: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub r: usize,
    #[arg(long, value_enum, default_value_t = SchemeArg::Subsample)]
    pub scheme: SchemeArg,
    /// Directory receiving one ROC CSV per distance.
    #[arg(long)]
    pub roc_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
