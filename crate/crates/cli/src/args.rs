//! Command-line surface. Parsing only; resolution lives in `experiment`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Online linear classifiers for class-imbalanced streams.
#[derive(Debug, Parser)]
#[command(name = "brook", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm through the seeded shuffle-and-replay protocol.
    Run(RunArgs),
    /// Compare algorithms on identical shuffled streams.
    Bench(BenchArgs),
    /// Sweep one hyperparameter on a validation prefix.
    Tune(TuneArgs),
    /// Write a synthetic dataset to a sparse-format file.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Algorithm name, e.g. perceptron, pa1, ogd, csogd, arow, scw, arcsmc.
    #[arg(long)]
    pub algo: String,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub learner: LearnerArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated algorithm names; all consume the same shuffles.
    #[arg(long, value_delimiter = ',', required = true)]
    pub algo: Vec<String>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub learner: LearnerArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Algorithm whose primary knob the grid moves.
    #[arg(long)]
    pub algo: String,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<f64>,
    /// Fraction of the data reserved as the validation prefix.
    #[arg(long, default_value_t = 0.2)]
    pub val_fraction: f64,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub learner: LearnerArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// JSON stream spec: classes, dim, samples, priors, noise, flip, seed.
    #[arg(long)]
    pub synth: PathBuf,
    /// Destination file.
    #[arg(long)]
    pub out: PathBuf,
}

/// Where the stream comes from.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset file to load.
    #[arg(long, conflicts_with = "synth")]
    pub data: Option<PathBuf>,
    /// On-disk format of --data.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Name of the CSV label column.
    #[arg(long, default_value = "label")]
    pub label_col: String,
    /// Label space of the task; must match what the data carries.
    #[arg(long, value_enum, default_value_t = TaskArg::Binary)]
    pub task: TaskArg,
    /// Comma-separated label tokens read as the positive class (binary CSV).
    #[arg(long, value_delimiter = ',')]
    pub positive: Vec<String>,
    /// Comma-separated token=id pairs covering classes 1..=k (multiclass CSV).
    #[arg(long, value_delimiter = ',')]
    pub class_map: Vec<String>,
    /// Feature dimension override for sparse files whose tail columns are
    /// all zero.
    #[arg(long)]
    pub dim: Option<usize>,
    /// JSON stream spec generated in memory instead of loading --data.
    #[arg(long)]
    pub synth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Binary,
    Multiclass,
}

/// Knobs forwarded to the learner. Unset knobs keep library defaults;
/// explicit flags beat values derived from --cost.
#[derive(Debug, Args)]
pub struct LearnerArgs {
    /// Update-size cap for capped-margin and soft confidence updates.
    #[arg(long)]
    pub aggressiveness: Option<f64>,
    /// Confidence regularizer for adaptive second-order updates.
    #[arg(long)]
    pub regularizer: Option<f64>,
    /// Base rate for gradient updates (decays with the round number).
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Fixed positive-class margin target for cost-sensitive binary
    /// learners; unset tracks the running class ratio.
    #[arg(long)]
    pub imbalance_weight: Option<f64>,
    /// Confidence level in (0.5, 1) for confidence-weighted updates.
    #[arg(long)]
    pub confidence: Option<f64>,
    /// Approximation level in (0, 1] for margin-pursuit updates.
    #[arg(long)]
    pub margin_slack: Option<f64>,
    /// Covariance storage for second-order learners.
    #[arg(long, value_enum, default_value_t = CovArg::Diag)]
    pub cov: CovArg,
    /// Where misclassification costs come from for cost-sensitive learners.
    #[arg(long, value_enum, default_value_t = CostArg::InverseCount)]
    pub cost: CostArg,
    /// JSON file with explicit cost rows; goes with --cost file.
    #[arg(long)]
    pub cost_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CovArg {
    Diag,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostArg {
    /// Every mistake costs one.
    Unit,
    /// Costs inversely proportional to class counts.
    InverseCount,
    /// Explicit matrix from --cost-file.
    File,
}

/// Experiment protocol knobs. The master seed also honors the BROOK_SEED
/// environment variable when the flag is absent.
#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Number of independently shuffled trials.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Master seed; trial i shuffles with seed + i. Beats BROOK_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Snapshot the learning curve every this many rounds.
    #[arg(long, default_value_t = 100)]
    pub stride: usize,
    /// Weight on sensitivity in the weighted sum; specificity gets the
    /// complement.
    #[arg(long, default_value_t = 0.5)]
    pub eta_p: f64,
    /// Directory the artifacts are written into.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}
