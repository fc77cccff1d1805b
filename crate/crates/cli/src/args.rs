use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Nonnegative matrix factorization under β-divergences.
#[derive(Debug, Parser)]
#[command(name = "drnmf", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize a fixed weighted sum of normalized β-divergences.
    Factorize(FactorizeArgs),
    /// Minimize the largest normalized β-divergence (distributionally robust NMF).
    Dr(SolveArgs),
    /// Sweep the weights of a two-objective problem.
    Pareto(ParetoArgs),
    /// Generate a synthetic low-rank matrix with mixed noise.
    Synth(SynthArgs),
    /// Clustering accuracy and relative errors of a saved model.
    Eval(EvalArgs),
}

/// Options shared by every solving command.
#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Data matrix: CSV (dense) or MatrixMarket coordinate (sparse).
    #[arg(long)]
    pub input: PathBuf,

    #[arg(long)]
    pub rank: usize,

    /// Comma-separated β values.
    #[arg(long, value_delimiter = ',', default_value = "2", allow_negative_numbers = true)]
    pub betas: Vec<f64>,

    #[arg(long, default_value_t = 1000)]
    pub iters: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// `random`, `svd`, or a JSON file holding `rows`, `cols`, `rank`, `w`
    /// and `h` (a saved model or the factors written by `synth --truth`).
    #[arg(long, default_value = "random")]
    pub init: String,

    /// Treat the input as sparse even if it is a CSV file.
    #[arg(long)]
    pub sparse: bool,

    /// Reference errors `e_β`, one per β. Computed from the same
    /// initialization and budget when omitted.
    #[arg(long, value_delimiter = ',')]
    pub ref_errors: Option<Vec<f64>>,

    /// Record every N-th iteration in the trace.
    #[arg(long, default_value_t = 1)]
    pub log_every: usize,

    /// Model file (JSON) for `factorize` and `dr`, with the trace written
    /// next to it as `<stem>.trace.csv`; sweep table (CSV) for `pareto`.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    #[command(flatten)]
    pub solve: SolveArgs,

    /// Comma-separated weights, one per β; renormalized to sum to one.
    /// Uniform when omitted.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ParetoArgs {
    #[command(flatten)]
    pub solve: SolveArgs,

    /// Number of points `λ = (ℓ, 1−ℓ)` for two objectives.
    #[arg(long, default_value_t = 11)]
    pub grid: usize,

    /// Explicit weight vector (comma-separated); repeat for several points.
    /// Replaces the grid, and is required for more than two objectives.
    #[arg(long = "lambda")]
    pub lambdas: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    pub rows: usize,

    #[arg(long, default_value_t = 200)]
    pub cols: usize,

    #[arg(long, default_value_t = 10)]
    pub rank: usize,

    /// `‖N‖_F / ‖W̃H̃‖_F` before clipping.
    #[arg(long, default_value_t = 0.2)]
    pub noise: f64,

    /// Noise families to mix: 0 (multiplicative Gaussian), 1 (Poisson),
    /// 2 (additive Gaussian).
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub noise_betas: Vec<f64>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Dense CSV output.
    #[arg(long)]
    pub output: PathBuf,

    /// Also write the generating factors as JSON, usable with `--init`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// One integer class label per data row.
    #[arg(long)]
    pub labels: Option<PathBuf>,

    /// Recompute the errors against this data instead of using the values
    /// stored in the model.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Write the report as JSON here as well as to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
