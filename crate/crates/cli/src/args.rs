use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use magfit_core::Mode;

#[derive(Debug, Parser)]
#[command(name = "magfit", version, about = "Generate, fit and evaluate multiplicative attribute graph models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample attributes and a graph from a parameter file.
    Generate(GenerateArgs),
    /// Fit model parameters to an edge list by variational EM.
    Fit(FitArgs),
    /// Compare a graph with a model on the network statistics.
    Eval(EvalArgs),
    /// Fit the logistic-regression baseline.
    Baseline(BaselineArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Taylor,
    Fast,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Taylor => Mode::Taylor,
            ModeArg::Fast => Mode::Fast,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub edges: PathBuf,
    /// Attribute table; its columns can be pinned with --fixed or ranked with --select.
    #[arg(long)]
    pub attrs: Option<PathBuf>,
    /// Comma-separated column names or zero-based indices (default: every column of --attrs).
    #[arg(long)]
    pub fixed: Option<String>,
    /// Greedily pick this many of the candidate columns.
    #[arg(long)]
    pub select: Option<usize>,
    /// Attribute count (default: the number of fixed columns, or 4 without any).
    #[arg(long = "L")]
    pub n_attrs: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    /// E-step batch size (default: N L / 10).
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long = "eta-e", default_value_t = 0.05)]
    pub eta_e: f64,
    #[arg(long = "eta-m", default_value_t = 0.01)]
    pub eta_m: f64,
    #[arg(long, default_value_t = 100)]
    pub rounds: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Fast)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker cap. Fitting currently runs on one thread regardless.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub edges: PathBuf,
    /// Parameter file; attributes are sampled from its priors.
    #[arg(long, conflicts_with = "fitted", required_unless_present = "fitted")]
    pub params: Option<PathBuf>,
    /// Output directory of `magfit fit`; its most probable attributes are used.
    #[arg(long)]
    pub fitted: Option<PathBuf>,
    /// Compare against this graph instead of one sampled from the model.
    #[arg(long)]
    pub against: Option<PathBuf>,
    #[arg(long = "k-singular", default_value_t = 50)]
    pub k_singular: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub edges: PathBuf,
    /// Attribute table (default: none, giving the intercept-only model).
    #[arg(long)]
    pub attrs: Option<PathBuf>,
    /// Comma-separated column names or zero-based indices (default: every column).
    #[arg(long)]
    pub fixed: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write into this directory instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
