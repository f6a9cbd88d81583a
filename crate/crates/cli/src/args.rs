use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "nclp", version, about = "Randomized verification of a trace inequality for positive matrices")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the full check campaign and write a JSON (or CSV) report.
    Verify(CampaignArgs),
    /// Minimum normalized theorem gap per (dim, p) cell, as CSV.
    Sweep(CampaignArgs),
    /// Two-atom search for a contraction failure with p in [1, 2).
    Counterexample(CounterexampleArgs),
    /// Compare the four Fréchet derivative routes on a random instance.
    Derivative(DerivativeArgs),
    /// Diagnostics of a generator, its resolvents and the defect inequality.
    Semigroup(SemigroupArgs),
    /// Evaluate one lab operation on inline JSON operands.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct CampaignArgs {
    /// Master seed (falls back to the config file, then NCLP_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long = "p-grid", value_delimiter = ',', allow_negative_numbers = true)]
    pub p_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// JSON campaign config; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Append a deliberately invalid instance to exercise failure reporting.
    #[arg(long)]
    pub inject_fault: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CounterexampleArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub p: f64,
    /// Maximum number of ratio evaluations.
    #[arg(long, default_value_t = 8192)]
    pub budget: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct DerivativeArgs {
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 3.5, allow_negative_numbers = true)]
    pub p: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SemigroupArgs {
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Generator as JSON, e.g. `{"kind":"pinching","expectation":{"kind":"blocks","sizes":[1,2]}}`;
    /// defaults to two random unitaries with rates 1 and 0.5.
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub p: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    /// One of: theorem_gap, classical_pointwise, duality, corollary1, case1b,
    /// case2_identity, case2_chain, alt_proof.
    pub op: String,
    /// Operands as a JSON object; matrices use `{"dim":N,"re":[[..]],"im":[[..]]}`.
    pub operands: String,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}
