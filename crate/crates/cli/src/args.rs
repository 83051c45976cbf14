//! Command-line and config-file arguments.
//!
//! Every option is optional here so that flags, the config file and the
//! built-in defaults can be layered; `resolve` fills the gaps.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "maxcop", version, about = "Largest-claim mixture copula experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct GlobalArgs {
    /// Master random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Primary output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML file with top-level global keys and one table per subcommand.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Full-precision CSV.
    Csv,
    /// Full-precision JSON.
    Json,
    /// Rounded human-readable table.
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a grid of copula models to a dataset and rank them by AIC.
    Fit(FitArgs),
    /// Simulate a synthetic loss/expense dataset.
    Simulate(SimulateArgs),
    /// Dependence measures of a dataset, or the τ/ρ_S study of a mixture.
    Dependence(DependenceArgs),
    /// Influence of the largest claims on the aggregate loss.
    Influence(InfluenceArgs),
    /// Excess-of-loss or stop-loss reinsurance premiums.
    Premium(PremiumArgs),
    /// Descriptive statistics of a dataset.
    Summarize(SummarizeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fit(_) => "fit",
            Command::Simulate(_) => "simulate",
            Command::Dependence(_) => "dependence",
            Command::Influence(_) => "influence",
            Command::Premium(_) => "premium",
            Command::Summarize(_) => "summarize",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Loss column name (default "loss").
    #[arg(long)]
    pub loss_col: Option<String>,
    /// Expense column name (default "alae").
    #[arg(long)]
    pub alae_col: Option<String>,
    /// Censoring flag column (1 = observed, 0 = censored).
    #[arg(long)]
    pub censor_col: Option<String>,
    /// Policy limit column.
    #[arg(long)]
    pub limit_col: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    /// Base copula family: independence, gumbel, frank, joe, clayton, student.
    #[arg(long)]
    pub base: Option<String>,
    /// Base parameter α (ρ for the Student family).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Student degrees of freedom.
    #[arg(long)]
    pub dof: Option<f64>,
    /// Mixing model: shifted-geometric, shifted-poisson, truncated-poisson or none.
    #[arg(long)]
    pub mixing: Option<String>,
    /// Mixing parameter θ.
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct MarginArgs {
    /// Loss margin: uniform, pareto:SCALE:SHAPE, or empirical (from --data).
    #[arg(long)]
    pub margin_x: Option<String>,
    /// Expense margin, same syntax.
    #[arg(long)]
    pub margin_y: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct CountArgs {
    /// Claim-count law: poisson, fixed, shifted-geometric, shifted-poisson, truncated-poisson.
    #[arg(long)]
    pub count: Option<String>,
    /// Poisson mean, fixed count, or mixing θ.
    #[arg(long)]
    pub count_param: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    /// Comma-separated families (default gumbel,frank,student,joe).
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    /// Comma-separated mixing models, or "none" for bare families only.
    #[arg(long, value_delimiter = ',')]
    pub mixing: Option<Vec<String>>,
    /// Optimizer starts per model.
    #[arg(long)]
    pub starts: Option<u32>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub margins: MarginArgs,
    /// Number of pairs.
    #[arg(long)]
    pub n: Option<usize>,
    /// Censor losses at this quantile of the loss margin.
    #[arg(long)]
    pub censor_quantile: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DependenceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Mixing means E[Λ] for the convergence study.
    #[arg(long, value_delimiter = ',')]
    pub elambda: Option<Vec<f64>>,
    /// Pairs per study cell.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Quantile for the empirical upper tail coefficient.
    #[arg(long)]
    pub tail_quantile: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct InfluenceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub margins: MarginArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub count: CountArgs,
    /// Replications.
    #[arg(long)]
    pub b: Option<usize>,
    /// Confidence level of VaR and TVaR.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreatyArg {
    ExcessOfLoss,
    StopLoss,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct PremiumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub margins: MarginArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub count: CountArgs,
    #[arg(long, value_enum)]
    pub treaty: Option<TreatyArg>,
    /// Comma-separated retentions (excess of loss).
    #[arg(long, value_delimiter = ',')]
    pub retentions: Option<Vec<f64>>,
    /// Comma-separated deductibles (stop loss).
    #[arg(long, value_delimiter = ',')]
    pub deductibles: Option<Vec<f64>>,
    /// Replications.
    #[arg(long)]
    pub b: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SummarizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
}
