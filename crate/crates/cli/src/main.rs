mod cache;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact gcd statistics, Euler-product constants and Monte Carlo limit-law
/// experiments for random integer samples.
#[derive(Debug, Parser)]
#[command(name = "gcdstat", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build (or load from cache) an arithmetic-function table and print its summary.
    Tables(TablesArgs),
    /// Evaluate one exact finite-n quantity.
    Exact(ExactArgs),
    /// Print every named Euler-product constant with its error bar.
    Constants(ConstantsArgs),
    /// Run seeded replicates of a sample statistic and compare with its limit law.
    Simulate(SimulateArgs),
    /// Run an acceptance suite; exits 1 if any criterion fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Table bound n_max.
    #[arg(long)]
    pub n: u64,
    /// Jordan totient orders to store, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub orders: Vec<u32>,
    /// Cache directory.
    #[arg(long, default_value = ".gcdstat-cache")]
    pub cache: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// gcd distribution of an r-tuple.
    Pmf,
    /// E gcd^q of an r-tuple.
    Moment,
    /// P(gcd(X1, X2) > k).
    Tail,
    /// Marginal probability U(k) = P(gcd(k, X1..Xr) = 1).
    U,
    /// Marginal expectation W(k) = E gcd(k, X1..Xr).
    W,
    /// mu_r = P(gcd of r+1 variables is 1).
    Mu,
    /// nu_r = E gcd of r+1 variables.
    Nu,
    /// Variance of U over k.
    C,
    /// Variance of W over k.
    D,
    /// Covariance of coprimality indicators of r-tuples sharing s variables.
    Gamma,
    /// Covariance of gcd^q of r-tuples sharing s variables.
    Omega,
    /// Mixed second moment pi.
    Pi,
    #[value(name = "meanC")]
    MeanC,
    #[value(name = "varC")]
    VarC,
    #[value(name = "meanZ")]
    MeanZ,
    #[value(name = "varZ")]
    VarZ,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    pub quantity: Quantity,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 2)]
    pub r: u32,
    #[arg(long, default_value_t = 1)]
    pub q: u32,
    /// Number of shared variables (gamma, omega).
    #[arg(long)]
    pub s: Option<u32>,
    /// Sample size (meanC, varC, meanZ, varZ).
    #[arg(long)]
    pub m: Option<u64>,
    /// Argument of U, W and tail.
    #[arg(long)]
    pub k: Option<u64>,
    /// Load or store the table in this cache directory.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Prime cutoff of the truncated Euler products.
    #[arg(long, default_value_t = gcdstat::constants::DEFAULT_CUTOFF)]
    pub cutoff: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticArg {
    /// Coprime r-subsets.
    #[value(name = "C")]
    C,
    /// Sum of gcd^q over r-subsets.
    #[value(name = "Z")]
    Z,
    /// Maximum pair gcd.
    #[value(name = "M")]
    M,
    /// Pairs whose gcd exceeds t * C(m,2).
    #[value(name = "N")]
    N,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub statistic: StatisticArg,
    #[arg(long)]
    pub m: u64,
    /// Range bound: an integer, "m^b" or "exp(m^g)".
    #[arg(long)]
    pub n: String,
    #[arg(long, default_value_t = 2)]
    pub r: u32,
    #[arg(long, default_value_t = 1)]
    pub q: u32,
    #[arg(long, default_value_t = 1000)]
    pub reps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Threshold multiplier for N.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Load or store the table in this cache directory.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Oracle,
    Constants,
    Limits,
    Determinism,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(default_value = "all")]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = gcdstat::constants::DEFAULT_CUTOFF)]
    pub cutoff: u64,
    #[command(flatten)]
    pub common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e.downcast_ref::<gcdstat::Error>().is_some_and(|e| {
                matches!(
                    e,
                    gcdstat::Error::InvalidArgument(_)
                        | gcdstat::Error::OutOfRange { .. }
                        | gcdstat::Error::CostGuard { .. }
                        | gcdstat::Error::Capacity { .. }
                )
            }) || e.downcast_ref::<commands::UsageError>().is_some();
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
