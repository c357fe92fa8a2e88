use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "gsbm-lab", version, about = "Characteristic tensors, low coordinate degree bounds and exact oracles for generalized stochastic block models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Audit a model, compute its marginal profile and threshold verdicts.
    Analyze(CommonArgs),
    /// Evaluate the advantage bounds (or the multi-frequency series with --lambda).
    Bound(CommonArgs),
    /// Run the brute-force inequality chain on small instances.
    Verify(CommonArgs),
    /// Draw a null or planted instance.
    Sample(CommonArgs),
    /// Compare Pearson chi-squared tails and moments with their bounds.
    Concentrate(CommonArgs),
    /// `bound` over a parameter grid given by --sweep.
    Sweep(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Bound(_) => "bound",
            Command::Verify(_) => "verify",
            Command::Sample(_) => "sample",
            Command::Concentrate(_) => "concentrate",
            Command::Sweep(_) => "sweep",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Analyze(a)
            | Command::Bound(a)
            | Command::Verify(a)
            | Command::Sample(a)
            | Command::Concentrate(a)
            | Command::Sweep(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Enumerate when within budget, otherwise Monte Carlo.
    Auto,
    Exact,
    Mc,
    /// Injective-norm relaxation in the centered-count form.
    Corollary,
    /// Injective-norm relaxation in the Pearson form.
    CorollaryChi2,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Model: JSON file, inline JSON, or shorthand like `sbm:k=2,alpha=3,beta=1`.
    #[arg(long)]
    pub model: Option<String>,
    /// Population size.
    #[arg(long)]
    pub n: Option<u64>,
    /// Coordinate degree.
    #[arg(long = "D", id = "degree")]
    #[serde(rename = "D")]
    pub degree: Option<u32>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Noise level for models that take one.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Sets eta = gamma / sqrt(n).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Multi-frequency series strength (bound/sweep).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Number of communities for the multi-frequency series.
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of bins for `concentrate`.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Parameter grid `param:start:stop:steps`, param in D, n, gamma, eta, lambda.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
    /// Draw a planted instance (`sample`).
    #[arg(long)]
    pub planted: bool,
    /// Only the smallest instances (`verify`).
    #[arg(long)]
    pub quick: bool,
    /// Negate one entry of the characteristic tensor before the chain check (`verify`).
    #[arg(long)]
    pub mutate: bool,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Tolerances and constants as `name=value`, repeatable: zero_tol,
    /// audit_tol, eps, c, C, delta, enum_budget, envelope_c, envelope_decay.
    #[arg(long = "tol", value_parser = parse_tol)]
    #[serde(skip)]
    pub tol: Vec<(String, f64)>,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("{v:?} is not a number"))?;
    Ok((k.trim().to_string(), v))
}

impl CommonArgs {
    pub fn tolerances(&self) -> BTreeMap<String, f64> {
        self.tol.iter().cloned().collect()
    }
}
