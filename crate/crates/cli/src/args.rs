//! Command-line grammar and its validated form.

use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ordgap::defaults;
use ordgap::{Error, Method, QuadratureConfig, Result};

#[derive(Debug, Parser)]
#[command(
    name = "ordgap",
    version,
    about = "Expected gaps between consecutive order statistics",
    after_help = "Distributions: name:key=value,... (see `ordgap dist-list`)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gap values R_n (or general gaps with --k) by one or more methods
    Gaps(RunArgs),
    /// Monotonicity, log-convexity and complete-monotonicity verdicts
    Check(RunArgs),
    /// Monte Carlo gap estimates
    Mc(RunArgs),
    /// Quantile-hazard approximation R_n ≈ 1/λ(x_n)
    Approx(RunArgs),
    /// List built-in distributions
    DistList(OutputArgs),
    /// Evaluate F, 1-F, φ, λ and 1/λ at points
    DistProbe(ProbeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long = "out", value_enum, default_value = "csv")]
    pub out: OutputFormat,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Distribution, e.g. exp:lambda=1,L=0
    #[arg(long)]
    pub dist: String,
    /// Inclusive range A..B, or a single n
    #[arg(long, default_value_t = format!("{}..{}", defaults::N_MIN, defaults::N_MAX))]
    pub n: String,
    /// Lower order-statistic index of the gap X_{k+1:n} - X_{k:n}
    #[arg(long)]
    pub k: Option<u64>,
    /// Comma-separated: direct, stieltjes, continuous, mc
    #[arg(long, default_value = "direct")]
    pub method: String,
    /// Real argument for the continuous extension
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long, default_value_t = defaults::MC_SAMPLES)]
    pub samples: u64,
    #[arg(long, default_value_t = defaults::MC_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = defaults::MC_SHARDS)]
    pub shards: usize,
    #[arg(long = "max-order", default_value_t = defaults::MAX_ORDER)]
    pub max_order: usize,
    #[arg(long = "rel-tol", default_value_t = defaults::REL_TOL)]
    pub rel_tol: f64,
    #[arg(long = "tail-mass", default_value_t = defaults::TAIL_MASS)]
    pub tail_mass: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub dist: String,
    /// Comma-separated evaluation points
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Gaps,
    Check,
    Mc,
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McParams {
    pub samples: u64,
    pub seed: u64,
    pub shards: usize,
}

/// Validated settings for one run of a computing command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub dist_spec: String,
    pub n_range: RangeInclusive<u64>,
    pub k: Option<u64>,
    /// Sorted, without duplicates.
    pub methods: Vec<Method>,
    pub u: Option<f64>,
    pub quadrature: QuadratureConfig,
    pub mc: McParams,
    pub max_order: usize,
    pub output: OutputFormat,
    pub output_path: Option<PathBuf>,
}

/// Parses `A..B`, `A..=B` or a single integer.
pub fn parse_n_range(text: &str) -> Result<RangeInclusive<u64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| Error::Parse(format!("bad n in range {text:?}")))
    };
    let range = match text.split_once("..") {
        Some((a, b)) => num(a)?..=num(b.strip_prefix('=').unwrap_or(b))?,
        None => {
            let n = num(text)?;
            n..=n
        }
    };
    if range.is_empty() {
        return Err(Error::Parse(format!("empty n range {text:?}")));
    }
    Ok(range)
}

pub fn parse_methods(text: &str) -> Result<Vec<Method>> {
    let mut methods = text
        .split(',')
        .map(|m| m.parse::<Method>())
        .collect::<Result<Vec<_>>>()?;
    methods.sort();
    methods.dedup();
    Ok(methods)
}

impl RunConfig {
    pub fn from_args(command: CommandKind, a: &RunArgs) -> Result<Self> {
        let quadrature = QuadratureConfig {
            rel_tol: a.rel_tol,
            tail_mass: a.tail_mass,
            ..QuadratureConfig::default()
        };
        quadrature.validate()?;
        let n_range = parse_n_range(&a.n)?;
        if *n_range.start() < 1 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        let methods = parse_methods(&a.method)?;
        if command == CommandKind::Check && methods.len() != 1 {
            return Err(Error::InvalidArgument(
                "check takes exactly one --method".into(),
            ));
        }
        if a.samples == 0 || a.shards == 0 {
            return Err(Error::InvalidArgument(
                "--samples and --shards must be >= 1".into(),
            ));
        }
        Ok(Self {
            command,
            dist_spec: a.dist.clone(),
            n_range,
            k: a.k,
            methods,
            u: a.u,
            quadrature,
            mc: McParams {
                samples: a.samples,
                seed: a.seed,
                shards: a.shards,
            },
            max_order: a.max_order,
            output: a.output.out,
            output_path: a.output.output.clone(),
        })
    }
}
