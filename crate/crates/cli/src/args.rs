//! Command-line flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use portfolio_admm::admm::{DualFloor, ShortCountSource};
use portfolio_admm::penalty::PenaltyKind;

#[derive(Debug, Parser)]
#[command(name = "portfolio-admm", version, about = "Sparse mean-variance portfolios by adaptive ADMM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic returns CSV.
    Gen(GenArgs),
    /// Solve one portfolio problem and print the result as JSON.
    Solve(SolveArgs),
    /// Sweep target returns and print one CSV row per point.
    Frontier(FrontierArgs),
    /// Compare penalty strategies on a generated suite.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of assets (columns).
    #[arg(long, default_value_t = 10)]
    pub assets: usize,
    /// Number of return periods (rows).
    #[arg(long, default_value_t = 200)]
    pub periods: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Number of latent factors in the return model.
    #[arg(long, default_value_t = 3)]
    pub factors: usize,
    /// Standard deviation of the idiosyncratic noise.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    /// Generate returns whose sample covariance has exactly this condition
    /// number instead of using the factor model.
    #[arg(long)]
    pub condition: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Fixed,
    Rb,
    Bb,
    Rbb,
}

impl From<Strategy> for PenaltyKind {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Fixed => PenaltyKind::Fixed,
            Strategy::Rb => PenaltyKind::ResidualBalancing,
            Strategy::Bb => PenaltyKind::SpectralBb,
            Strategy::Rbb => PenaltyKind::RegularizedBb,
        }
    }
}

/// `auto` for `1/(mn)` or an explicit nonnegative value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaArg {
    Auto,
    Value(f64),
}

impl FromStr for LambdaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(LambdaArg::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => Ok(LambdaArg::Value(v)),
            _ => Err(format!("expected `auto` or a nonnegative number, got `{s}`")),
        }
    }
}

impl fmt::Display for LambdaArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaArg::Auto => f.write_str("auto"),
            LambdaArg::Value(v) => write!(f, "{v}"),
        }
    }
}

/// `gradient` for `‖Cx‖` or an explicit nonnegative value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualFloorArg(pub DualFloor);

impl FromStr for DualFloorArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("gradient") {
            return Ok(Self(DualFloor::GradientScale));
        }
        match s.parse::<f64>() {
            Ok(v) if v >= 0.0 && v.is_finite() => Ok(Self(DualFloor::Absolute(v))),
            _ => Err(format!("expected `gradient` or a nonnegative number, got `{s}`")),
        }
    }
}

impl fmt::Display for DualFloorArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            DualFloor::GradientScale => f.write_str("gradient"),
            DualFloor::Absolute(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShortSource {
    X,
    Z,
}

impl From<ShortSource> for ShortCountSource {
    fn from(s: ShortSource) -> Self {
        match s {
            ShortSource::X => ShortCountSource::X,
            ShortSource::Z => ShortCountSource::Z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RbbAlphaDual {
    /// Intermediate dual ȳ.
    Ybar,
    /// Updated dual y.
    Y,
}

/// Solver settings shared by `solve` and `frontier`.
#[derive(Debug, Clone, Args)]
pub struct SolverFlags {
    #[arg(long, value_enum, default_value_t = Strategy::Rbb)]
    pub strategy: Strategy,
    /// Regularization weight: `auto` uses 1/(periods·assets).
    #[arg(long, default_value_t = LambdaArg::Auto)]
    pub lambda: LambdaArg,
    /// Raise λ while the short count exceeds --sn.
    #[arg(long)]
    pub adaptive_lambda: bool,
    /// Tolerated number of short positions.
    #[arg(long, default_value_t = 0)]
    pub sn: usize,
    /// Cap on adaptive λ increases.
    #[arg(long, default_value_t = 50)]
    pub max_adjustments: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    /// Initial penalty parameter.
    #[arg(long, default_value_t = 1.0)]
    pub rho0: f64,
    /// Exponent of the residual ratio in the regularized BB rule.
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    /// Penalty update period.
    #[arg(long, default_value_t = 2)]
    pub nbar: usize,
    /// Residual-balancing growth factor.
    #[arg(long, default_value_t = 2.0)]
    pub eta: f64,
    /// Residual-balancing imbalance threshold.
    #[arg(long, default_value_t = 10.0)]
    pub mu_rb: f64,
    /// Correlation threshold of the spectral safeguard.
    #[arg(long, default_value_t = 0.2)]
    pub eps_corr: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub rho_min: f64,
    #[arg(long, default_value_t = 1e8)]
    pub rho_max: f64,
    /// Last iteration at which the penalty may change.
    #[arg(long, default_value_t = 1000)]
    pub freeze_after: usize,
    /// Residual balancing on raw residual norms instead of scaled ones.
    #[arg(long)]
    pub rb_raw_residuals: bool,
    /// Dual used on the α side of the regularized BB rule.
    #[arg(long, value_enum, default_value_t = RbbAlphaDual::Ybar)]
    pub rbb_alpha_dual: RbbAlphaDual,
    /// Iterate whose negative entries count as short positions.
    #[arg(long, value_enum, default_value_t = ShortSource::Z)]
    pub short_source: ShortSource,
    /// Lower bound for ‖y‖ in the dual stopping test: `gradient` or a number.
    #[arg(long, default_value_t = DualFloorArg(DualFloor::GradientScale))]
    pub dual_floor: DualFloorArg,
    /// Magnitude at or below which a weight counts as zero.
    #[arg(long, default_value_t = 1e-9)]
    pub zero_tol: f64,
    /// Smallest covariance eigenvalue accepted before diagonal jitter.
    #[arg(long, default_value_t = 1e-10)]
    pub jitter_floor: f64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Returns CSV (header row of asset names, one row per period).
    #[arg(long)]
    pub input: PathBuf,
    /// Target expected return e.
    #[arg(long)]
    pub target_return: f64,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Include per-iteration residual, ρ and λ histories.
    #[arg(long)]
    pub history: bool,
    /// Accepted for scripts that pass it. Solving draws no random numbers,
    /// so the output never depends on a seed either way.
    #[arg(long)]
    pub seed_independent: bool,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Number of target returns.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// Lowest target return; defaults to the smallest asset mean.
    #[arg(long)]
    pub e_min: Option<f64>,
    /// Highest target return; defaults to the largest asset mean.
    #[arg(long)]
    pub e_max: Option<f64>,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Factor-model returns, fixed λ₀.
    Random,
    /// Sample covariance with condition number 1e6, fixed λ₀.
    Illcond,
    /// Long samples whose λ₀ solution holds shorts; adaptive λ with sn = 0.
    Shorts,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Suite::Random)]
    pub suite: Suite,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
