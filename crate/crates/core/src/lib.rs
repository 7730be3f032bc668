//! Sparse mean-variance portfolio selection.
//!
//! The solver minimizes `½ xᵀCx + λ‖x‖₁` subject to a target expected return
//! and a full-investment budget, using ADMM on the splitting `x − z = 0`.
//! The penalty parameter ρ can be held fixed or adapted by residual
//! balancing, a safeguarded spectral (Barzilai-Borwein) rule, or a
//! regularized BB rule whose regularization follows the residual ratio. The
//! ℓ1 weight λ can be raised adaptively until the number of short positions
//! falls to an investor-chosen threshold.
//!
//! Small instances can be solved exactly by [`oracle::enumerate_solve`],
//! which enumerates sign patterns of the optimality system.

pub mod admm;
pub mod error;
pub mod kkt;
pub mod lambda;
pub mod market_data;
pub mod model;
pub mod oracle;
pub mod penalty;

pub use admm::{solve, SolveResult, SolverConfig, Termination};
pub use error::{Error, Result};
pub use lambda::{initial_lambda, LambdaMode, LambdaSchedule};
pub use market_data::{estimate_stats, load_returns_csv, AssetStats, ReturnsMatrix};
pub use model::{build_problem, Portfolio, PortfolioProblem};
pub use penalty::{PenaltyConfig, PenaltyKind};

/// Weights with magnitude at or below this are treated as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;
