//! Serialized forms of solver results.

use serde::Serialize;

use portfolio_admm::admm::{DualFloor, History, SolveResult, SolverConfig};
use portfolio_admm::{AssetStats, PortfolioProblem};

/// Top-level JSON document written by `solve`.
#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub termination: &'static str,
    pub lambda_initial: f64,
    pub lambda_final: f64,
    pub rho_final: f64,
    pub short_count: usize,
    pub config_echo: ConfigEcho,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history: Option<HistoryArrays>,
}

/// Every setting that influenced the run.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub input: String,
    pub target_return: f64,
    pub strategy: &'static str,
    pub lambda_mode: &'static str,
    pub lambda_start: f64,
    pub sn: usize,
    pub max_adjustments: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub rho0: f64,
    pub q: f64,
    pub nbar: usize,
    pub eta: f64,
    pub mu_rb: f64,
    pub eps_corr: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub tau_max: f64,
    pub freeze_after: usize,
    pub rb_relative: bool,
    pub rbb_alpha_uses_ybar: bool,
    pub short_source: &'static str,
    pub dual_floor: String,
    pub zero_tol: f64,
    pub jitter_floor: f64,
}

impl ConfigEcho {
    pub fn new(cfg: &SolverConfig, input: String, target_return: f64, jitter_floor: f64) -> Self {
        let p = &cfg.penalty;
        Self {
            input,
            target_return,
            strategy: p.kind.as_str(),
            lambda_mode: cfg.lambda.mode.as_str(),
            lambda_start: cfg.lambda.current,
            sn: cfg.lambda.sn,
            max_adjustments: cfg.lambda.max_adjustments,
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            rho0: p.rho0,
            q: p.q,
            nbar: p.nbar,
            eta: p.eta,
            mu_rb: p.mu_rb,
            eps_corr: p.eps_corr,
            rho_min: p.rho_min,
            rho_max: p.rho_max,
            tau_max: p.tau_max,
            freeze_after: p.freeze_after,
            rb_relative: p.rb_relative,
            rbb_alpha_uses_ybar: p.rbb_alpha_uses_ybar,
            short_source: match cfg.short_source {
                portfolio_admm::admm::ShortCountSource::X => "x",
                portfolio_admm::admm::ShortCountSource::Z => "z",
            },
            dual_floor: match cfg.dual_floor {
                DualFloor::GradientScale => "gradient".to_string(),
                DualFloor::Absolute(v) => v.to_string(),
            },
            zero_tol: cfg.zero_tol,
            jitter_floor,
        }
    }
}

/// Quantities that describe the final iterate and the input data.
#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub assets: Vec<String>,
    pub periods: usize,
    pub covariance_jitter: f64,
    pub lambda_adjustments: usize,
    pub nonzeros: usize,
    pub l1_norm: f64,
    pub risk: f64,
    pub r_norm: f64,
    pub d_norm: f64,
    pub consensus_gap: f64,
    pub return_violation: f64,
    pub budget_violation: f64,
}

#[derive(Debug, Serialize)]
pub struct HistoryArrays {
    pub r_norm: Vec<f64>,
    pub d_norm: Vec<f64>,
    pub rho: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl From<History> for HistoryArrays {
    fn from(h: History) -> Self {
        Self {
            r_norm: h.r_norm,
            d_norm: h.d_norm,
            rho: h.rho,
            lambda: h.lambda,
        }
    }
}

impl SolveReport {
    pub fn new(
        result: SolveResult,
        problem: &PortfolioProblem,
        stats: &AssetStats,
        asset_names: &[String],
        config_echo: ConfigEcho,
    ) -> Self {
        let x = &result.weights.weights;
        let (return_violation, budget_violation) = problem
            .constraint_violation(x)
            .expect("weights match the problem size");
        let diagnostics = Diagnostics {
            assets: asset_names.to_vec(),
            periods: stats.periods,
            covariance_jitter: stats.jitter_applied,
            lambda_adjustments: result.lambda_adjustments,
            nonzeros: result.weights.nonzero_count(),
            l1_norm: result.weights.l1_norm(),
            risk: problem.risk(x).expect("weights match the problem size"),
            r_norm: result.r_norm,
            d_norm: result.d_norm,
            consensus_gap: result.consensus_gap(),
            return_violation,
            budget_violation,
        };
        Self {
            weights: x.iter().copied().collect(),
            objective: result.objective,
            iterations: result.iterations,
            termination: result.termination.as_str(),
            lambda_initial: result.lambda_initial,
            lambda_final: result.lambda_final,
            rho_final: result.rho_final,
            short_count: result.short_count,
            config_echo,
            diagnostics,
            history: result.history.map(HistoryArrays::from),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
