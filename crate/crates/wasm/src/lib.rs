//! Browser bindings for the portfolio solver.
//!
//! Every export takes returns as CSV text and hands back a JSON string, so
//! the page needs no glue beyond `JSON.parse`. The `*_json` functions hold
//! the logic and run natively in tests; the exported wrappers only convert
//! errors into JavaScript exceptions.

use portfolio_admm::market_data::{
    generate_illconditioned_returns, generate_synthetic_returns, SyntheticMarket,
    DEFAULT_JITTER_FLOOR,
};
use portfolio_admm::{
    build_problem, estimate_stats, solve, AssetStats, LambdaSchedule, PenaltyConfig, PenaltyKind,
    ReturnsMatrix, SolverConfig,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Iteration cap for the interactive operations; the page stays responsive
/// even when the fixed strategy stalls.
pub const DEMO_MAX_ITER: usize = 5000;

type Outcome = Result<String, String>;

fn text<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn parse(csv: &str) -> Result<(ReturnsMatrix, AssetStats), String> {
    let returns = ReturnsMatrix::from_csv_reader(csv.as_bytes()).map_err(text)?;
    let stats = estimate_stats(&returns, DEFAULT_JITTER_FLOOR);
    Ok((returns, stats))
}

/// `lambda` of `None` picks the data-driven starting value.
fn config(strategy: &str, lambda: Option<f64>, adaptive: bool, returns: &ReturnsMatrix) -> Result<SolverConfig, String> {
    let kind: PenaltyKind = strategy.parse().map_err(text)?;
    let (m, n) = (returns.periods(), returns.assets());
    let schedule = match (lambda, adaptive) {
        (None, false) => LambdaSchedule::auto_initial(m, n).map_err(text)?,
        (None, true) => LambdaSchedule::adaptive(portfolio_admm::initial_lambda(m, n).map_err(text)?, 0),
        (Some(v), false) => LambdaSchedule::fixed(v),
        (Some(v), true) => LambdaSchedule::adaptive(v, 0),
    };
    let mut cfg = SolverConfig::new(PenaltyConfig::with_kind(kind), schedule);
    cfg.max_iter = DEMO_MAX_ITER;
    cfg.validate().map_err(text)?;
    Ok(cfg)
}

fn to_json<T: Serialize>(value: &T) -> Outcome {
    serde_json::to_string(value).map_err(text)
}

/// Synthetic returns as CSV. A `condition` gives a covariance with that
/// condition number instead of the factor model.
pub fn sample_market_csv(assets: usize, periods: usize, seed: u64, condition: Option<f64>) -> Outcome {
    let returns = match condition {
        Some(c) => generate_illconditioned_returns(assets, periods, seed, c),
        None => generate_synthetic_returns(&SyntheticMarket::new(assets, periods, seed)),
    }
    .map_err(text)?;
    Ok(returns.to_csv_string())
}

#[derive(Serialize)]
struct Summary<'a> {
    assets: usize,
    periods: usize,
    names: &'a [String],
    mean_min: f64,
    mean_max: f64,
}

pub fn summary_json(csv: &str) -> Outcome {
    let (returns, stats) = parse(csv)?;
    to_json(&Summary {
        assets: returns.assets(),
        periods: returns.periods(),
        names: returns.asset_names(),
        mean_min: stats.mu.min(),
        mean_max: stats.mu.max(),
    })
}

#[derive(Serialize)]
struct Solved<'a> {
    names: &'a [String],
    weights: Vec<f64>,
    objective: f64,
    risk: f64,
    iterations: usize,
    termination: &'static str,
    lambda_initial: f64,
    lambda_final: f64,
    rho_final: f64,
    short_count: usize,
}

pub fn solve_json(csv: &str, target_return: f64, strategy: &str, lambda: Option<f64>, adaptive: bool) -> Outcome {
    let (returns, stats) = parse(csv)?;
    let problem = build_problem(&stats, target_return, false).map_err(text)?;
    let cfg = config(strategy, lambda, adaptive, &returns)?;
    let res = solve(&problem, &cfg).map_err(text)?;
    to_json(&Solved {
        names: returns.asset_names(),
        weights: res.weights.weights.iter().copied().collect(),
        objective: res.objective,
        risk: problem.risk(&res.weights.weights).map_err(text)?,
        iterations: res.iterations,
        termination: res.termination.as_str(),
        lambda_initial: res.lambda_initial,
        lambda_final: res.lambda_final,
        rho_final: res.rho_final,
        short_count: res.short_count,
    })
}

#[derive(Serialize)]
struct FrontierPoint {
    target_return: f64,
    risk: f64,
    l1_norm: f64,
    shorts: usize,
    termination: &'static str,
}

/// Sweeps the target return across the range of asset means.
pub fn frontier_json(csv: &str, points: usize, strategy: &str, adaptive: bool) -> Outcome {
    if points < 2 {
        return Err("need at least 2 frontier points".into());
    }
    let (returns, stats) = parse(csv)?;
    let cfg = config(strategy, None, adaptive, &returns)?;
    let (lo, hi) = (stats.mu.min(), stats.mu.max());
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let t = i as f64 / (points - 1) as f64;
        let e = (1.0 - t) * lo + t * hi;
        let problem = build_problem(&stats, e, false).map_err(text)?;
        let res = solve(&problem, &cfg).map_err(text)?;
        out.push(FrontierPoint {
            target_return: e,
            risk: problem.risk(&res.weights.weights).map_err(text)?,
            l1_norm: res.weights.l1_norm(),
            shorts: res.short_count,
            termination: res.termination.as_str(),
        });
    }
    to_json(&out)
}

#[derive(Serialize)]
struct Lane {
    strategy: &'static str,
    iterations: usize,
    termination: &'static str,
    r_norm: Vec<f64>,
    d_norm: Vec<f64>,
    rho: Vec<f64>,
}

/// Runs all four penalty strategies on one problem and returns their
/// residual and ρ histories.
pub fn race_json(csv: &str, target_return: f64) -> Outcome {
    let (returns, stats) = parse(csv)?;
    let problem = build_problem(&stats, target_return, false).map_err(text)?;
    let mut lanes = Vec::with_capacity(4);
    for kind in PenaltyKind::ALL {
        let mut cfg = config(kind.as_str(), None, false, &returns)?;
        cfg.record_history = true;
        let res = solve(&problem, &cfg).map_err(text)?;
        let h = res.history.expect("history was requested");
        lanes.push(Lane {
            strategy: kind.as_str(),
            iterations: res.iterations,
            termination: res.termination.as_str(),
            r_norm: h.r_norm,
            d_norm: h.d_norm,
            rho: h.rho,
        });
    }
    to_json(&lanes)
}

fn js(result: Outcome) -> Result<String, JsError> {
    result.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sampleMarket)]
pub fn sample_market(assets: usize, periods: usize, seed: u32, condition: Option<f64>) -> Result<String, JsError> {
    js(sample_market_csv(assets, periods, seed.into(), condition))
}

#[wasm_bindgen(js_name = summarize)]
pub fn summarize(csv: &str) -> Result<String, JsError> {
    js(summary_json(csv))
}

#[wasm_bindgen(js_name = solvePortfolio)]
pub fn solve_portfolio(
    csv: &str,
    target_return: f64,
    strategy: &str,
    lambda: Option<f64>,
    adaptive: bool,
) -> Result<String, JsError> {
    js(solve_json(csv, target_return, strategy, lambda, adaptive))
}

#[wasm_bindgen(js_name = efficientFrontier)]
pub fn efficient_frontier(csv: &str, points: usize, strategy: &str, adaptive: bool) -> Result<String, JsError> {
    js(frontier_json(csv, points, strategy, adaptive))
}

#[wasm_bindgen(js_name = raceStrategies)]
pub fn race_strategies(csv: &str, target_return: f64) -> Result<String, JsError> {
    js(race_json(csv, target_return))
}
