//! Benchmark suites and the strategy comparison table.

use std::io::Write;
use std::time::Instant;

use anyhow::{Context, Result};
use portfolio_admm::market_data::{
    generate_illconditioned_returns, generate_synthetic_returns, SyntheticMarket,
    DEFAULT_JITTER_FLOOR,
};
use portfolio_admm::oracle::enumerate_solve;
use portfolio_admm::{
    build_problem, estimate_stats, initial_lambda, solve, LambdaSchedule, PenaltyConfig,
    PenaltyKind, PortfolioProblem, ReturnsMatrix, SolverConfig,
};

use crate::args::Suite;

pub const RANDOM_SHAPE: (usize, usize) = (10, 200);
pub const ILLCOND_SHAPE: (usize, usize) = (10, 200);
pub const ILLCOND_CONDITION: f64 = 1e6;
pub const SHORTS_PERIODS: usize = 2000;
const SHORTS_MAX_CANDIDATES: usize = 200;

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Random => "random",
            Suite::Illcond => "illcond",
            Suite::Shorts => "shorts",
        }
    }
}

/// One generated problem with the λ schedule the suite prescribes.
#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: PortfolioProblem,
    pub lambda: LambdaSchedule,
    pub seed: u64,
}

fn trial_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(index as u64)
}

fn midpoint_problem(returns: &ReturnsMatrix) -> Result<PortfolioProblem> {
    let stats = estimate_stats(returns, DEFAULT_JITTER_FLOOR);
    let e = 0.5 * (stats.mu.min() + stats.mu.max());
    Ok(build_problem(&stats, e, false)?)
}

/// Instances of a suite, deterministic in `seed`. Every target return is
/// the midpoint of the asset means, which a long-only mix attains.
///
/// The `shorts` suite keeps only candidates whose exact optimum at λ₀ has a
/// weight below −1e-6, so the adaptive controller has work to do.
pub fn suite_instances(suite: Suite, trials: usize, seed: u64) -> Result<Vec<Instance>> {
    match suite {
        Suite::Random | Suite::Illcond => (0..trials)
            .map(|t| {
                let s = trial_seed(seed, t);
                let (n, m) = if suite == Suite::Random { RANDOM_SHAPE } else { ILLCOND_SHAPE };
                let returns = if suite == Suite::Random {
                    generate_synthetic_returns(&SyntheticMarket::new(n, m, s))?
                } else {
                    generate_illconditioned_returns(n, m, s, ILLCOND_CONDITION)?
                };
                Ok(Instance {
                    problem: midpoint_problem(&returns)?,
                    lambda: LambdaSchedule::fixed(initial_lambda(m, n)?),
                    seed: s,
                })
            })
            .collect(),
        Suite::Shorts => {
            let mut out = Vec::with_capacity(trials);
            for c in 0..trials * SHORTS_MAX_CANDIDATES {
                if out.len() == trials {
                    break;
                }
                let s = trial_seed(seed, c);
                let n = 4 + c % 5;
                let returns = generate_synthetic_returns(&SyntheticMarket::new(n, SHORTS_PERIODS, s))?;
                let problem = midpoint_problem(&returns)?;
                let lambda0 = initial_lambda(SHORTS_PERIODS, n)?;
                if enumerate_solve(&problem, lambda0)?.weights.min() < -1e-6 {
                    out.push(Instance {
                        problem,
                        lambda: LambdaSchedule::adaptive(lambda0, 0),
                        seed: s,
                    });
                }
            }
            anyhow::ensure!(out.len() == trials, "found only {} shorting instances", out.len());
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub suite: &'static str,
    pub strategy: &'static str,
    pub trial: usize,
    pub iterations: usize,
    pub r_norm: f64,
    pub d_norm: f64,
    pub wall_ms: f64,
    pub termination: &'static str,
}

/// Runs every strategy on every instance, ordered by strategy then trial.
pub fn run_bench(suite: Suite, trials: usize, seed: u64, tol: f64, max_iter: usize) -> Result<Vec<BenchRow>> {
    let instances = suite_instances(suite, trials, seed)?;
    let mut rows = Vec::with_capacity(4 * trials);
    for kind in PenaltyKind::ALL {
        for (trial, inst) in instances.iter().enumerate() {
            let mut cfg = SolverConfig::new(PenaltyConfig::with_kind(kind), inst.lambda.clone());
            cfg.tol = tol;
            cfg.max_iter = max_iter;
            let start = Instant::now();
            let res = solve(&inst.problem, &cfg).with_context(|| format!("{kind} on trial {trial}"))?;
            rows.push(BenchRow {
                suite: suite.as_str(),
                strategy: kind.as_str(),
                trial,
                iterations: res.iterations,
                r_norm: res.r_norm,
                d_norm: res.d_norm,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
                termination: res.termination.as_str(),
            });
        }
    }
    Ok(rows)
}

/// Median of the iteration counts, averaging the middle pair.
pub fn median(values: &[usize]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable();
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2] as f64,
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]) as f64,
    }
}

pub const BENCH_HEADER: [&str; 8] = [
    "suite",
    "strategy",
    "trial",
    "iterations",
    "r_norm",
    "d_norm",
    "wall_ms",
    "termination",
];

/// Writes data rows followed by one `median` summary row per strategy.
pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_HEADER)?;
    for r in rows {
        w.write_record([
            r.suite.to_string(),
            r.strategy.to_string(),
            r.trial.to_string(),
            r.iterations.to_string(),
            format!("{:e}", r.r_norm),
            format!("{:e}", r.d_norm),
            format!("{:.3}", r.wall_ms),
            r.termination.to_string(),
        ])?;
    }
    for kind in PenaltyKind::ALL {
        let its: Vec<usize> = rows
            .iter()
            .filter(|r| r.strategy == kind.as_str())
            .map(|r| r.iterations)
            .collect();
        if its.is_empty() {
            continue;
        }
        let suite = rows[0].suite;
        w.write_record([
            suite.to_string(),
            kind.as_str().to_string(),
            "median".to_string(),
            median(&its).to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
