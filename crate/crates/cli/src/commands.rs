//! Subcommand implementations. Each returns an [`Outcome`] on success; any
//! error is an input or I/O problem and maps to exit status 2.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use portfolio_admm::lambda::LambdaSchedule;
use portfolio_admm::market_data::{
    generate_illconditioned_returns, generate_synthetic_returns, SyntheticMarket,
};
use portfolio_admm::penalty::PenaltyConfig;
use portfolio_admm::{
    build_problem, estimate_stats, initial_lambda, load_returns_csv, solve, AssetStats,
    ReturnsMatrix, SolverConfig, Termination,
};

use crate::args::{BenchArgs, FrontierArgs, GenArgs, LambdaArg, RbbAlphaDual, SolveArgs, SolverFlags};
use crate::bench::{run_bench, write_bench_csv};
use crate::report::{ConfigEcho, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::NotConverged => 3,
        }
    }
}

pub const INPUT_ERROR_EXIT: u8 = 2;

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot write output file {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn cmd_gen(args: &GenArgs) -> Result<Outcome> {
    let returns = match args.condition {
        Some(cond) => generate_illconditioned_returns(args.assets, args.periods, args.seed, cond)
            .context("--assets/--periods/--condition")?,
        None => {
            ensure!(args.noise >= 0.0 && args.noise.is_finite(), "--noise must be nonnegative");
            let market = SyntheticMarket {
                factors: args.factors,
                noise_scale: args.noise,
                ..SyntheticMarket::new(args.assets, args.periods, args.seed)
            };
            generate_synthetic_returns(&market).context("--assets/--periods/--factors")?
        }
    };
    let file = File::create(&args.output)
        .with_context(|| format!("cannot write output file {}", args.output.display()))?;
    let mut out = BufWriter::new(file);
    returns
        .write_csv(&mut out)
        .and_then(|_| out.flush())
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(Outcome::Success)
}

/// Turns flags into a validated solver configuration for data with the
/// given shape.
pub fn solver_config(flags: &SolverFlags, periods: usize, assets: usize) -> Result<SolverConfig> {
    let lambda_start = match flags.lambda {
        LambdaArg::Auto => initial_lambda(periods, assets).context("--lambda auto")?,
        LambdaArg::Value(v) => v,
    };
    let lambda = if flags.adaptive_lambda {
        ensure!(lambda_start > 0.0, "--adaptive-lambda needs a positive --lambda");
        LambdaSchedule {
            max_adjustments: flags.max_adjustments,
            ..LambdaSchedule::adaptive(lambda_start, flags.sn)
        }
    } else if flags.lambda == LambdaArg::Auto {
        LambdaSchedule::auto_initial(periods, assets)?
    } else {
        LambdaSchedule::fixed(lambda_start)
    };
    let penalty = PenaltyConfig {
        rho0: flags.rho0,
        eta: flags.eta,
        mu_rb: flags.mu_rb,
        eps_corr: flags.eps_corr,
        q: flags.q,
        nbar: flags.nbar,
        rho_min: flags.rho_min,
        rho_max: flags.rho_max,
        freeze_after: flags.freeze_after,
        rb_relative: !flags.rb_raw_residuals,
        rbb_alpha_uses_ybar: flags.rbb_alpha_dual == RbbAlphaDual::Ybar,
        ..PenaltyConfig::with_kind(flags.strategy.into())
    };
    let cfg = SolverConfig {
        tol: flags.tol,
        max_iter: flags.max_iter,
        short_source: flags.short_source.into(),
        zero_tol: flags.zero_tol,
        dual_floor: flags.dual_floor.0,
        ..SolverConfig::new(penalty, lambda)
    };
    cfg.validate().context("invalid solver flags")?;
    Ok(cfg)
}

fn load(input: &Path, jitter_floor: f64) -> Result<(ReturnsMatrix, AssetStats)> {
    ensure!(
        jitter_floor >= 0.0 && jitter_floor.is_finite(),
        "--jitter-floor must be nonnegative"
    );
    let returns = load_returns_csv(input).with_context(|| format!("--input {}", input.display()))?;
    let stats = estimate_stats(&returns, jitter_floor);
    Ok((returns, stats))
}

/// Runs `solve` and returns the JSON document with its outcome.
pub fn solve_to_json(args: &SolveArgs) -> Result<(String, Outcome)> {
    let (returns, stats) = load(&args.input, args.solver.jitter_floor)?;
    let problem = build_problem(&stats, args.target_return, false).context("--target-return")?;
    let mut cfg = solver_config(&args.solver, returns.periods(), returns.assets())?;
    cfg.record_history = args.history;
    let echo = ConfigEcho::new(
        &cfg,
        args.input.display().to_string(),
        args.target_return,
        args.solver.jitter_floor,
    );
    let result = solve(&problem, &cfg)?;
    let outcome = match result.termination {
        Termination::Converged => Outcome::Success,
        _ => Outcome::NotConverged,
    };
    let report = SolveReport::new(result, &problem, &stats, returns.asset_names(), echo);
    Ok((report.to_json(), outcome))
}

pub fn cmd_solve(args: &SolveArgs) -> Result<Outcome> {
    let (json, outcome) = solve_to_json(args)?;
    let mut out = open_output(args.output.as_deref())?;
    out.write_all(json.as_bytes())?;
    out.flush()?;
    Ok(outcome)
}

pub const FRONTIER_HEADER: [&str; 7] = ["e", "risk", "l1_norm", "nonzeros", "shorts", "iterations", "status"];

/// Target returns of the sweep: the midpoint for one point, otherwise an
/// evenly spaced grid including both ends.
pub fn frontier_targets(e_min: f64, e_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5 * (e_min + e_max)],
        k => (0..k)
            .map(|i| {
                // lerp form so both ends are hit exactly
                let t = i as f64 / (k - 1) as f64;
                (1.0 - t) * e_min + t * e_max
            })
            .collect(),
    }
}

pub fn frontier_csv(args: &FrontierArgs) -> Result<(String, Outcome)> {
    ensure!(args.points >= 1, "--points must be at least 1");
    let (returns, stats) = load(&args.input, args.solver.jitter_floor)?;
    let e_min = args.e_min.unwrap_or_else(|| stats.mu.min());
    let e_max = args.e_max.unwrap_or_else(|| stats.mu.max());
    if !(e_min <= e_max) {
        bail!("--e-min ({e_min}) must not exceed --e-max ({e_max})");
    }
    let cfg = solver_config(&args.solver, returns.periods(), returns.assets())?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FRONTIER_HEADER)?;
    let mut any_converged = false;
    for e in frontier_targets(e_min, e_max, args.points) {
        let solved = build_problem(&stats, e, false).and_then(|p| Ok((solve(&p, &cfg)?, p)));
        let record = match solved {
            Ok((res, p)) => {
                any_converged |= res.termination == Termination::Converged;
                let x = &res.weights.weights;
                [
                    e.to_string(),
                    p.risk(x)?.to_string(),
                    res.weights.l1_norm().to_string(),
                    res.weights.nonzero_count().to_string(),
                    res.short_count.to_string(),
                    res.iterations.to_string(),
                    res.termination.as_str().to_string(),
                ]
            }
            Err(err) => {
                let mut row: [String; 7] = Default::default();
                row[0] = e.to_string();
                row[6] = format!("error: {err}");
                row
            }
        };
        w.write_record(&record)?;
    }
    let bytes = w.into_inner().context("flushing frontier table")?;
    let outcome = if any_converged { Outcome::Success } else { Outcome::NotConverged };
    Ok((String::from_utf8(bytes)?, outcome))
}

pub fn cmd_frontier(args: &FrontierArgs) -> Result<Outcome> {
    let (csv, outcome) = frontier_csv(args)?;
    let mut out = open_output(args.output.as_deref())?;
    out.write_all(csv.as_bytes())?;
    out.flush()?;
    Ok(outcome)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Outcome> {
    ensure!(args.trials >= 1, "--trials must be at least 1");
    ensure!(args.tol > 0.0, "--tol must be positive");
    ensure!(args.max_iter >= 1, "--max-iter must be at least 1");
    let rows = run_bench(args.suite, args.trials, args.seed, args.tol, args.max_iter)?;
    let out = open_output(args.output.as_deref())?;
    write_bench_csv(&rows, out)?;
    Ok(Outcome::Success)
}
