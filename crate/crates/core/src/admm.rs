//! ADMM for `min ½xᵀCx + λ‖z‖₁  s.t.  Dx = b, x − z = 0`.
//!
//! Each iteration `k` performs
//!
//! 1. `x ← argmin ½xᵀCx + (ρ/2)‖x − z − y/ρ‖²` over `Dx = b` (KKT solve)
//! 2. `z ← soft(x − y/ρ, λ/ρ)`
//! 3. `y ← y + ρ(z − x)`
//! 4. λ increase when the short count exceeds the threshold
//! 5. ρ update on scheduled iterations
//!
//! Residuals are `r = z − x` and `d = −ρ(zᵏ⁺¹ − zᵏ)`. The run stops when
//! `‖r‖ ≤ tol·max(‖x‖, ‖z‖)` and `‖d‖ ≤ tol·max(‖y‖, floor)`.

use std::fmt;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::kkt::KktFactorization;
use crate::lambda::LambdaSchedule;
use crate::model::{count_short_positions, Portfolio, PortfolioProblem};
use crate::penalty::{
    compute_ybar, rb_update, spectral_rho, PenaltyConfig, PenaltyKind, SpectralInput,
    SpectralMemory,
};
use crate::DEFAULT_ZERO_TOL;

/// Which iterate the short-sale guard inspects. Entries of `x` at assets
/// with zero optimal weight hover around zero at the size of the stopping
/// tolerance, while soft-thresholding makes the same entries of `z` exactly
/// zero, so `Z` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShortCountSource {
    X,
    Z,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub penalty: PenaltyConfig,
    pub lambda: LambdaSchedule,
    pub record_history: bool,
    pub short_source: ShortCountSource,
    pub zero_tol: f64,
    /// Lower bound on `‖y‖` in the dual stopping test.
    pub dual_floor: DualFloor,
}

/// Lower bound used in place of `‖y‖` in the dual stopping test. With
/// `λ = 0` the multiplier of `x − z = 0` is exactly zero, so some floor is
/// required for the test to be satisfiable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualFloor {
    /// A fixed absolute value.
    Absolute(f64),
    /// `‖Cx‖` at the current iterate, the magnitude of the smooth gradient.
    GradientScale,
}

impl DualFloor {
    pub fn value(self, problem: &PortfolioProblem, x: &DVector<f64>) -> f64 {
        match self {
            DualFloor::Absolute(v) => v,
            DualFloor::GradientScale => (problem.cov() * x).norm(),
        }
    }
}

impl SolverConfig {
    pub fn new(penalty: PenaltyConfig, lambda: LambdaSchedule) -> Self {
        Self {
            tol: 1e-6,
            max_iter: 5000,
            penalty,
            lambda,
            record_history: false,
            short_source: ShortCountSource::Z,
            zero_tol: DEFAULT_ZERO_TOL,
            dual_floor: DualFloor::GradientScale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        let floor_ok = match self.dual_floor {
            DualFloor::Absolute(v) => v >= 0.0,
            DualFloor::GradientScale => true,
        };
        if !(self.zero_tol >= 0.0) || !floor_ok {
            return Err(Error::Config("zero_tol and dual_floor must be nonnegative".into()));
        }
        self.penalty.validate()?;
        self.lambda.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    pub y: DVector<f64>,
    pub rho: f64,
    pub lambda: f64,
    /// Number of completed iterations.
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIter,
    NumericalFailure,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIter => "max_iter",
            Termination::NumericalFailure => "numerical_failure",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-iteration diagnostics; `rho` and `lambda` are the values used by
/// the iteration, `objective` is evaluated at the new `z`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub r_norm: Vec<f64>,
    pub d_norm: Vec<f64>,
    pub rho: Vec<f64>,
    pub lambda: Vec<f64>,
    pub objective: Vec<f64>,
}

impl History {
    pub fn len(&self) -> usize {
        self.r_norm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_norm.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// The final `x`, which satisfies `Dx = b` up to factorization error.
    pub weights: Portfolio,
    /// `½xᵀCx + λ‖x‖₁` at the final weights and final λ.
    pub objective: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub history: Option<History>,
    pub short_count: usize,
    pub lambda_initial: f64,
    pub lambda_final: f64,
    pub lambda_adjustments: usize,
    pub rho_final: f64,
    pub r_norm: f64,
    pub d_norm: f64,
    /// Iterate at termination, including `z` and `y`.
    pub final_state: IterateState,
}

impl SolveResult {
    pub fn consensus_gap(&self) -> f64 {
        (&self.final_state.x - &self.final_state.z).norm()
    }
}

/// `sign(u)·max(|u| − κ, 0)` componentwise.
pub fn soft_threshold(u: &DVector<f64>, kappa: f64) -> DVector<f64> {
    u.map(|v| {
        let mag = v.abs() - kappa;
        if mag > 0.0 {
            mag.copysign(v)
        } else {
            0.0
        }
    })
}

/// Proximal step `argmin λ‖z‖₁ + (ρ/2)‖z − (x − y/ρ)‖²`.
pub fn z_update(x_new: &DVector<f64>, y: &DVector<f64>, rho: f64, lambda: f64) -> DVector<f64> {
    soft_threshold(&(x_new - y / rho), lambda / rho)
}

pub fn y_update(
    y: &DVector<f64>,
    rho: f64,
    x_new: &DVector<f64>,
    z_new: &DVector<f64>,
) -> DVector<f64> {
    y + (z_new - x_new) * rho
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub r_norm: f64,
    pub d_norm: f64,
}

/// Primal `‖z − x‖` and dual `ρ‖z − z_prev‖` residual norms.
pub fn residual_norms(
    z_prev: &DVector<f64>,
    x: &DVector<f64>,
    z: &DVector<f64>,
    rho: f64,
) -> Residuals {
    Residuals {
        r_norm: (z - x).norm(),
        d_norm: rho * (z - z_prev).norm(),
    }
}

pub fn stopping_check(
    r_norm: f64,
    d_norm: f64,
    x: &DVector<f64>,
    z: &DVector<f64>,
    y: &DVector<f64>,
    tol: f64,
    dual_floor: f64,
) -> bool {
    r_norm <= tol * x.norm().max(z.norm()) && d_norm <= tol * y.norm().max(dual_floor)
}

/// What one iteration did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub residuals: Residuals,
    pub converged: bool,
    pub lambda_adjusted: bool,
    pub rho_changed: bool,
    pub finite: bool,
}

/// Stateful solver; [`solve`] drives it to termination.
#[derive(Debug)]
pub struct Admm<'p> {
    problem: &'p PortfolioProblem,
    cfg: SolverConfig,
    rhs: DVector<f64>,
    kkt: KktFactorization,
    state: IterateState,
    schedule: LambdaSchedule,
    spectral: SpectralMemory,
    history: History,
    last: Option<Residuals>,
}

impl<'p> Admm<'p> {
    /// Starts from `x = z = Dᵀ(DDᵀ)⁻¹b`, `y = 0`.
    pub fn new(problem: &'p PortfolioProblem, cfg: SolverConfig) -> Result<Self> {
        let start = problem.least_norm_feasible();
        Self::with_start(problem, cfg, start.clone(), start, DVector::zeros(problem.n()))
    }

    pub fn with_start(
        problem: &'p PortfolioProblem,
        cfg: SolverConfig,
        x: DVector<f64>,
        z: DVector<f64>,
        y: DVector<f64>,
    ) -> Result<Self> {
        cfg.validate()?;
        let n = problem.n();
        for v in [&x, &z, &y] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        let rho = cfg.penalty.rho0;
        let kkt = KktFactorization::new(problem, rho)?;
        let schedule = cfg.lambda.clone();
        Ok(Self {
            problem,
            rhs: problem.rhs(),
            kkt,
            state: IterateState {
                x,
                z,
                y,
                rho,
                lambda: schedule.current,
                k: 0,
            },
            schedule,
            spectral: SpectralMemory::new(rho),
            history: History::default(),
            last: None,
            cfg,
        })
    }

    pub fn state(&self) -> &IterateState {
        &self.state
    }

    pub fn schedule(&self) -> &LambdaSchedule {
        &self.schedule
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    /// Runs one iteration. On non-finite iterates the state is left
    /// untouched and `finite` is false.
    pub fn step(&mut self) -> Result<StepReport> {
        let k = self.state.k;
        let rho = self.state.rho;
        let lambda = self.schedule.current;

        let x = self
            .kkt
            .solve_x_update(&self.state.z, &self.state.y, rho, &self.rhs)?
            .x;
        let z = z_update(&x, &self.state.y, rho, lambda);
        let y = y_update(&self.state.y, rho, &x, &z);
        let residuals = residual_norms(&self.state.z, &x, &z, rho);

        let finite = [&x, &z, &y].iter().all(|v| v.iter().all(|e| e.is_finite()))
            && residuals.r_norm.is_finite()
            && residuals.d_norm.is_finite();
        if !finite {
            return Ok(StepReport {
                residuals,
                converged: false,
                lambda_adjusted: false,
                rho_changed: false,
                finite,
            });
        }

        if self.cfg.record_history {
            self.history.r_norm.push(residuals.r_norm);
            self.history.d_norm.push(residuals.d_norm);
            self.history.rho.push(rho);
            self.history.lambda.push(lambda);
            self.history
                .objective
                .push(self.problem.objective(&z, lambda)?);
        }

        let shorts = match self.cfg.short_source {
            ShortCountSource::X => count_short_positions(&x, self.cfg.zero_tol),
            ShortCountSource::Z => count_short_positions(&z, self.cfg.zero_tol),
        };
        let lambda_adjusted = self.schedule.triggers(shorts);
        if lambda_adjusted {
            self.schedule = self.schedule.maybe_adjust(shorts);
        }

        let primal_scale = x.norm().max(z.norm());
        let dual_scale = y.norm().max(self.cfg.dual_floor.value(self.problem, &x));
        let converged = !lambda_adjusted
            && stopping_check(
                residuals.r_norm,
                residuals.d_norm,
                &x,
                &z,
                &y,
                self.cfg.tol,
                dual_scale,
            );

        let mut next_rho = rho;
        if !converged && self.cfg.penalty.is_update_iteration(k) {
            let pc = &self.cfg.penalty;
            match pc.kind {
                PenaltyKind::Fixed => {}
                PenaltyKind::ResidualBalancing => {
                    next_rho = if pc.rb_relative && primal_scale > 0.0 && dual_scale > 0.0 {
                        rb_update(
                            rho,
                            residuals.r_norm / primal_scale,
                            residuals.d_norm / dual_scale,
                            pc,
                        )
                    } else {
                        rb_update(rho, residuals.r_norm, residuals.d_norm, pc)
                    };
                }
                PenaltyKind::SpectralBb | PenaltyKind::RegularizedBb => {
                    let ybar = compute_ybar(&self.state.y, rho, &x, &self.state.z);
                    let update = spectral_rho(
                        &self.spectral,
                        &SpectralInput {
                            x: &x,
                            z: &z,
                            y: &y,
                            ybar: &ybar,
                            rho,
                            r_norm: residuals.r_norm,
                            d_norm: residuals.d_norm,
                        },
                        pc,
                    );
                    next_rho = update.rho;
                    self.spectral = update.memory;
                }
            }
        }

        let rho_changed = next_rho != rho;
        if rho_changed {
            self.kkt = KktFactorization::new(self.problem, next_rho)?;
        }
        self.state = IterateState {
            x,
            z,
            y,
            rho: next_rho,
            lambda: self.schedule.current,
            k: k + 1,
        };
        self.last = Some(residuals);

        Ok(StepReport {
            residuals,
            converged,
            lambda_adjusted,
            rho_changed,
            finite,
        })
    }

    /// Iterates until convergence, `max_iter`, or a non-finite iterate.
    pub fn run(mut self) -> Result<SolveResult> {
        let mut termination = Termination::MaxIter;
        while self.state.k < self.cfg.max_iter {
            let report = self.step()?;
            if !report.finite {
                termination = Termination::NumericalFailure;
                break;
            }
            if report.converged {
                termination = Termination::Converged;
                break;
            }
        }
        self.finish(termination)
    }

    fn finish(self, termination: Termination) -> Result<SolveResult> {
        let last = self.last.unwrap_or(Residuals {
            r_norm: f64::NAN,
            d_norm: f64::NAN,
        });
        let weights = Portfolio::with_zero_tol(self.state.x.clone(), self.cfg.zero_tol);
        let lambda_final = self.schedule.current;
        Ok(SolveResult {
            objective: self.problem.objective(&weights.weights, lambda_final)?,
            short_count: weights.short_count(),
            weights,
            iterations: self.state.k,
            termination,
            history: self.cfg.record_history.then_some(self.history),
            lambda_initial: self.cfg.lambda.current,
            lambda_final,
            lambda_adjustments: self.schedule.adjustments_made,
            rho_final: self.state.rho,
            r_norm: last.r_norm,
            d_norm: last.d_norm,
            final_state: self.state,
        })
    }
}

pub fn solve(problem: &PortfolioProblem, cfg: &SolverConfig) -> Result<SolveResult> {
    Admm::new(problem, cfg.clone())?.run()
}
