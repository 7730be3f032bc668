//! Penalty-parameter strategies.
//!
//! All strategies share one schedule: ρ may change only on iterations `k`
//! with `k mod n̄ = 1` (read modulo n̄, so `n̄ = 1` updates every iteration)
//! and `k ≤ freeze_after`.
//!
//! The spectral strategies view ADMM as Douglas-Rachford splitting on the
//! dual. With `A = I`, `B = −I`, `c = 0` the secant pairs are
//!
//! * α side: `(Δȳ, ΔΨ) = (ȳᵏ − ȳᵏ⁻¹, xᵏ − xᵏ⁻¹)`
//! * β side: `(Δy, ΔΦ) = (yᵏ − yᵏ⁻¹, −(zᵏ − zᵏ⁻¹))`
//!
//! where `ȳᵏ = yᵏ⁻¹ + ρᵏ⁻¹(zᵏ⁻¹ − xᵏ)`, and the curvature estimates α, β are
//! combined into `ρ = 1/√(αβ)` behind a correlation safeguard.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PenaltyKind {
    Fixed,
    ResidualBalancing,
    SpectralBb,
    RegularizedBb,
}

impl PenaltyKind {
    pub const ALL: [PenaltyKind; 4] = [
        PenaltyKind::Fixed,
        PenaltyKind::ResidualBalancing,
        PenaltyKind::SpectralBb,
        PenaltyKind::RegularizedBb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PenaltyKind::Fixed => "fixed",
            PenaltyKind::ResidualBalancing => "rb",
            PenaltyKind::SpectralBb => "bb",
            PenaltyKind::RegularizedBb => "rbb",
        }
    }

    fn is_spectral(self) -> bool {
        matches!(self, PenaltyKind::SpectralBb | PenaltyKind::RegularizedBb)
    }
}

impl fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PenaltyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(PenaltyKind::Fixed),
            "rb" => Ok(PenaltyKind::ResidualBalancing),
            "bb" => Ok(PenaltyKind::SpectralBb),
            "rbb" => Ok(PenaltyKind::RegularizedBb),
            other => Err(Error::Config(format!(
                "unknown strategy `{other}` (expected fixed, rb, bb or rbb)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyConfig {
    pub kind: PenaltyKind,
    pub rho0: f64,
    /// Residual-balancing growth factor η > 1.
    pub eta: f64,
    /// Residual-balancing imbalance threshold > 1.
    pub mu_rb: f64,
    /// Correlation threshold ε̄ ∈ (0, 1) of the spectral safeguard.
    pub eps_corr: f64,
    /// Exponent of the residual ratio that sets τ.
    pub q: f64,
    /// Update period n̄ ≥ 1.
    pub nbar: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Value of τ when the dual residual vanishes.
    pub tau_max: f64,
    /// Last iteration at which ρ may change.
    pub freeze_after: usize,
    /// Regularized BB: build the α-side scalar from Δȳ (default) instead of Δy.
    pub rbb_alpha_uses_ybar: bool,
    /// Residual balancing compares the residuals after dividing by the
    /// scales of the stopping test rather than the raw norms.
    pub rb_relative: bool,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            kind: PenaltyKind::RegularizedBb,
            rho0: 1.0,
            eta: 2.0,
            mu_rb: 10.0,
            eps_corr: 0.2,
            q: 1.0,
            nbar: 2,
            rho_min: 1e-8,
            rho_max: 1e8,
            tau_max: 1e12,
            freeze_after: 1000,
            rbb_alpha_uses_ybar: true,
            rb_relative: true,
        }
    }
}

impl PenaltyConfig {
    pub fn with_kind(kind: PenaltyKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.rho_min > 0.0 && self.rho_min < self.rho0 && self.rho0 < self.rho_max) {
            return fail(format!(
                "need 0 < rho_min < rho0 < rho_max, got {} / {} / {}",
                self.rho_min, self.rho0, self.rho_max
            ));
        }
        if !self.rho_max.is_finite() {
            return fail("rho_max must be finite".into());
        }
        if !(self.eta > 1.0) {
            return fail(format!("eta must exceed 1, got {}", self.eta));
        }
        if !(self.mu_rb > 1.0) {
            return fail(format!("mu_rb must exceed 1, got {}", self.mu_rb));
        }
        if !(self.eps_corr > 0.0 && self.eps_corr < 1.0) {
            return fail(format!("eps_corr must lie in (0, 1), got {}", self.eps_corr));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return fail(format!("q must be positive, got {}", self.q));
        }
        if self.nbar == 0 {
            return fail("nbar must be at least 1".into());
        }
        if !(self.tau_max > 0.0) {
            return fail(format!("tau_max must be positive, got {}", self.tau_max));
        }
        Ok(())
    }

    /// True on iterations where the strategy may emit a new ρ.
    pub fn is_update_iteration(&self, k: usize) -> bool {
        k <= self.freeze_after && k % self.nbar == 1 % self.nbar
    }

    fn clip(&self, rho: f64) -> f64 {
        rho.clamp(self.rho_min, self.rho_max)
    }
}

/// Multiplicative residual balancing. A larger ρ shrinks the primal
/// residual and grows the dual one, so ρ rises when `‖r‖` dominates and
/// falls when `‖d‖` dominates.
pub fn rb_update(rho: f64, r_norm: f64, d_norm: f64, cfg: &PenaltyConfig) -> f64 {
    let next = if r_norm > cfg.mu_rb * d_norm {
        rho * cfg.eta
    } else if d_norm > cfg.mu_rb * r_norm {
        rho / cfg.eta
    } else {
        rho
    };
    cfg.clip(next)
}

/// Intermediate dual `ȳ = y_prev + ρ_prev (z_prev − x_new)`.
pub fn compute_ybar(
    y_prev: &DVector<f64>,
    rho_prev: f64,
    x_new: &DVector<f64>,
    z_prev: &DVector<f64>,
) -> DVector<f64> {
    y_prev + (z_prev - x_new) * rho_prev
}

/// Classical spectral scalars of a secant pair `(dv, dg)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbScalars {
    /// `⟨dv, dg⟩ / ‖dv‖²`
    pub bb1: f64,
    /// `‖dg‖² / ⟨dv, dg⟩`; `None` when the pair is orthogonal.
    pub bb2: Option<f64>,
    /// Cosine of the angle between `dv` and `dg`.
    pub corr: f64,
}

pub fn bb_scalars(dv: &DVector<f64>, dg: &DVector<f64>) -> Result<BbScalars> {
    let vv = dv.norm_squared();
    let gg = dg.norm_squared();
    if vv == 0.0 || gg == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let vg = dv.dot(dg);
    Ok(BbScalars {
        bb1: vg / vv,
        bb2: (vg != 0.0).then(|| gg / vg),
        corr: vg / (vv.sqrt() * gg.sqrt()),
    })
}

/// `τ = (‖r‖ / ‖d‖)^q`, capped at `tau_max`.
pub fn tau_update(r_norm: f64, d_norm: f64, q: f64, tau_max: f64) -> f64 {
    if d_norm <= 0.0 {
        return tau_max;
    }
    (r_norm / d_norm).powf(q).min(tau_max)
}

/// Regularized BB scalar `(⟨v,g⟩ + τ‖g‖²) / (‖v‖² + τ⟨v,g⟩)`.
///
/// For positive curvature it moves monotonically from BB1 at `τ = 0`
/// toward BB2 as `τ → ∞`.
pub fn rbb_scalar(dv: &DVector<f64>, dg: &DVector<f64>, tau: f64) -> Result<f64> {
    let vg = dv.dot(dg);
    if !(vg > 0.0) {
        return Err(Error::NonpositiveCurvature(vg));
    }
    let vv = dv.norm_squared();
    let gg = dg.norm_squared();
    if tau.is_infinite() {
        return Ok(gg / vg);
    }
    Ok((vg + tau * gg) / (vv + tau * vg))
}

/// Alternating long/short rule in step-size space: with `s_SD = 1/bb1` and
/// `s_MG = 1/bb2`, take `s_MG` when `2 s_MG > s_SD`, else `s_SD − s_MG/2`.
/// Returns the curvature, i.e. the reciprocal of the chosen step.
pub fn hybrid_bb_curvature(s: &BbScalars) -> Option<f64> {
    let bb2 = s.bb2?;
    if !(s.bb1 > 0.0 && bb2 > 0.0) {
        return None;
    }
    let steepest = 1.0 / s.bb1;
    let minimal = 1.0 / bb2;
    let step = if 2.0 * minimal > steepest {
        minimal
    } else {
        steepest - 0.5 * minimal
    };
    Some(1.0 / step)
}

/// A curvature estimate together with the correlation that qualifies it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature {
    pub value: f64,
    pub corr: f64,
}

/// Correlation safeguard: trust a side only when its correlation exceeds
/// `eps_corr`; fall back to the current ρ when neither side qualifies.
pub fn safeguarded_rho(
    rho: f64,
    alpha: Curvature,
    beta: Curvature,
    eps_corr: f64,
) -> f64 {
    let a_ok = alpha.corr > eps_corr && alpha.value > 0.0;
    let b_ok = beta.corr > eps_corr && beta.value > 0.0;
    let next = match (a_ok, b_ok) {
        (true, true) => 1.0 / (alpha.value * beta.value).sqrt(),
        (true, false) => 1.0 / alpha.value,
        (false, true) => 1.0 / beta.value,
        (false, false) => rho,
    };
    if next.is_finite() && next > 0.0 {
        next
    } else {
        rho
    }
}

/// Iterates captured at a spectral update.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    pub y: DVector<f64>,
    pub ybar: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMemory {
    pub last: Option<SpectralPoint>,
    pub tau: f64,
    pub last_rho: f64,
}

impl SpectralMemory {
    pub fn new(rho0: f64) -> Self {
        Self {
            last: None,
            tau: 0.0,
            last_rho: rho0,
        }
    }
}

/// Current iterate as seen by a spectral update.
#[derive(Debug, Clone, Copy)]
pub struct SpectralInput<'a> {
    pub x: &'a DVector<f64>,
    pub z: &'a DVector<f64>,
    pub y: &'a DVector<f64>,
    pub ybar: &'a DVector<f64>,
    pub rho: f64,
    pub r_norm: f64,
    pub d_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralUpdate {
    pub rho: f64,
    pub memory: SpectralMemory,
    pub alpha: Option<Curvature>,
    pub beta: Option<Curvature>,
}

fn side_curvature(
    kind: PenaltyKind,
    dv: &DVector<f64>,
    dg: &DVector<f64>,
    tau: f64,
) -> Option<Curvature> {
    let scalars = bb_scalars(dv, dg).ok()?;
    if !scalars.corr.is_finite() {
        return None;
    }
    let value = match kind {
        PenaltyKind::SpectralBb => hybrid_bb_curvature(&scalars),
        PenaltyKind::RegularizedBb => rbb_scalar(dv, dg, tau).ok(),
        _ => None,
    };
    Some(Curvature {
        // nonpositive curvature still reports its correlation, which fails
        // the safeguard
        value: value.unwrap_or(f64::NAN),
        corr: scalars.corr,
    })
}

/// Spectral or regularized-spectral penalty from the change since the last
/// spectral update. With empty memory ρ is returned unchanged and the
/// memory is populated.
pub fn spectral_rho(
    memory: &SpectralMemory,
    current: &SpectralInput<'_>,
    cfg: &PenaltyConfig,
) -> SpectralUpdate {
    let tau = tau_update(current.r_norm, current.d_norm, cfg.q, cfg.tau_max);
    let point = SpectralPoint {
        x: current.x.clone(),
        z: current.z.clone(),
        y: current.y.clone(),
        ybar: current.ybar.clone(),
    };

    let (rho, alpha, beta) = match (&memory.last, cfg.kind.is_spectral()) {
        (Some(prev), true) => {
            let d_ybar = current.ybar - &prev.ybar;
            let d_y = current.y - &prev.y;
            let d_psi = current.x - &prev.x;
            let d_phi = &prev.z - current.z;

            let alpha_dual = if cfg.kind == PenaltyKind::RegularizedBb && !cfg.rbb_alpha_uses_ybar {
                &d_y
            } else {
                &d_ybar
            };
            let alpha = side_curvature(cfg.kind, alpha_dual, &d_psi, tau);
            let beta = side_curvature(cfg.kind, &d_y, &d_phi, tau);
            let none = Curvature {
                value: f64::NAN,
                corr: 0.0,
            };
            let rho = safeguarded_rho(
                current.rho,
                alpha.unwrap_or(none),
                beta.unwrap_or(none),
                cfg.eps_corr,
            );
            (cfg.clip(rho), alpha, beta)
        }
        _ => (current.rho, None, None),
    };

    SpectralUpdate {
        rho,
        memory: SpectralMemory {
            last: Some(point),
            tau,
            last_rho: rho,
        },
        alpha,
        beta,
    }
}
