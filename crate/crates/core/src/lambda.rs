//! Regularization weight: sample-size based start and short-sale driven
//! increases.

use crate::error::{Error, Result};

/// Default cap on adaptive increases of λ.
pub const DEFAULT_MAX_ADJUSTMENTS: usize = 50;

/// Default growth factor when the violation ratio is exactly one.
pub const DEFAULT_UNIT_RATIO_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaMode {
    /// User-supplied λ, never changed.
    Fixed,
    /// λ = 1/(mn), never changed.
    AutoInitial,
    /// Start from λ₀ and scale up while short positions exceed the threshold.
    Adaptive,
}

impl LambdaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LambdaMode::Fixed => "fixed",
            LambdaMode::AutoInitial => "auto-initial",
            LambdaMode::Adaptive => "adaptive",
        }
    }
}

/// `λ₀ = 1/(mn)` for `m` return periods and `n` assets.
pub fn initial_lambda(periods: usize, assets: usize) -> Result<f64> {
    if periods < 2 || assets < 2 {
        return Err(Error::Dimension(format!(
            "initial lambda needs at least 2 periods and 2 assets, got {periods} and {assets}"
        )));
    }
    Ok(1.0 / (periods as f64 * assets as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSchedule {
    pub lambda0: f64,
    pub current: f64,
    /// Tolerated number of short positions.
    pub sn: usize,
    pub adjustments_made: usize,
    pub max_adjustments: usize,
    /// Factor applied instead of `sm/sn` when that ratio is one, which
    /// happens only for `sn = 0, sm = 1`.
    pub unit_ratio_factor: f64,
    pub mode: LambdaMode,
}

impl LambdaSchedule {
    pub fn fixed(lambda: f64) -> Self {
        Self {
            lambda0: lambda,
            current: lambda,
            sn: 0,
            adjustments_made: 0,
            max_adjustments: 0,
            unit_ratio_factor: DEFAULT_UNIT_RATIO_FACTOR,
            mode: LambdaMode::Fixed,
        }
    }

    pub fn auto_initial(periods: usize, assets: usize) -> Result<Self> {
        let lambda = initial_lambda(periods, assets)?;
        Ok(Self {
            mode: LambdaMode::AutoInitial,
            ..Self::fixed(lambda)
        })
    }

    pub fn adaptive(lambda0: f64, sn: usize) -> Self {
        Self {
            lambda0,
            current: lambda0,
            sn,
            adjustments_made: 0,
            max_adjustments: DEFAULT_MAX_ADJUSTMENTS,
            unit_ratio_factor: DEFAULT_UNIT_RATIO_FACTOR,
            mode: LambdaMode::Adaptive,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == LambdaMode::Adaptive {
            if !(self.current > 0.0 && self.current.is_finite()) {
                return Err(Error::Config(format!(
                    "adaptive lambda needs a positive starting value, got {}",
                    self.current
                )));
            }
            if !(self.unit_ratio_factor > 1.0 && self.unit_ratio_factor.is_finite()) {
                return Err(Error::Config(format!(
                    "unit_ratio_factor must exceed 1, got {}",
                    self.unit_ratio_factor
                )));
            }
        } else if !(self.current >= 0.0 && self.current.is_finite()) {
            return Err(Error::Config(format!(
                "lambda must be nonnegative and finite, got {}",
                self.current
            )));
        }
        Ok(())
    }

    /// Whether `short_count` short positions trigger an increase.
    pub fn triggers(&self, short_count: usize) -> bool {
        self.mode == LambdaMode::Adaptive
            && short_count > self.sn
            && self.adjustments_made < self.max_adjustments
    }

    /// `λ ← (sm/sn)·λ` when `sm > sn` and adjustments remain. A zero
    /// threshold is treated as one in the ratio, and a ratio of exactly one
    /// is replaced by `unit_ratio_factor` so that every adjustment raises λ.
    pub fn maybe_adjust(&self, short_count: usize) -> Self {
        if !self.triggers(short_count) {
            return self.clone();
        }
        let ratio = short_count as f64 / self.sn.max(1) as f64;
        let ratio = if ratio > 1.0 { ratio } else { self.unit_ratio_factor };
        Self {
            current: self.current * ratio,
            adjustments_made: self.adjustments_made + 1,
            ..self.clone()
        }
    }
}
