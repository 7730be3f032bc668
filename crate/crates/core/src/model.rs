//! The constrained ℓ1-regularized mean-variance problem.

use nalgebra::{DMatrix, DVector, Vector2};

use crate::error::{Error, Result};
use crate::market_data::AssetStats;
use crate::DEFAULT_ZERO_TOL;

/// `min ½ xᵀCx + λ‖x‖₁  s.t.  Dx = b` with `D = [μᵀ; 1ᵀ]` and `b = (e, 1)`.
#[derive(Debug, Clone)]
pub struct PortfolioProblem {
    cov: DMatrix<f64>,
    mu: DVector<f64>,
    target: f64,
    constraints: DMatrix<f64>,
    rhs: Vector2<f64>,
}

impl PortfolioProblem {
    /// Validates and stacks the equality constraints.
    pub fn new(
        cov: DMatrix<f64>,
        mu: DVector<f64>,
        target: f64,
        allow_out_of_range: bool,
    ) -> Result<Self> {
        let n = mu.len();
        if n < 2 {
            return Err(Error::Dimension(format!("need at least 2 assets, found {n}")));
        }
        if cov.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: cov.nrows(),
            });
        }
        if !target.is_finite() || mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("target and means must be finite".into()));
        }
        let (lo, hi) = (mu.min(), mu.max());
        let scale = lo.abs().max(hi.abs());
        if hi - lo <= 1e-12 * scale || hi == lo {
            return Err(Error::DegenerateConstraints);
        }
        if !allow_out_of_range && !(lo..=hi).contains(&target) {
            return Err(Error::TargetOutOfRange {
                target,
                min: lo,
                max: hi,
            });
        }
        if cov.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }

        let mut constraints = DMatrix::from_element(2, n, 1.0);
        constraints.row_mut(0).copy_from(&mu.transpose());
        Ok(Self {
            cov,
            mu,
            target,
            constraints,
            rhs: Vector2::new(target, 1.0),
        })
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    /// The `2 × n` constraint matrix `D`.
    pub fn constraints(&self) -> &DMatrix<f64> {
        &self.constraints
    }

    /// The right-hand side `b = (e, 1)`.
    pub fn rhs(&self) -> DVector<f64> {
        DVector::from_column_slice(self.rhs.as_slice())
    }

    fn check_len(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Portfolio variance `xᵀCx`.
    pub fn risk(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_len(x)?;
        Ok(x.dot(&(&self.cov * x)))
    }

    /// `½ xᵀCx + λ‖x‖₁`.
    pub fn objective(&self, x: &DVector<f64>, lambda: f64) -> Result<f64> {
        Ok(0.5 * self.risk(x)? + lambda * x.lp_norm(1))
    }

    /// `(|xᵀμ − e|, |xᵀ1 − 1|)`.
    pub fn constraint_violation(&self, x: &DVector<f64>) -> Result<(f64, f64)> {
        self.check_len(x)?;
        Ok(((x.dot(&self.mu) - self.target).abs(), (x.sum() - 1.0).abs()))
    }

    /// Minimum-norm point of `{x : Dx = b}`, i.e. `Dᵀ(DDᵀ)⁻¹b`.
    pub fn least_norm_feasible(&self) -> DVector<f64> {
        let d = &self.constraints;
        let gram = d * d.transpose();
        // rank(D) = 2 was checked at construction
        let coeffs = gram
            .lu()
            .solve(&self.rhs())
            .expect("D has full row rank");
        d.transpose() * coeffs
    }
}

/// Convenience wrapper around [`PortfolioProblem::new`] for estimated moments.
pub fn build_problem(
    stats: &AssetStats,
    target: f64,
    allow_out_of_range: bool,
) -> Result<PortfolioProblem> {
    PortfolioProblem::new(stats.cov.clone(), stats.mu.clone(), target, allow_out_of_range)
}

/// Portfolio weights per unit of capital.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio {
    pub weights: DVector<f64>,
    pub zero_tol: f64,
}

impl Portfolio {
    pub fn new(weights: DVector<f64>) -> Self {
        Self {
            weights,
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }

    pub fn with_zero_tol(weights: DVector<f64>, zero_tol: f64) -> Self {
        Self { weights, zero_tol }
    }

    /// Number of weights strictly below `-zero_tol`.
    pub fn short_count(&self) -> usize {
        count_short_positions(&self.weights, self.zero_tol)
    }

    pub fn nonzero_count(&self) -> usize {
        self.weights.iter().filter(|w| w.abs() > self.zero_tol).count()
    }

    pub fn l1_norm(&self) -> f64 {
        self.weights.lp_norm(1)
    }
}

pub fn count_short_positions(x: &DVector<f64>, zero_tol: f64) -> usize {
    x.iter().filter(|&&w| w < -zero_tol).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_asset() -> PortfolioProblem {
        PortfolioProblem::new(
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![0.1, 0.2]),
            0.15,
            false,
        )
        .unwrap()
    }

    #[test]
    fn stacks_constraints() {
        let p = two_asset();
        assert_eq!(
            p.constraints(),
            &DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 1.0, 1.0])
        );
        assert_eq!(p.rhs().as_slice(), &[0.15, 1.0]);
    }

    #[test]
    fn equal_means_are_rejected() {
        let err = PortfolioProblem::new(
            DMatrix::identity(3, 3),
            DVector::from_element(3, 0.1),
            0.1,
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateConstraints));
    }

    #[test]
    fn target_out_of_range() {
        let mu = DVector::from_vec(vec![0.1, 0.2]);
        let err = PortfolioProblem::new(DMatrix::identity(2, 2), mu.clone(), 0.5, false)
            .unwrap_err();
        assert!(matches!(err, Error::TargetOutOfRange { .. }));
        assert!(PortfolioProblem::new(DMatrix::identity(2, 2), mu, 0.5, true).is_ok());
    }

    #[test]
    fn indefinite_covariance_is_rejected() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let err = PortfolioProblem::new(cov, DVector::from_vec(vec![0.1, 0.2]), 0.15, false)
            .unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite));
    }

    #[test]
    fn objective_values() {
        let p = two_asset();
        let x = DVector::from_vec(vec![0.5, 0.5]);
        assert_relative_eq!(p.objective(&x, 0.1).unwrap(), 0.35, epsilon = 1e-15);
        assert_eq!(p.objective(&DVector::zeros(2), 0.0).unwrap(), 0.0);
        assert!(p.objective(&DVector::zeros(3), 0.0).is_err());
    }

    #[test]
    fn violations() {
        let p = two_asset();
        let (r, b) = p.constraint_violation(&DVector::from_vec(vec![0.5, 0.5])).unwrap();
        assert!(r < 1e-12 && b < 1e-12);
        let (r, b) = p.constraint_violation(&DVector::zeros(2)).unwrap();
        assert_eq!((r, b), (0.15, 1.0));
    }

    #[test]
    fn least_norm_point_is_feasible() {
        let p = PortfolioProblem::new(
            DMatrix::identity(4, 4),
            DVector::from_vec(vec![0.01, 0.03, 0.02, 0.015]),
            0.02,
            false,
        )
        .unwrap();
        let x = p.least_norm_feasible();
        let (r, b) = p.constraint_violation(&x).unwrap();
        assert!(r < 1e-15 && b < 1e-15);
    }

    #[test]
    fn short_counts() {
        let x = DVector::from_vec(vec![0.6, -0.1, 0.5]);
        assert_eq!(count_short_positions(&x, 1e-9), 1);
        assert_eq!(count_short_positions(&DVector::from_vec(vec![0.2, 0.8]), 1e-9), 0);
        let tiny = DVector::from_vec(vec![-1e-12, 1.0 + 1e-12]);
        assert_eq!(Portfolio::with_zero_tol(tiny, 1e-9).short_count(), 0);
    }

    proptest! {
        // On the budget hyperplane ‖x‖₁ = 2·Σ_{x_i<0}|x_i| + 1.
        #[test]
        fn l1_equals_short_penalty(
            raw in prop::collection::vec(-2.0f64..2.0, 2..12),
            lambda in 0.0f64..10.0,
        ) {
            let n = raw.len();
            let shift = (1.0 - raw.iter().sum::<f64>()) / n as f64;
            let x = DVector::from_iterator(n, raw.iter().map(|v| v + shift));
            let l1 = x.lp_norm(1);
            let shorts: f64 = x.iter().filter(|v| **v < 0.0).map(|v| v.abs()).sum();
            let lhs = lambda * l1;
            let rhs = 2.0 * lambda * shorts + lambda;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
            prop_assert!(l1 >= 1.0 - 1e-12);
        }
    }
}
