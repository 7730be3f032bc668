//! Exact x-update through the equality-constrained KKT system
//!
//! ```text
//! [ C + ρI   Dᵀ ] [x]   [ρz + y]
//! [ D        0  ] [ν] = [  b   ]
//! ```
//!
//! The block matrix depends on ρ only, so one factorization serves every
//! iteration until the penalty changes.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::model::PortfolioProblem;

/// Singular values of `D` below this fraction of the largest count as zero.
const RANK_RTOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct KktFactorization {
    rho: f64,
    n: usize,
    block: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

#[derive(Debug, Clone)]
pub struct KktSolution {
    pub x: DVector<f64>,
    /// Multipliers of the return and budget constraints.
    pub nu: DVector<f64>,
}

impl KktFactorization {
    pub fn new(problem: &PortfolioProblem, rho: f64) -> Result<Self> {
        Self::from_blocks(problem.cov(), problem.constraints(), rho)
    }

    /// Factorizes `[[C + ρI, Dᵀ], [D, 0]]` for an arbitrary constraint block.
    pub fn from_blocks(cov: &DMatrix<f64>, constraints: &DMatrix<f64>, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Config(format!("rho must be positive and finite, got {rho}")));
        }
        let n = cov.nrows();
        let p = constraints.nrows();
        if cov.ncols() != n || constraints.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: constraints.ncols(),
            });
        }

        let mut block = DMatrix::zeros(n + p, n + p);
        block.view_mut((0, 0), (n, n)).copy_from(cov);
        for i in 0..n {
            block[(i, i)] += rho;
        }
        block.view_mut((0, n), (n, p)).copy_from(&constraints.transpose());
        block.view_mut((n, 0), (p, n)).copy_from(constraints);

        // The block matrix is nonsingular iff C + ρI is positive definite and
        // the constraint rows are independent.
        if block.view((0, 0), (n, n)).into_owned().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        let sv = constraints.singular_values();
        let largest = sv.max();
        if !(largest > 0.0) || sv.min() <= RANK_RTOL * largest {
            return Err(Error::SingularKkt);
        }
        let lu = block.clone().lu();
        Ok(Self { rho, n, block, lu })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves the block system for an arbitrary right-hand side, with one
    /// step of iterative refinement.
    pub fn solve_rhs(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut sol = self.lu.solve(rhs).expect("factorization is nonsingular");
        let residual = rhs - &self.block * &sol;
        if let Some(correction) = self.lu.solve(&residual) {
            sol += correction;
        }
        sol
    }

    /// Minimizes `½xᵀCx + (ρ/2)‖x − z − y/ρ‖²` over `{x : Dx = b}`.
    pub fn solve_x_update(
        &self,
        z: &DVector<f64>,
        y: &DVector<f64>,
        rho: f64,
        b: &DVector<f64>,
    ) -> Result<KktSolution> {
        if rho != self.rho {
            return Err(Error::RhoMismatch {
                factored: self.rho,
                requested: rho,
            });
        }
        let n = self.n;
        let p = self.block.nrows() - n;
        if z.len() != n || y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: z.len().max(y.len()),
            });
        }
        if b.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: b.len(),
            });
        }
        let mut rhs = DVector::zeros(n + p);
        rhs.rows_mut(0, n).copy_from(&(z * rho + y));
        rhs.rows_mut(n, p).copy_from(b);
        let sol = self.solve_rhs(&rhs);
        Ok(KktSolution {
            x: sol.rows(0, n).into_owned(),
            nu: sol.rows(n, p).into_owned(),
        })
    }
}
