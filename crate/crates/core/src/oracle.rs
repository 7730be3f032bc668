//! Exact solutions for small instances by sign-pattern enumeration.
//!
//! A point `x` is optimal iff there are `ν ∈ ℝ²` and `g ∈ ∂‖x‖₁` with
//!
//! ```text
//! Cx + λg + Dᵀν = 0,   Dx = b.
//! ```
//!
//! Fixing a pattern `s ∈ {−1, 0, 1}ⁿ` (support `S = {i : sᵢ ≠ 0}`, `g_S = s_S`,
//! `x_i = 0` off `S`) turns this into a linear system in `(x_S, ν)`. A pattern
//! is accepted when the solution has the assumed signs and the implied
//! off-support subgradients lie in `[−1, 1]`. The problem is strictly convex,
//! so every accepted pattern describes the same minimizer.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::PortfolioProblem;
use crate::DEFAULT_ZERO_TOL;

/// Largest instance the enumeration accepts (3ⁿ patterns).
pub const MAX_ASSETS: usize = 12;

const SIGN_TOL: f64 = 1e-11;
const SUBGRADIENT_TOL: f64 = 1e-9;
const TIE_TOL: f64 = 1e-10;
const PIVOT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPattern {
    pub signs: Vec<i8>,
}

impl SignPattern {
    pub fn support(&self) -> Vec<usize> {
        (0..self.signs.len()).filter(|&i| self.signs[i] != 0).collect()
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub weights: DVector<f64>,
    pub objective: f64,
    pub multiplier: DVector<f64>,
    pub subgradient: DVector<f64>,
    pub pattern: SignPattern,
    /// False when another accepted pattern with a different support ties
    /// in objective.
    pub unique: bool,
    pub kkt_residual: f64,
}

struct Candidate {
    pattern: SignPattern,
    x: DVector<f64>,
    nu: DVector<f64>,
    g: DVector<f64>,
    objective: f64,
}

fn effective_support(x: &DVector<f64>) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i].abs() > DEFAULT_ZERO_TOL).collect()
}

fn solve_pattern(p: &PortfolioProblem, lambda: f64, signs: &[i8]) -> Option<Candidate> {
    let n = p.n();
    let support: Vec<usize> = (0..n).filter(|&i| signs[i] != 0).collect();
    let k = support.len();
    let c = p.cov();
    let d = p.constraints();
    let b = p.rhs();

    let mut lhs = DMatrix::zeros(k + 2, k + 2);
    let mut rhs = DVector::zeros(k + 2);
    for (a, &i) in support.iter().enumerate() {
        for (bcol, &j) in support.iter().enumerate() {
            lhs[(a, bcol)] = c[(i, j)];
        }
        for r in 0..2 {
            lhs[(a, k + r)] = d[(r, i)];
            lhs[(k + r, a)] = d[(r, i)];
        }
        rhs[a] = -lambda * f64::from(signs[i]);
    }
    rhs[k] = b[0];
    rhs[k + 1] = b[1];

    let lu = lhs.lu();
    let diag = lu.u().diagonal();
    let largest = diag.amax();
    if !(largest > 0.0) || diag.iter().any(|v| v.abs() <= PIVOT_RTOL * largest) {
        return None;
    }
    let sol = lu.solve(&rhs)?;

    let mut x = DVector::zeros(n);
    for (a, &i) in support.iter().enumerate() {
        let xi = sol[a];
        if f64::from(signs[i]) * xi < -SIGN_TOL * (1.0 + xi.abs()) {
            return None;
        }
        x[i] = xi;
    }
    let nu = DVector::from_column_slice(&[sol[k], sol[k + 1]]);

    let mut g = DVector::zeros(n);
    let grad = c * &x + d.transpose() * &nu;
    for i in 0..n {
        if signs[i] != 0 {
            g[i] = f64::from(signs[i]);
            continue;
        }
        let h = -grad[i];
        if lambda > 0.0 {
            if h.abs() > lambda * (1.0 + SUBGRADIENT_TOL) + SUBGRADIENT_TOL * 1e-3 {
                return None;
            }
            g[i] = (h / lambda).clamp(-1.0, 1.0);
        } else if h.abs() > SUBGRADIENT_TOL * 1e-3 {
            return None;
        }
    }

    let objective = p.objective(&x, lambda).ok()?;
    Some(Candidate {
        pattern: SignPattern {
            signs: signs.to_vec(),
        },
        x,
        nu,
        g,
        objective,
    })
}

/// Exact minimizer of `½xᵀCx + λ‖x‖₁` over `Dx = b` for `n ≤ 12`.
pub fn enumerate_solve(p: &PortfolioProblem, lambda: f64) -> Result<OracleResult> {
    let n = p.n();
    if n > MAX_ASSETS {
        return Err(Error::Dimension(format!(
            "enumeration supports at most {MAX_ASSETS} assets, got {n}"
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("lambda must be nonnegative, got {lambda}")));
    }

    let mut best: Option<Candidate> = None;
    let mut accepted_supports: Vec<(f64, Vec<usize>)> = Vec::new();
    let total = 3usize.pow(n as u32);
    // digit 0 → −1, 1 → 0, 2 → +1; counting order is lexicographic
    let mut signs = vec![-1i8; n];
    for code in 0..total {
        let mut c = code;
        for i in (0..n).rev() {
            signs[i] = (c % 3) as i8 - 1;
            c /= 3;
        }
        if signs.iter().filter(|s| **s != 0).count() < 2 {
            continue;
        }
        let Some(cand) = solve_pattern(p, lambda, &signs) else {
            continue;
        };
        accepted_supports.push((cand.objective, effective_support(&cand.x)));
        if best.as_ref().is_none_or(|b| cand.objective < b.objective) {
            best = Some(cand);
        }
    }

    let best = best.ok_or(Error::Infeasible)?;
    let best_support = effective_support(&best.x);
    let unique = !accepted_supports
        .iter()
        .any(|(obj, sup)| (obj - best.objective).abs() <= TIE_TOL && *sup != best_support);
    let kkt_residual = check_kkt(p, lambda, &best.x, &best.nu, &best.g)?;
    Ok(OracleResult {
        weights: best.x,
        objective: best.objective,
        multiplier: best.nu,
        subgradient: best.g,
        pattern: best.pattern,
        unique,
        kkt_residual,
    })
}

/// Largest violation of the optimality system at `(x, ν, g)`.
pub fn check_kkt(
    p: &PortfolioProblem,
    lambda: f64,
    x: &DVector<f64>,
    nu: &DVector<f64>,
    g: &DVector<f64>,
) -> Result<f64> {
    let n = p.n();
    for len in [x.len(), g.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    if nu.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: nu.len() });
    }
    let d = p.constraints();
    let stationarity = (p.cov() * x + g * lambda + d.transpose() * nu).amax();
    let feasibility = (d * x - p.rhs()).amax();
    if lambda == 0.0 {
        // g does not enter the system
        return Ok(stationarity.max(feasibility));
    }
    let subgradient = (0..n)
        .map(|i| {
            if x[i].abs() <= DEFAULT_ZERO_TOL {
                (g[i].abs() - 1.0).max(0.0)
            } else {
                (g[i] - x[i].signum()).abs()
            }
        })
        .fold(0.0, f64::max);
    Ok(stationarity.max(feasibility).max(subgradient))
}
