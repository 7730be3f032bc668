//! Scaled-form ADMM reference written without the solver's internals, for
//! iterate-by-iterate comparison.

use portfolio_admm::PortfolioProblem;

/// Gaussian elimination with partial pivoting on plain vectors.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Scaled-form ADMM for `min ½xᵀCx + λ‖z‖₁, Dx = b, x = z` with `u = −y/ρ`
/// (the textbook sign convention), written without the library.
pub struct Textbook {
    c: Vec<Vec<f64>>,
    d: [Vec<f64>; 2],
    b: [f64; 2],
    rho: f64,
    lambda: f64,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub u: Vec<f64>,
}

impl Textbook {
    pub fn new(p: &PortfolioProblem, rho: f64, lambda: f64) -> Self {
        let n = p.n();
        let c: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| p.cov()[(i, j)]).collect()).collect();
        let d = [p.mu().iter().copied().collect::<Vec<_>>(), vec![1.0; n]];
        let b = [p.target(), 1.0];
        // least-norm point Dᵀ(DDᵀ)⁻¹b with the 2×2 inverse written out
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let (g00, g01, g11) = (dot(&d[0], &d[0]), dot(&d[0], &d[1]), dot(&d[1], &d[1]));
        let det = g00 * g11 - g01 * g01;
        let w0 = (g11 * b[0] - g01 * b[1]) / det;
        let w1 = (g00 * b[1] - g01 * b[0]) / det;
        let x: Vec<f64> = (0..n).map(|i| d[0][i] * w0 + d[1][i] * w1).collect();
        Self {
            c,
            d,
            b,
            rho,
            lambda,
            z: x.clone(),
            x,
            u: vec![0.0; n],
        }
    }

    pub fn step(&mut self) {
        let n = self.x.len();
        let mut a = vec![vec![0.0; n + 2]; n + 2];
        let mut rhs = vec![0.0; n + 2];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = self.c[i][j];
            }
            a[i][i] += self.rho;
            for r in 0..2 {
                a[i][n + r] = self.d[r][i];
                a[n + r][i] = self.d[r][i];
            }
            rhs[i] = self.rho * (self.z[i] - self.u[i]);
        }
        rhs[n] = self.b[0];
        rhs[n + 1] = self.b[1];
        let sol = gauss_solve(a, rhs);
        self.x = sol[..n].to_vec();
        let kappa = self.lambda / self.rho;
        for i in 0..n {
            let v = self.x[i] + self.u[i];
            self.z[i] = v.signum() * (v.abs() - kappa).max(0.0);
        }
        for i in 0..n {
            self.u[i] += self.x[i] - self.z[i];
        }
    }
}
