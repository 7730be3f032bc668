//! Historical returns, moment estimation and synthetic markets.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Default floor on the smallest covariance eigenvalue.
pub const DEFAULT_JITTER_FLOOR: f64 = 1e-10;

/// An `m × n` matrix of per-period fractional returns, one row per period
/// and one column per asset.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsMatrix {
    values: DMatrix<f64>,
    asset_names: Vec<String>,
}

impl ReturnsMatrix {
    pub fn new(values: DMatrix<f64>, asset_names: Vec<String>) -> Result<Self> {
        let (m, n) = values.shape();
        if m < 2 {
            return Err(Error::Dimension(format!(
                "need at least 2 return periods, found {m}"
            )));
        }
        if n < 2 {
            return Err(Error::Dimension(format!(
                "need at least 2 assets, found {n}"
            )));
        }
        if asset_names.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: asset_names.len(),
            });
        }
        if let Some((idx, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            // column-major storage
            return Err(Error::Dimension(format!(
                "non-finite return at period {}, asset {}",
                idx % m,
                idx / m
            )));
        }
        Ok(Self {
            values,
            asset_names,
        })
    }

    /// Builds a matrix with generated names `A0, A1, ...`.
    pub fn with_default_names(values: DMatrix<f64>) -> Result<Self> {
        let names = (0..values.ncols()).map(|j| format!("A{j}")).collect();
        Self::new(values, names)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn asset_names(&self) -> &[String] {
        &self.asset_names
    }

    pub fn periods(&self) -> usize {
        self.values.nrows()
    }

    pub fn assets(&self) -> usize {
        self.values.ncols()
    }

    /// Parses the header-plus-rows CSV format.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| csv_error(&e, 1))?
            .iter()
            .map(str::to_owned)
            .collect();
        let n = names.len();

        let mut data = Vec::new();
        let mut rows = 0usize;
        for record in rdr.records() {
            let record = record.map_err(|e| csv_error(&e, rows as u64 + 2))?;
            let line = record.position().map_or(rows as u64 + 2, |p| p.line());
            if record.len() != n {
                return Err(Error::RaggedRow {
                    line,
                    expected: n,
                    found: record.len(),
                });
            }
            for (col, field) in record.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| Error::NonNumeric {
                        line,
                        column: col + 1,
                        value: field.to_owned(),
                    })?;
                data.push(v);
            }
            rows += 1;
        }
        if n < 2 {
            return Err(Error::Dimension(format!(
                "need at least 2 assets, header has {n}"
            )));
        }
        if rows < 2 {
            return Err(Error::Dimension(format!(
                "need at least 2 return periods, found {rows}"
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, n, &data), names)
    }

    /// Writes the CSV format. Numbers use Rust's shortest round-trip decimal
    /// representation, which never switches to exponent notation.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.asset_names.join(","))?;
        let mut line = String::new();
        for row in self.values.row_iter() {
            line.clear();
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&v.to_string());
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }
}

fn csv_error(e: &csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Csv {
        line,
        message: e.to_string(),
    }
}

pub fn load_returns_csv(path: impl AsRef<Path>) -> Result<ReturnsMatrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ReturnsMatrix::from_csv_reader(std::io::BufReader::new(file))
}

/// Mean vector and (conditioned) covariance of a returns sample.
#[derive(Debug, Clone)]
pub struct AssetStats {
    pub mu: DVector<f64>,
    pub cov: DMatrix<f64>,
    /// Amount added to the covariance diagonal to make it positive definite.
    pub jitter_applied: f64,
    /// Number of periods the estimate was built from.
    pub periods: usize,
}

impl AssetStats {
    pub fn assets(&self) -> usize {
        self.mu.len()
    }
}

/// Column means and the unbiased sample covariance, shifted along the
/// diagonal when its smallest eigenvalue does not exceed `jitter_floor`.
pub fn estimate_stats(returns: &ReturnsMatrix, jitter_floor: f64) -> AssetStats {
    let r = returns.values();
    let (m, n) = r.shape();
    let mu = DVector::from_iterator(n, r.column_iter().map(|c| c.mean()));

    let mut centered = r.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mu[j]);
    }
    let mut cov = centered.tr_mul(&centered) / (m as f64 - 1.0);
    // Exact symmetry; the product above is symmetric only up to rounding.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = avg;
            cov[(j, i)] = avg;
        }
    }

    let floor = if jitter_floor > 0.0 {
        jitter_floor
    } else {
        // a zero floor still has to produce a strictly positive spectrum
        f64::EPSILON * (cov.trace() / n as f64).max(f64::MIN_POSITIVE)
    };
    let lambda_min = min_eigenvalue(&cov);
    let mut jitter_applied = 0.0;
    if lambda_min <= floor {
        jitter_applied = floor - lambda_min + floor;
        for i in 0..n {
            cov[(i, i)] += jitter_applied;
        }
    }

    AssetStats {
        mu,
        cov,
        jitter_applied,
        periods: m,
    }
}

pub(crate) fn min_eigenvalue(sym: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(sym.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Parameters of the factor-model return generator.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticMarket {
    pub assets: usize,
    pub periods: usize,
    pub seed: u64,
    pub factors: usize,
    /// Standard deviation of the idiosyncratic noise per period.
    pub noise_scale: f64,
}

impl SyntheticMarket {
    pub fn new(assets: usize, periods: usize, seed: u64) -> Self {
        Self {
            assets,
            periods,
            seed,
            factors: 3,
            noise_scale: 0.01,
        }
    }
}

/// Standard deviation of a single factor loading.
const LOADING_SCALE: f64 = 0.02;
const MAX_MEAN_RETURN: f64 = 0.02;

/// Draws returns `r_t = μ + B f_t + ε_t` from a linear factor model.
///
/// The random part of every column is centered, so the sample mean of asset
/// `i` equals its drawn mean `μ_i ∈ [0, 0.02]` up to rounding.
pub fn generate_synthetic_returns(market: &SyntheticMarket) -> Result<ReturnsMatrix> {
    let SyntheticMarket {
        assets: n,
        periods: m,
        seed,
        factors: k,
        noise_scale,
    } = *market;
    if n < 2 || m < 2 {
        return Err(Error::Dimension(format!(
            "need at least 2 assets and 2 periods, got {n} assets and {m} periods"
        )));
    }
    if k < 1 {
        return Err(Error::Dimension("need at least one factor".into()));
    }
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(Error::Config(format!(
            "noise scale must be a nonnegative finite number, got {noise_scale}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> = (0..n)
        .map(|_| rng.random::<f64>() * MAX_MEAN_RETURN)
        .collect();
    let loadings = DMatrix::from_fn(n, k, |_, _| {
        LOADING_SCALE * rng.sample::<f64, _>(StandardNormal)
    });
    let factor_draws = DMatrix::from_fn(m, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let noise = DMatrix::from_fn(m, n, |_, _| {
        noise_scale * rng.sample::<f64, _>(StandardNormal)
    });

    let mut values = &factor_draws * loadings.transpose() + noise;
    for (j, mut col) in values.column_iter_mut().enumerate() {
        let shift = means[j] - col.mean();
        col.add_scalar_mut(shift);
    }
    ReturnsMatrix::with_default_names(values)
}

/// Draws returns whose sample covariance has a prescribed condition number.
///
/// The centered part is `√(m−1) · Q Σ Vᵀ` with `Q` an `m × n` orthonormal
/// basis of centered columns and `V` a random rotation, so the sample
/// covariance equals `V Σ² Vᵀ` and its eigenvalues are log-spaced between
/// `4e-4` and `4e-4 / condition`.
pub fn generate_illconditioned_returns(
    assets: usize,
    periods: usize,
    seed: u64,
    condition: f64,
) -> Result<ReturnsMatrix> {
    let (n, m) = (assets, periods);
    if n < 2 || m <= n {
        return Err(Error::Dimension(format!(
            "need at least 2 assets and more periods than assets, got {n} assets and {m} periods"
        )));
    }
    if !(condition >= 1.0 && condition.is_finite()) {
        return Err(Error::Config(format!(
            "condition number must be finite and >= 1, got {condition}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means: Vec<f64> = (0..n)
        .map(|_| rng.random::<f64>() * MAX_MEAN_RETURN)
        .collect();

    let mut gauss = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    for mut col in gauss.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let basis = gauss.qr().q();
    let rotation = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal))
        .qr()
        .q();

    let top_variance = 4e-4;
    let sigmas = DVector::from_fn(n, |i, _| {
        let frac = i as f64 / (n - 1) as f64;
        (top_variance * condition.powf(-frac)).sqrt()
    });
    let scaled = DMatrix::from_diagonal(&sigmas) * rotation.transpose();
    let mut values = (basis * scaled) * ((m as f64 - 1.0).sqrt());
    for (j, mut col) in values.column_iter_mut().enumerate() {
        let shift = means[j] - col.mean();
        col.add_scalar_mut(shift);
    }
    ReturnsMatrix::with_default_names(values)
}
