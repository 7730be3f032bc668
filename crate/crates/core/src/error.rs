use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error at line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("line {line}, column {column}: `{value}` is not a finite number")]
    NonNumeric {
        line: u64,
        column: usize,
        value: String,
    },

    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("target return {target} outside the range of asset means [{min}, {max}]")]
    TargetOutOfRange { target: f64, min: f64, max: f64 },

    #[error("constraint matrix has rank < 2: all asset means are equal")]
    DegenerateConstraints,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("KKT block matrix is singular")]
    SingularKkt,

    #[error("factorization built for rho = {factored}, solve requested rho = {requested}")]
    RhoMismatch { factored: f64, requested: f64 },

    #[error("nonpositive curvature: <dy, dg> = {0}")]
    NonpositiveCurvature(f64),

    #[error("zero-norm difference vector")]
    ZeroNorm,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no sign pattern satisfies the optimality conditions")]
    Infeasible,
}
