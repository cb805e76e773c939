use thiserror::Error;

/// Errors raised by state validation and the numerical routines.
///
/// Magnitudes are reported as `f64` regardless of the scalar type in use.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {row} has {cols} columns")]
    NotSquare { rows: usize, row: usize, cols: usize },

    #[error("empty matrix")]
    Empty,

    #[error("NotHermitian: |rho[{row}][{col}] - conj(rho[{col}][{row}])| = {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("TraceNotOne: trace = {trace_re} + {trace_im}i")]
    TraceNotOne { trace_re: f64, trace_im: f64 },

    #[error("NotPositive: smallest eigenvalue {eigenvalue:e}")]
    NotPositive { eigenvalue: f64 },

    #[error("NotNormalized: squared norm {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{name} = {value} out of range {range}")]
    OutOfRange { name: &'static str, value: f64, range: String },

    #[error("unsupported moment order {0}; supported orders are 1, 2, 3")]
    UnsupportedOrder(u32),

    #[error("imaginary residue {residue:e} exceeds tolerance; input is not Hermitian")]
    ImaginaryResidue { residue: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("state file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn out_of_range(name: &'static str, value: f64, range: impl Into<String>) -> Error {
    Error::OutOfRange { name, value, range: range.into() }
}
