use thiserror::Error;

use crate::complex_sets::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("set is not a subset of the base set R")]
    NotASubset,

    #[error("code {code} out of range for a base set of size {size} (must be < 2^{size})")]
    CodeOutOfRange { code: u64, size: usize },

    #[error("{what}: size {size} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("duplicate or near-coincident labels {first} and {second}")]
    DuplicateLabel { first: Label, second: Label },

    #[error("label {label} is not finite")]
    NonFiniteLabel { label: Label },

    #[error("truncation n_max = {n_max} is inadequate (needs at least {required})")]
    InadequateTruncation { n_max: usize, required: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Gram matrix is ill conditioned: cond = {cond:.3e} exceeds {limit:.3e}")]
    IllConditioned { cond: f64, limit: f64 },

    #[error("state is not in the coherent space (residual {residual:.3e} > {tolerance:.3e})")]
    NotInSpace { residual: f64, tolerance: f64 },

    #[error("not a density matrix: {0}")]
    NotADensityMatrix(String),

    #[error("quadrature grid too small: successive grids differ by {difference:.3e} (> {tolerance:.3e})")]
    GridTooSmall { difference: f64, tolerance: f64 },

    #[error("operator is not trace class (non-zero identity component)")]
    NotTraceClass,

    #[error("Gram spectrum is degenerate (smallest relative gap {gap:.3e})")]
    DegenerateSpectrum { gap: f64 },

    #[error("expected a {expected}-point coherent space, got {found} labels")]
    WrongSpaceSize { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
