use thiserror::Error;

/// Errors raised by the exact-diagonalization engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice parameters: {0}")]
    InvalidParams(String),

    #[error("sector dimension overflows a 64-bit count (M = {sites}, N = {excitations})")]
    DimensionOverflow { sites: usize, excitations: usize },

    #[error("sector (M = {sites}, N = {excitations}) has dimension {dim}, above the cap of {cap}")]
    ResourceCap {
        sites: usize,
        excitations: usize,
        dim: u64,
        cap: u64,
    },

    #[error("configuration is not a member of the sector: {0}")]
    NotAMember(String),

    #[error("index {index} out of range for sector of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("eigensolver did not converge after {iterations} matvecs ({restarts} restarts); best residual {best_residual:e}")]
    NoConvergence {
        iterations: usize,
        restarts: usize,
        best_residual: f64,
    },

    #[error("site {site} has zero photon occupation; normalized correlation undefined")]
    ZeroDiagonal { site: usize },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("extrapolation is ill-posed: {0}")]
    Extrapolation(String),

    #[error("ratio grid exhausted without finding a gap above {gap_tol} MHz")]
    RatioGridExhausted { gap_tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
