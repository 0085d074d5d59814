use thiserror::Error;

use crate::geometry::Domain;

pub type Result<T> = std::result::Result<T, FsiError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FsiError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain mismatch: {what} is not available on {domain:?}")]
    DomainMismatch { domain: Domain, what: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid density: reference density must be positive (min {min})")]
    InvalidDensity { min: f64 },

    #[error("floor breach: {quantity} reached {value:.3e} below floor {floor:.3e}")]
    FloorBreach {
        quantity: &'static str,
        value: f64,
        floor: f64,
    },

    #[error("inner Picard loop did not converge after {sweeps} sweeps (last diff {last_diff:.3e})")]
    InnerDivergence { sweeps: usize, last_diff: f64 },

    #[error("fixed point did not converge after {iterations} iterations (last diff {last_diff:.3e})")]
    NonConvergence { iterations: usize, last_diff: f64 },

    #[error("initial data incompatible: {0}")]
    Incompatible(String),

    #[error("solver failure: {0}")]
    Solver(String),
}

impl FsiError {
    /// Stable machine-readable code, used by the CLI for exit statuses and summaries.
    pub fn code(&self) -> &'static str {
        match self {
            FsiError::Config(_) => "config",
            FsiError::InvalidParameter(_) => "invalid-parameter",
            FsiError::DomainMismatch { .. } => "domain-mismatch",
            FsiError::Shape(_) => "shape",
            FsiError::InvalidDensity { .. } => "invalid-density",
            FsiError::FloorBreach { .. } => "floor-breach",
            FsiError::InnerDivergence { .. } => "inner-divergence",
            FsiError::NonConvergence { .. } => "non-convergence",
            FsiError::Incompatible(_) => "incompatible",
            FsiError::Solver(_) => "solver",
        }
    }
}
