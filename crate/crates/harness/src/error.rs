use fsi_core::FsiError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Process exit statuses. Each failure or warning path has its own code.
pub mod exit {
    pub const OK: i32 = 0;
    /// I/O, serialization, or a solver error without a dedicated code.
    pub const INTERNAL: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NON_CONVERGENCE: i32 = 3;
    pub const FLOOR_BREACH: i32 = 4;
    pub const INNER_DIVERGENCE: i32 = 5;
    pub const INCOMPATIBLE: i32 = 6;
    /// A lab, compatibility or MMS check did not meet its target.
    pub const CHECK_FAILED: i32 = 7;
    /// The run completed but recorded warnings.
    pub const WARNINGS: i32 = 8;
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] FsiError),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

pub fn core_exit_code(e: &FsiError) -> i32 {
    match e {
        FsiError::Config(_) => exit::CONFIG,
        FsiError::NonConvergence { .. } => exit::NON_CONVERGENCE,
        FsiError::FloorBreach { .. } => exit::FLOOR_BREACH,
        FsiError::InnerDivergence { .. } => exit::INNER_DIVERGENCE,
        FsiError::Incompatible(_) => exit::INCOMPATIBLE,
        _ => exit::INTERNAL,
    }
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => exit::CONFIG,
            HarnessError::Core(e) => core_exit_code(e),
            HarnessError::Io(_) => exit::INTERNAL,
            HarnessError::Checkpoint(_) => exit::CONFIG,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "config",
            HarnessError::Core(e) => e.code(),
            HarnessError::Io(_) => "io",
            HarnessError::Checkpoint(_) => "checkpoint",
        }
    }
}

/// Machine-readable failure recorded in a run summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

impl ErrorInfo {
    pub fn from_core(e: &FsiError) -> Self {
        ErrorInfo { code: e.code().into(), message: e.to_string() }
    }
}
