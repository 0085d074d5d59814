//! Configuration, orchestration and artifact export for `fsi-core` runs.

pub mod artifacts;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod mms;
pub mod run;

pub use config::{parse_config, parse_config_str, RunConfig, RunMode};
pub use error::{exit, HarnessError};
pub use run::{run, RunOptions, RunSummary};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "FSI_THREADS";

/// Size the global worker pool from `FSI_THREADS` when set.
pub fn init_threads() -> Result<Option<usize>, HarnessError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| HarnessError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::Config(format!("cannot size the thread pool: {e}")))?;
    Ok(Some(n))
}
