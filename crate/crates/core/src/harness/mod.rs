//! Command-line harness: sample files, single estimates, and seeded Monte
//! Carlo sweeps whose output does not depend on the number of workers.

pub mod cli;
pub mod config;
pub mod io;
pub mod mixture;
pub mod run;
pub mod sweep;

pub use config::{DivergenceKind, EstimatorKind};
pub use mixture::{run_mixture, MixtureConfig, MixtureRow};
pub use sweep::{run_sweep, ResultTable, SkippedCell, SweepConfig, SweepReport, SweepRow};

use crate::error::{Error, Result};

/// Runs `f` on a dedicated thread pool with `workers` threads (all cores
/// when `None`).
pub fn with_workers<T, F>(workers: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::Parse("workers must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidSample(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
