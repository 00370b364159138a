//! Pluggable execution of independent jobs (kernel columns, grid points).
//!
//! The core stays single-threaded; a thread pool implementation lives in the
//! std companion crate. Results are always returned in job order, so every
//! reduction downstream is deterministic.

use alloc::vec::Vec;

use crate::error::Result;

pub trait Executor: Sync {
    /// Run `job(0..jobs)` and return the results in index order.
    fn map(&self, jobs: usize, job: &(dyn Fn(usize) -> Result<Vec<f64>> + Sync)) -> Vec<Result<Vec<f64>>>;

    /// Worker count, for diagnostics.
    fn threads(&self) -> usize {
        1
    }
}

/// Runs jobs one after another on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map(&self, jobs: usize, job: &(dyn Fn(usize) -> Result<Vec<f64>> + Sync)) -> Vec<Result<Vec<f64>>> {
        (0..jobs).map(job).collect()
    }
}

/// Run all jobs and fail on the first error in index order.
pub fn run_all(
    exec: &dyn Executor,
    jobs: usize,
    job: &(dyn Fn(usize) -> Result<Vec<f64>> + Sync),
) -> Result<Vec<Vec<f64>>> {
    exec.map(jobs, job).into_iter().collect()
}
