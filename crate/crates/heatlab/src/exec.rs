//! Thread-pool executor for the core's independent jobs.

use heatlab_core::error::Result;
use heatlab_core::exec::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "HEATLAB_THREADS";

pub struct RayonExecutor {
    pool: ThreadPool,
}

impl RayonExecutor {
    /// `threads = None` lets rayon pick (one per core).
    pub fn new(threads: Option<usize>) -> Self {
        let mut b = ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n.max(1));
        }
        Self {
            pool: b.build().expect("thread pool"),
        }
    }

    /// Honours `HEATLAB_THREADS` when it parses as a positive integer.
    pub fn from_env() -> Self {
        let n = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
        Self::new(n)
    }
}

impl Executor for RayonExecutor {
    fn map(&self, jobs: usize, job: &(dyn Fn(usize) -> Result<Vec<f64>> + Sync)) -> Vec<Result<Vec<f64>>> {
        // indexed collect keeps job order, so reductions stay deterministic
        self.pool.install(|| (0..jobs).into_par_iter().map(job).collect())
    }

    fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use heatlab_core::exec::Sequential;

    #[test]
    fn matches_sequential_order() {
        let job = |i: usize| Ok(vec![i as f64, (i * i) as f64]);
        let par: Vec<_> = RayonExecutor::new(Some(3)).map(50, &job).into_iter().map(|r| r.unwrap()).collect();
        let seq: Vec<_> = Sequential.map(50, &job).into_iter().map(|r| r.unwrap()).collect();
        assert_eq!(par, seq);
        assert_eq!(RayonExecutor::new(Some(3)).threads(), 3);
    }
}
