//! Ordered data-parallel execution with a sequential fallback.
//!
//! Every batch operation in the crate goes through [`Exec`]. With one worker,
//! or when the crate is built without the `parallel` feature, work runs on the
//! calling thread in input order. Otherwise it runs on a dedicated rayon pool.
//! Results always come back in input order, so output never depends on the
//! worker count.

#[cfg(feature = "parallel")]
use std::sync::Arc;

#[cfg(feature = "parallel")]
use crate::Error;
use crate::Result;

#[derive(Clone)]
pub struct Exec {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl std::fmt::Debug for Exec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Exec").field("workers", &self.workers).finish()
    }
}

impl Exec {
    pub fn sequential() -> Self {
        Exec {
            workers: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    /// `workers == 0` selects one worker per available core.
    pub fn new(workers: usize) -> Result<Self> {
        let workers = if workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            workers
        };
        if workers == 1 {
            return Ok(Self::sequential());
        }
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::invalid(format!("cannot start {workers} workers: {e}")))?;
            Ok(Exec {
                workers,
                pool: Some(Arc::new(pool)),
            })
        }
        #[cfg(not(feature = "parallel"))]
        {
            log::warn!("built without the `parallel` feature; running {workers} workers sequentially");
            Ok(Exec { workers })
        }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn is_sequential(&self) -> bool {
        self.workers == 1
    }

    /// Maps `f` over `items`, preserving order. `f` receives the item index.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect());
        }
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }

    /// Runs `f(worker_index)` once per worker, concurrently when possible.
    pub fn for_each_worker<F>(&self, f: F)
    where
        F: Fn(usize) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            let n = self.workers;
            pool.install(|| (0..n).into_par_iter().for_each(f));
            return;
        }
        (0..self.workers).for_each(f);
    }
}

impl Default for Exec {
    fn default() -> Self {
        Self::sequential()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let items: Vec<u32> = (0..1000).collect();
        for workers in [1, 2, 4] {
            let exec = Exec::new(workers).unwrap();
            let out = exec.map(&items, |i, x| (i as u32) * 2 + x);
            assert_eq!(out, items.iter().map(|x| x * 3).collect::<Vec<_>>());
        }
    }

    #[test]
    fn every_worker_runs_once() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let exec = Exec::new(3).unwrap();
        let hits = AtomicUsize::new(0);
        exec.for_each_worker(|_| {
            hits.fetch_add(1, Ordering::Relaxed);
        });
        assert_eq!(hits.into_inner(), 3);
    }
}
