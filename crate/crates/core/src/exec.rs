//! Execution strategy for the data-parallel loops of the pipeline.
//!
//! With the `parallel` feature (on by default) work is spread over the rayon
//! thread pool; without it every loop runs on the calling thread. Both paths
//! produce identical results: work items are computed independently and
//! collected in input order, and any floating-point reduction happens
//! afterwards in a fixed order.

/// Chooses how independent work items are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Exec {
    /// Maps `f` over `items`, returning results in input order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
        }
    }

    /// Like [`Exec::map`] but stops at the first error (in input order for the
    /// sequential path, any failing item for the parallel one).
    pub fn try_map<T, R, E, F>(self, items: &[T], f: F) -> Result<Vec<R>, E>
    where
        T: Sync,
        R: Send,
        E: Send,
        F: Fn(&T) -> Result<R, E> + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
        }
    }

    /// Runs `f` with at most `workers` threads when parallel. `None` uses the
    /// global pool.
    pub fn install<R, F>(self, workers: Option<usize>, f: F) -> R
    where
        R: Send,
        F: FnOnce() -> R + Send,
    {
        match (self, workers) {
            #[cfg(feature = "parallel")]
            (Exec::Parallel, Some(n)) => match rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
            {
                Ok(pool) => pool.install(f),
                Err(err) => {
                    log::warn!("could not build a {n}-thread pool ({err}); using the global pool");
                    f()
                }
            },
            _ => f(),
        }
    }

    pub fn is_parallel(self) -> bool {
        self != Exec::Sequential
    }
}
