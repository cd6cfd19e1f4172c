//! Worker pools with a deterministic, order-preserving map.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A configurable number of worker threads. Results never depend on the count:
/// every parallel map returns its outputs in index order.
#[derive(Clone, Default)]
pub struct Workers {
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl fmt::Debug for Workers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Workers").field("threads", &self.threads()).finish()
    }
}

impl Workers {
    pub fn sequential() -> Self {
        Self { pool: None }
    }

    pub fn new(threads: usize) -> Result<Self> {
        if threads <= 1 {
            return Ok(Self::sequential());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
        Ok(Self {
            pool: Some(Arc::new(pool)),
        })
    }

    pub fn threads(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    /// `(0..len).map(f)` evaluated on the pool, collected in index order.
    pub fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match &self.pool {
            None => (0..len).map(f).collect(),
            Some(pool) => pool.install(|| (0..len).into_par_iter().map(f).collect()),
        }
    }

    /// Calls `f(k, column_k, &mut out[k])` for each length-`n` column of the
    /// column-major buffer `data`.
    pub fn for_each_column<F>(&self, data: &mut [f64], n: usize, out: &mut [f64], f: F)
    where
        F: Fn(usize, &mut [f64], &mut f64) + Sync + Send,
    {
        match &self.pool {
            None => data
                .chunks_mut(n)
                .zip(out.iter_mut())
                .enumerate()
                .for_each(|(k, (c, o))| f(k, c, o)),
            Some(pool) => pool.install(|| {
                data.par_chunks_mut(n)
                    .zip(out.par_iter_mut())
                    .enumerate()
                    .for_each(|(k, (c, o))| f(k, c, o))
            }),
        }
    }
}
