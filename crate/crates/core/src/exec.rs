//! Replication fan-out.
//!
//! With the `parallel` feature (default) replications run on rayon; without
//! it everything is sequential. Results are always returned in replication
//! order, so output never depends on scheduling.

use std::fmt;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "FJLIMIT_THREADS";

/// Replication schedule; `Parallel` is the default when compiled in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl fmt::Display for Exec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exec::Sequential => f.write_str("sequential"),
            #[cfg(feature = "parallel")]
            Exec::Parallel => f.write_str("parallel"),
        }
    }
}

impl Exec {
    /// Evaluates `f(0..n)` and collects in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
        }
    }

    /// Fallible variant of [`Exec::map`]; the first error in index order wins.
    pub fn try_map<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}

/// Reads the thread cap from `FJLIMIT_THREADS`, if set and valid.
pub fn thread_cap_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Installs the global rayon pool with the `FJLIMIT_THREADS` cap. Later calls
/// are no-ops.
pub fn init_thread_pool() {
    #[cfg(feature = "parallel")]
    if let Some(n) = thread_cap_from_env() {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
