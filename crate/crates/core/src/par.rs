//! Trial-level data parallelism.
//!
//! With the `parallel` feature (on by default) trials are spread over the
//! rayon pool; without it every entry point runs sequentially. Results are
//! always returned in trial order, so output does not depend on the mode.

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// `f(0), f(1), ..., f(count - 1)`, in order. Stops at the first error in
/// sequential mode; in parallel mode the lowest-index error is returned.
pub fn map_trials<T, F>(count: u64, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        _ => (0..count).map(f).collect(),
    }
}

/// The lowest `i` in `0..count` for which `f(i)` yields `Some`.
pub fn find_first<T, F>(count: u64, exec: Execution, f: F) -> Result<Option<T>>
where
    T: Send,
    F: Fn(u64) -> Result<Option<T>> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            // errors count as hits so the earliest one surfaces
            let hit = (0..count)
                .into_par_iter()
                .map(&f)
                .find_first(|r| !matches!(r, Ok(None)));
            hit.transpose().map(Option::flatten)
        }
        _ => {
            for i in 0..count {
                if let Some(v) = f(i)? {
                    return Ok(Some(v));
                }
            }
            Ok(None)
        }
    }
}
