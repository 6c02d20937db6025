//! Data-parallel helpers.
//!
//! Every parallel loop in the crate goes through [`Execution`], so the same
//! computation can run on the rayon pool or on the calling thread. Results are
//! always collected in input order; the choice never changes any output.
//! Without the `parallel` feature, [`Execution::Parallel`] degrades to the
//! sequential path.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run work on more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Map `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Like [`map`], stopping at an error. When several items fail, the error
/// reported is the one with the lowest index on both paths.
pub fn try_map<T, R, E, F>(exec: Execution, items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map(exec, items, f).into_iter().collect()
}

/// Run `op` on a dedicated pool of `threads` workers. `threads == 0` uses the
/// global pool; `threads == 1`, or a build without the `parallel` feature, runs
/// `op` on the calling thread.
pub fn with_threads<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if threads > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            return pool.install(op);
        }
    }
    let _ = threads;
    op()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map(Execution::Sequential, &items, |x| x * x);
        let par = map(Execution::Parallel, &items, |x| x * x);
        assert_eq!(seq, par);
    }

    #[test]
    fn first_error_wins() {
        let items: Vec<u32> = (0..100).collect();
        let f = |&x: &u32| if x % 7 == 3 { Err(x) } else { Ok(x) };
        assert_eq!(try_map(Execution::Sequential, &items, f), Err(3));
        assert_eq!(try_map(Execution::Parallel, &items, f), Err(3));
    }
}
