//! Ordered data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over the rayon
//! global pool; without it every call runs on the calling thread. Output
//! order always matches input order, so results are identical either way.

use serde::{Deserialize, Serialize};

/// How a sweep is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    /// Use the rayon pool when the `parallel` feature is enabled.
    #[default]
    Parallel,
    Sequential,
}

pub(crate) fn map_ordered<T, U, F>(items: &[T], exec: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Returns true when `Execution::Parallel` actually runs on the rayon pool.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let xs: Vec<u64> = (0..10_000).collect();
        let par = map_ordered(&xs, Execution::Parallel, |x| x * x);
        let seq = map_ordered(&xs, Execution::Sequential, |x| x * x);
        assert_eq!(par, seq);
        assert_eq!(par[9_999], 9_999 * 9_999);
    }
}
