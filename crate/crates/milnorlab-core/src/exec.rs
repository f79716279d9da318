//! Batch execution helper: data-parallel map over an index range with a
//! sequential fallback. Output order is always the index order, so callers
//! can accumulate deterministically regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode for the inner loops. `Auto` uses rayon when the crate is
/// built with the `parallel` feature and falls back to sequential otherwise;
/// `Sequential` forces single-threaded evaluation even in parallel builds
/// (used by the benchmarks to compare both paths in one binary).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Auto,
    Sequential,
}

/// Map `f` over `0..n`, returning results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Auto && n > 1 {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Effective worker count for diagnostics.
pub fn worker_count(mode: ExecMode) -> usize {
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Auto {
            return rayon::current_num_threads();
        }
    }
    let _ = mode;
    1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let out = map_indexed(ExecMode::Auto, 1000, |i| i * i);
        assert!(out.iter().enumerate().all(|(i, &v)| v == i * i));
        let seq = map_indexed(ExecMode::Sequential, 1000, |i| i * i);
        assert_eq!(out, seq);
    }
}
