//! Data-parallel execution with a sequential fallback.
//!
//! Everything in this crate that fans out over independent work items
//! (replications, bootstrap resamples, cross-validation cells, per-grid
//! solves) goes through [`map_indexed`]. With the `parallel` feature the
//! map runs on the rayon pool; without it the same closure runs in a
//! plain loop. Outputs are ordered by index, so numerical results do not
//! depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Apply `f` to every index in `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Always-sequential variant of [`map_indexed`], kept for benchmarks and
/// for pinning down scheduling-independence in tests.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Whether the parallel pool is compiled in.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Cap the global worker pool at `n` threads. Must be called before the
/// pool is first used; later calls report an error. No-op without the
/// `parallel` feature.
pub fn configure_threads(n: usize) -> std::result::Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        Ok(())
    }
}
