//! Thin wrapper around the optional thread pool.
//!
//! Every parallel loop in this crate produces per-item results that are
//! merged in a fixed order, so output is identical for any worker count.

/// Caps the global worker pool at `n` threads (`0` = automatic). Must be
/// called before the first parallel operation; later calls have no effect.
/// A no-op when the `parallel` feature is disabled.
pub fn configure_threads(n: usize) {
    #[cfg(feature = "parallel")]
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
}

/// Maps `f` over `items`, preserving order in the output.
pub(crate) fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
