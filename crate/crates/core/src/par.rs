//! Data-parallel helpers.
//!
//! With the `parallel` feature the closures run on the rayon pool; without it
//! they run sequentially. Results are always collected in index order, so the
//! output never depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many elements, fine-grained loops stay sequential.
#[cfg(feature = "parallel")]
const MIN_FINE_LEN: usize = 1 << 11;

/// Maps `f` over `0..len` for cheap per-element work (amplitude loops).
pub(crate) fn map_fine<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if len >= MIN_FINE_LEN {
        return (0..len).into_par_iter().map(f).collect();
    }
    (0..len).map(f).collect()
}

/// Maps `f` over `0..len` where each call is a sizeable task
/// (an outcome, a trial, a grid point).
pub(crate) fn map_tasks<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}
