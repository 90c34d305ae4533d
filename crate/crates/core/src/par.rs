//! Scheduling seam between the rayon-backed and the sequential build.
//!
//! Everything that fans out — path exploration chunks, brute-force oracle
//! sweeps, per-mutant pipelines — funnels through these two helpers, so the
//! `parallel` feature changes *where* work runs but never *what* is computed:
//! both builds return results in input order and callers merge them with the
//! same deterministic folds.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving input order in the output.
#[cfg(feature = "parallel")]
pub(crate) fn map_ordered<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_ordered<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    F: Fn(T) -> R,
{
    items.into_iter().map(f).collect()
}

/// Returns the result of `f` for the first item (in input order) for which it
/// returns `Some`, exactly like a sequential `find_map`.
#[cfg(feature = "parallel")]
pub(crate) fn find_map_first<T, R, F>(items: Vec<T>, f: F) -> Option<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Option<R> + Sync + Send,
{
    items.into_par_iter().find_map_first(f)
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn find_map_first<T, R, F>(items: Vec<T>, f: F) -> Option<R>
where
    F: Fn(T) -> Option<R>,
{
    items.into_iter().find_map(f)
}
