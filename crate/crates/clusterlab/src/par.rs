//! Thin indirection over rayon so the crate builds with or without the
//! `parallel` feature.  Results are identical in both modes: maps preserve
//! index order and reductions use commutative, associative combiners.

#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Sums `f` over `0..len` by chunking the index range.
#[cfg(feature = "parallel")]
pub fn sum_indexed<F>(len: u64, f: F) -> u128
where
    F: Fn(u64) -> u128 + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).sum()
}

#[cfg(not(feature = "parallel"))]
pub fn sum_indexed<F>(len: u64, f: F) -> u128
where
    F: Fn(u64) -> u128,
{
    (0..len).map(f).sum()
}
