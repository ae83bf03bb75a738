//! Order-preserving batch map with a bounded worker pool.
//!
//! With the `parallel` feature (default) work runs on a rayon pool; without it,
//! or with a bound of 1, items are processed one after another.

/// Applies `f` to every item, one at a time, in order.
pub fn map_sequential<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Applies `f` to every item on up to `threads` workers. Output order equals
/// input order.
#[cfg(feature = "parallel")]
pub fn map_parallel<T, R>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R>
where
    T: Sync,
    R: Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        // No threads available: degrade rather than fail the batch.
        Err(_) => map_sequential(items, f),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_parallel<T, R>(items: &[T], _threads: usize, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R>
where
    T: Sync,
    R: Send,
{
    map_sequential(items, f)
}

/// Parallel when `threads > 1`, sequential otherwise.
pub fn map<T, R>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R>
where
    T: Sync,
    R: Send,
{
    if threads > 1 {
        map_parallel(items, threads, f)
    } else {
        map_sequential(items, f)
    }
}
