//! Execution-mode switch for the data-parallel inner loops.
//!
//! Every parallelizable loop in this crate is written against [`Exec`], so
//! the same code path can be benchmarked with and without rayon. With the
//! `parallel` feature disabled, [`Exec::Parallel`] silently degrades to
//! sequential execution; outputs are identical in all cases because no
//! loop's result depends on scheduling order.

/// How to run a data-parallel loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    /// Plain sequential iteration.
    Sequential,
    /// rayon work-stealing iteration (requires the `parallel` feature).
    #[default]
    Parallel,
}

#[cfg(feature = "parallel")]
impl Exec {
    fn parallel(self) -> bool {
        matches!(self, Exec::Parallel)
    }
}

/// Applies `f` to equal-size chunks of `data` (the last may be ragged)
/// zipped with aligned chunks of `states`, collecting one result per chunk
/// in chunk order. `f` also receives the chunk index.
pub(crate) fn chunked_zip_map<T, S, R, F>(
    exec: Exec,
    data: &mut [T],
    chunk_len: usize,
    states: &mut [S],
    states_per_chunk: usize,
    f: F,
) -> Vec<R>
where
    T: Send,
    S: Send,
    R: Send,
    F: Fn(usize, &mut [T], &mut [S]) -> R + Sync + Send,
{
    debug_assert!(chunk_len > 0 && states_per_chunk > 0);
    #[cfg(feature = "parallel")]
    if exec.parallel() {
        use rayon::prelude::*;
        return data
            .par_chunks_mut(chunk_len)
            .zip(states.par_chunks_mut(states_per_chunk))
            .enumerate()
            .map(|(i, (d, s))| f(i, d, s))
            .collect();
    }
    let _ = exec;
    data.chunks_mut(chunk_len)
        .zip(states.chunks_mut(states_per_chunk))
        .enumerate()
        .map(|(i, (d, s))| f(i, d, s))
        .collect()
}

/// Maps `f` over `0..n`, collecting results in index order.
pub(crate) fn map_range<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}
