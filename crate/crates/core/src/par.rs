//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) batch loops run on the rayon pool;
//! without it, or after `set_execution(Execution::Sequential)`, they run on
//! the calling thread. Output order is always the index order, so results
//! never depend on how work was scheduled.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

const SEQUENTIAL: u8 = 0;
const PARALLEL: u8 = 1;

static MODE: AtomicU8 = AtomicU8::new(if cfg!(feature = "parallel") {
    PARALLEL
} else {
    SEQUENTIAL
});

/// Select how batch loops run. `Parallel` is ignored when the crate was built
/// without the `parallel` feature.
pub fn set_execution(mode: Execution) {
    let v = match mode {
        Execution::Parallel if cfg!(feature = "parallel") => PARALLEL,
        _ => SEQUENTIAL,
    };
    MODE.store(v, Ordering::Relaxed);
}

pub fn execution() -> Execution {
    if MODE.load(Ordering::Relaxed) == PARALLEL {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

/// Configure the global worker pool size. Only the first call has any effect.
pub fn configure_workers(workers: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
}

/// `(0..n).map(f).collect()`, possibly across workers.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution() == Execution::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Fallible `map_range`; the error reported is the one with the lowest index.
pub fn try_map_range<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_range(n, f).into_iter().collect()
}

/// Split `0..n` into fixed-size chunks, map each chunk, and return the partial
/// results in chunk order. Chunk boundaries do not depend on the worker count.
pub fn map_chunks<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    map_range(n_chunks, |c| {
        let start = c * chunk;
        f(start..(start + chunk).min(n))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_in_order() {
        let parts = map_chunks(10, 3, |r| r.collect::<Vec<_>>());
        let flat: Vec<usize> = parts.into_iter().flatten().collect();
        assert_eq!(flat, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Vec<usize>, usize> =
            try_map_range(8, |i| if i % 3 == 2 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(2));
    }
}
