//! Data-parallel helpers with a sequential fallback.
//!
//! Every reduction is split into fixed-size chunks whose partial results are
//! combined left to right, so the output does not depend on the number of
//! worker threads (or on whether the `parallel` feature is enabled at all).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Samples per reduction chunk.
pub const CHUNK: usize = 256;

/// Maps `f` over `0..count` and collects the results in index order.
pub fn map_indices<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Folds `0..count` in chunks of [`CHUNK`] indices.
///
/// `fold` is applied to each index of a chunk in increasing order starting
/// from `init()`; the per-chunk accumulators are returned in chunk order.
pub fn fold_chunks<A, I, F>(count: usize, init: I, fold: F) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, usize) + Sync + Send,
{
    let chunks = count.div_ceil(CHUNK);
    map_indices(chunks, |c| {
        let mut acc = init();
        let end = ((c + 1) * CHUNK).min(count);
        for i in c * CHUNK..end {
            fold(&mut acc, i);
        }
        acc
    })
}

/// Chunks folded concurrently before their accumulators are merged; bounds
/// memory when accumulators are large.
const BLOCK_CHUNKS: usize = 64;

/// Like [`fold_chunks`] but merges the chunk accumulators left to right.
///
/// Chunks are processed in blocks of [`BLOCK_CHUNKS`], which bounds the
/// number of live accumulators without changing the merge order.
pub fn reduce_chunks<A, I, F, M>(count: usize, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, usize) + Sync + Send,
    M: Fn(&mut A, A),
{
    let chunks = count.div_ceil(CHUNK);
    let mut acc: Option<A> = None;
    let mut start = 0;
    while start < chunks {
        let end = (start + BLOCK_CHUNKS).min(chunks);
        let parts = map_indices(end - start, |c| {
            let c = start + c;
            let mut part = init();
            for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
                fold(&mut part, i);
            }
            part
        });
        for part in parts {
            match acc.as_mut() {
                Some(a) => merge(a, part),
                None => acc = Some(part),
            }
        }
        start = end;
    }
    acc.unwrap_or_else(init)
}

/// Runs `f` inside a pool of `threads` workers (ignored without `parallel`).
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    #[cfg(feature = "parallel")]
    {
        match threads {
            Some(t) if t > 0 => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
            _ => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

/// Whether the rayon backend is compiled in.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_sequential() {
        let total = reduce_chunks(10_000, || 0u64, |a, i| *a += i as u64, |a, b| *a += b);
        assert_eq!(total, (0..10_000u64).sum());
    }

    #[test]
    fn empty_range_yields_init() {
        let total = reduce_chunks(0, || 7u32, |a, _| *a += 1, |a, b| *a += b);
        assert_eq!(total, 7);
        assert!(map_indices(0, |i| i).is_empty());
    }

    #[test]
    fn float_reduction_is_thread_count_independent() {
        let run = |threads| {
            with_threads(Some(threads), || {
                reduce_chunks(
                    50_000,
                    || 0.0f64,
                    |a, i| *a += (i as f64).sqrt().sin(),
                    |a, b| *a += b,
                )
            })
        };
        assert_eq!(run(1).to_bits(), run(3).to_bits());
    }
}
