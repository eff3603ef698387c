//! Deterministic fan-out over BFS sources.
//!
//! Sources are cut into blocks whose size depends only on the number of
//! sources. Each block sums into its own buffer and the buffers are added into
//! the total in block order, so the floating-point result is identical for
//! every worker count, including one.

use alloc::vec;
use alloc::vec::Vec;

/// Worker-count knob. `0` means one worker per available core.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Workers(pub usize);

impl Workers {
    pub const SINGLE: Workers = Workers(1);

    pub fn resolve(self) -> usize {
        if self.0 > 0 {
            return self.0;
        }
        #[cfg(feature = "std")]
        {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
        #[cfg(not(feature = "std"))]
        {
            1
        }
    }
}

fn block_size(sources: usize) -> usize {
    sources.div_ceil(256).max(32)
}

/// Runs `work(block, acc)` for every block of `sources` and returns the
/// element-wise sum of the per-block accumulators (each of length `len`).
/// `S` is per-worker scratch created by `scratch`.
pub(crate) fn sum_over_sources<S, F, G>(
    sources: &[u32],
    len: usize,
    workers: Workers,
    scratch: G,
    work: F,
) -> Vec<f64>
where
    S: Send,
    G: Fn() -> S + Sync,
    F: Fn(&mut S, &[u32], &mut [f64]) + Sync,
{
    let mut total = vec![0.0; len];
    let blocks: Vec<&[u32]> = sources.chunks(block_size(sources.len())).collect();
    let threads = workers.resolve();

    let fold = |total: &mut [f64], partial: &[f64]| {
        for (t, p) in total.iter_mut().zip(partial) {
            *t += *p;
        }
    };

    #[cfg(feature = "std")]
    if threads > 1 && blocks.len() > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        for wave in blocks.chunks(threads * 2) {
            let partials: Vec<Vec<f64>> = pool.install(|| {
                wave.par_iter()
                    .map_init(&scratch, |s, block| {
                        let mut acc = vec![0.0; len];
                        work(s, block, &mut acc);
                        acc
                    })
                    .collect()
            });
            for p in &partials {
                fold(&mut total, p);
            }
        }
        return total;
    }
    let _ = threads;

    let mut s = scratch();
    let mut acc = vec![0.0; len];
    for block in blocks {
        acc.iter_mut().for_each(|x| *x = 0.0);
        work(&mut s, block, &mut acc);
        fold(&mut total, &acc);
    }
    total
}

/// Order-preserving parallel map over `items`.
pub(crate) fn map_items<T, S, F, G>(items: &[u32], workers: Workers, scratch: G, f: F) -> Vec<T>
where
    T: Send,
    S: Send,
    G: Fn() -> S + Sync,
    F: Fn(&mut S, u32) -> T + Sync,
{
    let threads = workers.resolve();
    #[cfg(feature = "std")]
    if threads > 1 && items.len() > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        return pool.install(|| {
            items
                .par_iter()
                .map_init(&scratch, |s, &i| f(s, i))
                .collect()
        });
    }
    let _ = threads;
    let mut s = scratch();
    items.iter().map(|&i| f(&mut s, i)).collect()
}
