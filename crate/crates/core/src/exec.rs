//! Pluggable data-parallel execution.
//!
//! Work is always split into the same index-ordered chunks and the results
//! come back in index order, so an executor only changes *where* chunks
//! run, never what they compute.

use alloc::vec::Vec;

/// Evaluates `f(0), f(1), ..., f(len - 1)` and returns the results in order.
pub trait Executor: Sync {
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).map(f).collect()
    }
}

/// Walks per chunk. Fixed so that reductions do not depend on the executor.
pub const CHUNK: u64 = 512;

/// Number of chunks covering `n` items.
pub(crate) fn chunk_count(n: u64) -> usize {
    n.div_ceil(CHUNK) as usize
}

/// Item range of chunk `c` out of `n` items.
pub(crate) fn chunk_range(c: usize, n: u64) -> core::ops::Range<u64> {
    let start = c as u64 * CHUNK;
    start..(start + CHUNK).min(n)
}
