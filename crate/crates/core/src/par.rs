//! Data-parallel loop helpers.
//!
//! With the `parallel` feature (default) the loops fan out over the rayon
//! pool; without it they run on the calling thread. Reductions split the index
//! range into fixed-size blocks whose partial sums are combined left to right,
//! so results are bitwise identical for any thread count. Turning
//! deterministic reductions off lets rayon combine partials in whatever order
//! work-stealing produces.

use std::ops::{Add, Range};
use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Block length used by reductions and elementwise loops.
pub const BLOCK: usize = 1 << 12;

static DETERMINISTIC: AtomicBool = AtomicBool::new(true);

pub fn set_deterministic_reductions(on: bool) {
    DETERMINISTIC.store(on, Ordering::Relaxed);
}

pub fn deterministic_reductions() -> bool {
    DETERMINISTIC.load(Ordering::Relaxed)
}

/// True when the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

fn blocks(len: usize) -> impl Iterator<Item = Range<usize>> + Clone {
    (0..len.div_ceil(BLOCK)).map(move |b| b * BLOCK..((b + 1) * BLOCK).min(len))
}

/// Sums `block_sum(range)` over fixed blocks covering `0..len`.
pub fn sum_blocks<R, F>(len: usize, block_sum: F) -> R
where
    R: Send + Default + Add<Output = R>,
    F: Fn(Range<usize>) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        let n_blocks = len.div_ceil(BLOCK);
        if n_blocks > 1 {
            let it = (0..n_blocks)
                .into_par_iter()
                .map(|b| block_sum(b * BLOCK..((b + 1) * BLOCK).min(len)));
            if deterministic_reductions() {
                let partials: Vec<R> = it.collect();
                return partials.into_iter().fold(R::default(), |a, b| a + b);
            }
            return it.reduce(R::default, |a, b| a + b);
        }
    }
    blocks(len).fold(R::default(), |acc, r| acc + block_sum(r))
}

/// Evaluates `f` on consecutive blocks of `0..len`, returning results in order.
pub fn map_blocks<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<usize>) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        let n_blocks = len.div_ceil(BLOCK);
        if n_blocks > 1 {
            return (0..n_blocks)
                .into_par_iter()
                .map(|b| f(b * BLOCK..((b + 1) * BLOCK).min(len)))
                .collect();
        }
    }
    blocks(len).map(f).collect()
}

/// Fills `out[i] = f(i)`.
pub fn fill_indexed<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if out.len() > BLOCK {
            out.par_iter_mut()
                .with_min_len(BLOCK)
                .enumerate()
                .for_each(|(i, o)| *o = f(i));
            return;
        }
    }
    out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
}

/// Calls `f(chunk_index, chunk)` on consecutive chunks of length `chunk_len`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if data.len() > BLOCK {
            let min = (BLOCK / chunk_len).max(1);
            data.par_chunks_mut(chunk_len)
                .with_min_len(min)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
    }
    data.chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

/// Maps `f` over `items`, preserving order. Used for per-state work.
pub fn map_vec<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
