//! Parallel reductions over node ranges.
//!
//! Two modes exist. `Deterministic` splits the index range into fixed-size
//! chunks, sums each chunk sequentially and combines the chunk sums with a
//! pairwise tree, so the result does not depend on the thread count.
//! `Free` lets rayon combine partial sums in whatever order it likes.

use rayon::prelude::*;
use std::sync::atomic::{AtomicBool, Ordering};

const CHUNK: usize = 1024;

static DETERMINISTIC: AtomicBool = AtomicBool::new(true);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    Deterministic,
    Free,
}

/// Sets the process-wide reduction mode used by all energy evaluations.
pub fn set_mode(mode: Reduction) {
    DETERMINISTIC.store(mode == Reduction::Deterministic, Ordering::Relaxed);
}

pub fn mode() -> Reduction {
    if DETERMINISTIC.load(Ordering::Relaxed) {
        Reduction::Deterministic
    } else {
        Reduction::Free
    }
}

/// Pairwise (tree) summation; deterministic for a given input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n if n <= 8 => values.iter().sum(),
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Sums `term(i)` over `items` with the current reduction mode.
pub fn sum_over<T, F>(items: &[T], term: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    match mode() {
        Reduction::Deterministic => {
            let partial: Vec<f64> = items
                .par_chunks(CHUNK)
                .map(|chunk| pairwise_sum(&chunk.iter().map(&term).collect::<Vec<_>>()))
                .collect();
            pairwise_sum(&partial)
        }
        Reduction::Free => items.par_iter().map(&term).sum(),
    }
}

/// Sums `term(i)` for `i in 0..n`.
pub fn sum_range<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    match mode() {
        Reduction::Deterministic => {
            let chunks = n.div_ceil(CHUNK);
            let partial: Vec<f64> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let lo = c * CHUNK;
                    let hi = (lo + CHUNK).min(n);
                    pairwise_sum(&(lo..hi).map(&term).collect::<Vec<_>>())
                })
                .collect();
            pairwise_sum(&partial)
        }
        Reduction::Free => (0..n).into_par_iter().map(&term).sum(),
    }
}
