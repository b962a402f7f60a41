//! Sequential or rayon-backed iteration over independent chunks.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Calls `f(index, chunk)` for every `len`-sized chunk of `data`.
pub(crate) fn for_each_chunk<F>(data: &mut [f64], len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(len).enumerate().for_each(|(k, c)| f(k, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(len).enumerate().for_each(|(k, c)| f(k, c));
}

/// `max_k f(k)` over `0..n` (NaN propagates as +∞).
pub(crate) fn max_over<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let g = |k: usize| {
        let v = f(k);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(g).reduce(|| f64::NEG_INFINITY, f64::max);
    #[cfg(not(feature = "parallel"))]
    (0..n).map(g).fold(f64::NEG_INFINITY, f64::max)
}
