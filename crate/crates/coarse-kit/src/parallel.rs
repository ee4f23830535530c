//! Data-parallel reduction helpers.
//!
//! The heavy loops in this crate are maxima over index pairs (Lipschitz
//! constants, certificate checks) and triples (triangle inequality). These
//! helpers run them on rayon when the `parallel` feature is enabled and fall
//! back to plain loops otherwise. All reductions are commutative maxima over
//! non-NaN values, so the parallel and sequential paths return identical
//! results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Max of `f` over unordered index pairs `i < j < n`.
/// Returns `f64::NEG_INFINITY` when `n < 2`.
pub fn pairwise_max<F>(n: usize, f: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        pairwise_max_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        pairwise_max_seq(n, f)
    }
}

/// Sequential reference for [`pairwise_max`]. Always available so benchmarks
/// can compare the two paths.
pub fn pairwise_max_seq<F>(n: usize, f: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            best = best.max(f(i, j));
        }
    }
    best
}

#[cfg(feature = "parallel")]
pub fn pairwise_max_par<F>(n: usize, f: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = f64::NEG_INFINITY;
            for j in i + 1..n {
                best = best.max(f(i, j));
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Max of `f` over unordered pairs of elements of `idx`.
pub fn pairwise_max_on<F>(idx: &[usize], f: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    pairwise_max(idx.len(), |a, b| f(idx[a], idx[b]))
}

/// Max of `f` over ordered index triples `(i, j, k)` with `i`, `j`, `k` all
/// ranging over `0..n`. Used for triangle-inequality scans.
pub fn triple_max<F>(n: usize, f: F) -> f64
where
    F: Fn(usize, usize, usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut best = f64::NEG_INFINITY;
                for j in 0..n {
                    for k in 0..n {
                        best = best.max(f(i, j, k));
                    }
                }
                best
            })
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        triple_max_seq(n, f)
    }
}

/// Sequential reference for [`triple_max`].
pub fn triple_max_seq<F>(n: usize, f: F) -> f64
where
    F: Fn(usize, usize, usize) -> f64 + Sync,
{
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                best = best.max(f(i, j, k));
            }
        }
    }
    best
}
