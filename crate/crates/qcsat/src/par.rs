//! Thin dispatch layer between the rayon-backed and sequential code paths.
//!
//! Every helper preserves input order, so callers see identical results with
//! and without the `parallel` feature (and for any thread count). Reductions
//! that pick a "best" element must use a total order for the same reason.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Minimum number of items before a loop is worth bridging to rayon.
pub const PAR_THRESHOLD: usize = 64;

/// Order-preserving map over an index range.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_THRESHOLD {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Runs the two closures, in parallel when the feature is on.
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::join(a, b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (a(), b())
    }
}

/// Fold over an index range keeping the minimum under a total order produced
/// by `key`. Ties cannot occur when keys are distinct; callers embed the
/// index in the key when they need a deterministic tie-break.
pub fn min_by_key<K, F>(n: usize, key: F) -> Option<(usize, K)>
where
    K: PartialOrd + Send,
    F: Fn(usize) -> K + Sync + Send,
{
    let pick = |acc: Option<(usize, K)>, item: (usize, K)| -> Option<(usize, K)> {
        match acc {
            None => Some(item),
            Some(best) => {
                if item.1 < best.1 || (item.1 == best.1 && item.0 < best.0) {
                    Some(item)
                } else {
                    Some(best)
                }
            }
        }
    };
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_THRESHOLD {
            return (0..n)
                .into_par_iter()
                .map(|i| Some((i, key(i))))
                .reduce(
                    || None,
                    |a, b| match (a, b) {
                        (None, x) | (x, None) => x,
                        (Some(a), Some(b)) => pick(Some(a), b),
                    },
                );
        }
    }
    (0..n).map(|i| (i, key(i))).fold(None, pick)
}
