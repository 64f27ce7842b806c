//! Data-parallel helpers. With the `parallel` feature these fan out on the
//! rayon pool; without it they run the same closures sequentially. Results
//! are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `items.iter().map(f).collect()`, order preserved.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
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

/// `(0..len).map(f).collect()`, order preserved.
pub fn map_range<U, F>(len: u64, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(u64) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Smallest `x` in `0..len` with `pred(x)`.
pub fn find_first<F>(len: u64, pred: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().find_first(|&x| pred(x))
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).find(|&x| pred(x))
    }
}

/// Minimum of `key(x)` over `x` in `0..len` where `key` returns `Some`.
/// Keys must be totally ordered and distinct per `x` for a deterministic
/// answer; callers include `x` itself in the key.
pub fn min_by_key<K, F>(len: u64, key: F) -> Option<K>
where
    K: Ord + Send,
    F: Fn(u64) -> Option<K> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().filter_map(key).min()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).filter_map(key).min()
    }
}

/// Maximum of `key(i)` over indices of `items`, ties to the smallest index.
pub fn argmax<T, F>(items: &[T], key: F) -> Option<(usize, u64)>
where
    T: Sync,
    F: Fn(&T) -> u64 + Sync + Send,
{
    let pick = |a: (usize, u64), b: (usize, u64)| {
        if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
            b
        } else {
            a
        }
    };
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter()
            .enumerate()
            .map(|(i, t)| (i, key(t)))
            .reduce_with(pick)
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().enumerate().map(|(i, t)| (i, key(t))).reduce(pick)
    }
}
