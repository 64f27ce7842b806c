//! Bit-vector subsets of a universe `{0, .., n-1}` with `n <= 64`.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest universe a [`Subset`] can address.
pub const MAX_UNIVERSE: usize = 64;

/// A subset of `{0, .., 63}` stored as a bitmask; bit `i` is element `i`.
///
/// The derived ordering compares bitmasks numerically, which is the
/// "lexicographic" order used for every tie-break in this crate.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    /// The whole universe `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_UNIVERSE);
        if n >= 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        Subset(1u64 << i)
    }

    pub fn from_elems<I: IntoIterator<Item = usize>>(elems: I) -> Self {
        elems.into_iter().fold(Subset::EMPTY, |s, i| s.with(i))
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn with(self, i: usize) -> Self {
        Subset(self.0 | 1u64 << i)
    }

    #[inline]
    pub fn without(self, i: usize) -> Self {
        Subset(self.0 & !(1u64 << i))
    }

    #[inline]
    pub fn union(self, other: Subset) -> Self {
        Subset(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Subset) -> Self {
        Subset(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: Subset) -> Self {
        Subset(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// Sum of the weights of the members.
    pub fn weight(self, weights: &[u64]) -> u64 {
        self.iter().map(|i| weights[i]).sum()
    }

    /// Members in increasing order.
    pub fn iter(self) -> Elements {
        Elements(self.0)
    }

    /// Maps each member `i` to `map[i]`, used to lift class-local subsets
    /// back into the global universe.
    pub fn remap(self, map: &[usize]) -> Subset {
        self.iter().fold(Subset::EMPTY, |acc, i| acc.with(map[i]))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::LowerHex for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

pub struct Elements(u64);

impl Iterator for Elements {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Elements {}

/// All `k`-subsets of `{0, .., n-1}` in increasing bitmask order (Gosper's hack).
pub fn k_subsets(n: usize, k: usize) -> KSubsets {
    assert!(n <= MAX_UNIVERSE);
    if k > n {
        return KSubsets { next: None, limit: 0 };
    }
    let first = if k == 0 { 0 } else { u64::MAX >> (64 - k) };
    KSubsets { next: Some(first), limit: if n == 64 { u64::MAX } else { (1u64 << n) - 1 } }
}

pub struct KSubsets {
    next: Option<u64>,
    limit: u64,
}

impl Iterator for KSubsets {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let (r, overflow) = cur.overflowing_add(c);
            if overflow {
                None
            } else {
                let nxt = (((r ^ cur) >> 2) / c) | r;
                (nxt & !self.limit == 0).then_some(nxt)
            }
        };
        Some(Subset(cur))
    }
}

/// All submasks of `mask`, from `mask` itself down to the empty set.
pub fn submasks(mask: Subset) -> impl Iterator<Item = Subset> {
    let m = mask.0;
    let mut cur = Some(m);
    std::iter::from_fn(move || {
        let s = cur?;
        cur = if s == 0 { None } else { Some((s - 1) & m) };
        Some(Subset(s))
    })
}

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}
