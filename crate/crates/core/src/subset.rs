//! Ground-set elements and subsets packed into a single `u64`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest supported ground set.
pub const MAX_N: usize = 63;

/// Index of an element of the ground set, `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub usize);

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A subset of a ground set of size `n ≤ 63`; only the low `n` bits may be set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    bits: u64,
    n: usize,
}

impl SubsetMask {
    pub fn new(bits: u64, n: usize) -> Result<Self> {
        if n > MAX_N {
            return Err(invalid(format!("ground set size {n} exceeds {MAX_N}")));
        }
        if bits & !low_bits(n) != 0 {
            return Err(Error::InvalidMask { bits, n });
        }
        Ok(Self { bits, n })
    }

    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_N, "ground set size {n} exceeds {MAX_N}");
        Self { bits: 0, n }
    }

    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_N, "ground set size {n} exceeds {MAX_N}");
        Self {
            bits: low_bits(n),
            n,
        }
    }

    pub fn from_elements(n: usize, elements: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bits = 0u64;
        for e in elements {
            if e >= n {
                return Err(invalid(format!("element {e} out of range for n={n}")));
            }
            bits |= 1 << e;
        }
        Self::new(bits, n)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, x: ElementId) -> bool {
        x.0 < self.n && self.bits >> x.0 & 1 == 1
    }

    /// Copy with `x` added. Panics if `x ≥ n`.
    pub fn with(&self, x: ElementId) -> Self {
        assert!(
            x.0 < self.n,
            "element {} out of range for n={}",
            x.0,
            self.n
        );
        Self {
            bits: self.bits | 1 << x.0,
            n: self.n,
        }
    }

    pub fn without(&self, x: ElementId) -> Self {
        Self {
            bits: self.bits & !(1u64 << x.0),
            n: self.n,
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self {
            bits: self.bits & other.bits,
            n: self.n,
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            bits: self.bits | other.bits,
            n: self.n,
        }
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: !self.bits & low_bits(self.n),
            n: self.n,
        }
    }

    /// Members in increasing index order.
    pub fn elements(&self) -> impl Iterator<Item = ElementId> + '_ {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(ElementId(i))
        })
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, e) in self.elements().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

fn low_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterator over all `k`-subsets of an `n`-set in increasing bit order
/// (Gosper's hack).
#[derive(Debug, Clone)]
pub struct SubsetsOfSize {
    next: Option<u64>,
    n: usize,
    limit: u64,
}

impl Iterator for SubsetsOfSize {
    type Item = SubsetMask;

    fn next(&mut self) -> Option<SubsetMask> {
        let current = self.next?;
        self.next = if current == 0 {
            None
        } else {
            let low = current & current.wrapping_neg();
            let ripple = current + low;
            let next = (((ripple ^ current) >> 2) / low) | ripple;
            (next < self.limit).then_some(next)
        };
        Some(SubsetMask {
            bits: current,
            n: self.n,
        })
    }
}

/// All `k`-subsets of `{0..n}`; exactly `C(n,k)` masks, strictly increasing.
pub fn subsets_of_size(n: usize, k: usize) -> Result<SubsetsOfSize> {
    if n > MAX_N {
        return Err(invalid(format!("ground set size {n} exceeds {MAX_N}")));
    }
    if k > n {
        return Err(invalid(format!("subset size {k} exceeds n={n}")));
    }
    Ok(SubsetsOfSize {
        next: Some(low_bits(k)),
        n,
        limit: 1u64 << n,
    })
}

/// `C(n, k)` as `u128`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}
