use std::collections::BTreeSet;

use iel_core::{BitString, FiniteFunction, IelError, Result};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

/// The test `count <= 2^(n-i) / n^c` decided on integers:
/// `count^q * n^p <= 2^(q(n-i))` for `c = p/q`.
#[derive(Clone, Debug)]
pub struct LightThreshold {
    n: usize,
    i: usize,
    p: u32,
    q: u32,
    bound: BigUint,
    n_pow: BigUint,
}

impl LightThreshold {
    pub fn new(n: usize, i: usize, c: &BigRational) -> Result<Self> {
        if c.is_negative() {
            return Err(IelError::Domain(format!("negative exponent {c}")));
        }
        if i > n {
            return Err(IelError::Range(format!("index {i} above {n}")));
        }
        let p = c.numer().to_u32().ok_or_else(|| IelError::Domain(format!("exponent {c} too large")))?;
        let q = c.denom().to_u32().ok_or_else(|| IelError::Domain(format!("exponent {c} too large")))?;
        let bound = BigUint::from(1u8) << (q as usize * (n - i));
        let n_pow = num_traits::pow(BigUint::from(n), p as usize);
        Ok(LightThreshold { n, i, p, q, bound, n_pow })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn index(&self) -> usize {
        self.i
    }

    /// Exponent as `(p, q)`.
    pub fn exponent(&self) -> (u32, u32) {
        (self.p, self.q)
    }

    /// Whether an image with `count` preimages is `i`-light.
    pub fn admits(&self, count: u64) -> bool {
        num_traits::pow(BigUint::from(count), self.q as usize) * &self.n_pow <= self.bound
    }

    /// Largest admitted count, or `None` when even zero preimages fail
    /// (never happens: zero is always admitted).
    pub fn max_count(&self) -> u64 {
        // admits is monotone in count; binary search on [0, 2^n]
        let (mut lo, mut hi) = (0u64, 1u64 << self.n.min(62));
        if self.admits(hi) {
            return hi;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.admits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// `{y} ∪ {y' : |f^-1(y')| <= 2^(n-i) / n^c}` over all of `{0,1}^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LightSet {
    pub anchor: BitString,
    pub index: usize,
    pub members: BTreeSet<BitString>,
}

impl LightSet {
    pub fn contains(&self, y: &BitString) -> bool {
        self.members.contains(y)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn light_set(f: &FiniteFunction, y: &BitString, i: usize, c: &BigRational) -> Result<LightSet> {
    if y.len() != f.output_len() {
        return Err(IelError::Domain(format!("anchor of length {} for {}-bit outputs", y.len(), f.output_len())));
    }
    if i == 0 {
        return Err(IelError::Range("index 0".into()));
    }
    let th = LightThreshold::new(f.input_len(), i, c)?;
    let counts = f.preimage_counts()?;
    let mut members: BTreeSet<BitString> = counts
        .iter()
        .enumerate()
        .filter(|(_, &k)| th.admits(k))
        .map(|(v, _)| BitString::from_u64(v as u64, f.output_len()))
        .collect();
    members.insert(y.clone());
    Ok(LightSet { anchor: y.clone(), index: i, members })
}
