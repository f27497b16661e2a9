use std::collections::{BTreeMap, HashMap};

use iel_core::{BitString, DomainFunction, FiniteFunction, IelError, Result, MAX_TABLE_BITS};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::distribution::EntropyReport;
use crate::logsum::{ratio, LogSum};

/// Largest domain swept by the exact oracles.
pub const MAX_EXACT_DOMAIN: u64 = 1 << MAX_TABLE_BITS;

/// Preimage-class profile of a function under the uniform input distribution:
/// class size `N = |F^-1(F(x))|` mapped to the number of inputs `x` with that size.
///
/// Every real-entropy quantity of `F^-1` is a function of this profile, and
/// the profile of a direct product is the convolution of the factors.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ClassHistogram {
    by_size: BTreeMap<u128, u128>,
}

impl ClassHistogram {
    pub fn from_map(by_size: BTreeMap<u128, u128>) -> Result<Self> {
        for (&n, &c) in &by_size {
            if n == 0 || c == 0 || c % n != 0 {
                return Err(IelError::Domain(format!("{c} inputs cannot form classes of size {n}")));
            }
        }
        if by_size.is_empty() {
            return Err(IelError::Domain("empty domain".into()));
        }
        Ok(ClassHistogram { by_size })
    }

    pub fn from_function(f: &FiniteFunction) -> Result<Self> {
        if f.input_len() > MAX_TABLE_BITS {
            return Err(IelError::Capacity(format!("input length {} exceeds {MAX_TABLE_BITS}", f.input_len())));
        }
        let mut sizes: BTreeMap<u128, u128> = BTreeMap::new();
        if f.output_len() <= MAX_TABLE_BITS {
            for c in f.preimage_counts()? {
                if c > 0 {
                    *sizes.entry(c as u128).or_insert(0) += c as u128;
                }
            }
        } else {
            let mut counts: HashMap<u64, u64> = HashMap::new();
            for x in 0..1u64 << f.input_len() {
                *counts.entry(f.eval_u64(x)).or_insert(0) += 1;
            }
            for c in counts.into_values() {
                *sizes.entry(c as u128).or_insert(0) += c as u128;
            }
        }
        Self::from_map(sizes)
    }

    pub fn from_domain(f: &dyn DomainFunction) -> Result<Self> {
        let size = f.domain_size();
        if size > MAX_EXACT_DOMAIN {
            return Err(IelError::Capacity(format!("domain of size {size} exceeds {MAX_EXACT_DOMAIN}")));
        }
        let mut counts: HashMap<BitString, u64> = HashMap::new();
        for idx in 0..size {
            *counts.entry(f.image_at(idx)).or_insert(0) += 1;
        }
        Self::from_class_sizes(counts.into_values())
    }

    /// From the sizes of all classes (one entry per output value).
    pub fn from_class_sizes(sizes: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut by_size: BTreeMap<u128, u128> = BTreeMap::new();
        for c in sizes {
            if c > 0 {
                *by_size.entry(c as u128).or_insert(0) += c as u128;
            }
        }
        Self::from_map(by_size)
    }

    pub fn sizes(&self) -> &BTreeMap<u128, u128> {
        &self.by_size
    }

    pub fn domain_size(&self) -> u128 {
        self.by_size.values().sum()
    }

    pub fn image_size(&self) -> u128 {
        self.by_size.iter().map(|(&n, &c)| c / n).sum()
    }

    pub fn min_class(&self) -> u128 {
        *self.by_size.keys().next().unwrap()
    }

    pub fn max_class(&self) -> u128 {
        *self.by_size.keys().next_back().unwrap()
    }

    fn mass(&self, count: u128) -> BigRational {
        ratio(BigUint::from(count), BigUint::from(self.domain_size()))
    }

    /// `E[log2 |F^-1(F(X))|]`.
    pub fn shannon(&self) -> LogSum {
        self.by_size.iter().map(|(&n, &c)| LogSum::log2(n).scale(&self.mass(c))).sum()
    }

    pub fn min_entropy(&self) -> LogSum {
        LogSum::log2(self.min_class())
    }

    pub fn max_entropy(&self) -> LogSum {
        LogSum::log2(self.max_class())
    }

    pub fn report(&self) -> EntropyReport {
        EntropyReport::from_samples(self.by_size.iter().map(|(&n, &c)| (LogSum::log2(n), self.mass(c))), None)
    }

    /// Profile of the direct product `(F, G)` on independent inputs.
    pub fn product(&self, other: &ClassHistogram) -> ClassHistogram {
        let mut by_size = BTreeMap::new();
        for (&a, &ca) in &self.by_size {
            for (&b, &cb) in &other.by_size {
                *by_size.entry(a * b).or_insert(0) += ca * cb;
            }
        }
        ClassHistogram { by_size }
    }

    /// Profile of the `t`-fold direct product.
    pub fn power(&self, t: usize) -> Result<ClassHistogram> {
        if t == 0 {
            return Err(IelError::Domain("direct product of zero copies".into()));
        }
        let bits = (self.domain_size() as f64).log2() * t as f64;
        if bits > 120.0 {
            return Err(IelError::Capacity(format!("product domain of 2^{bits:.0} elements")));
        }
        let mut acc = self.clone();
        for _ in 1..t {
            acc = acc.product(self);
        }
        Ok(acc)
    }

    /// Largest `k` with `Pr[log2 N >= k] >= 1 - eps`, attained at a class size.
    pub fn smoothed_min(&self, eps: &BigRational) -> LogSum {
        let mut below = BigRational::zero();
        let mut best = self.min_class();
        for (&n, &c) in &self.by_size {
            if &below <= eps {
                best = n;
            } else {
                break;
            }
            below += self.mass(c);
        }
        LogSum::log2(best)
    }

    /// Smallest `k` with `Pr[log2 N <= k] >= 1 - eps`.
    pub fn smoothed_max(&self, eps: &BigRational) -> LogSum {
        let target = BigRational::from_integer(1.into()) - eps;
        let mut acc = BigRational::zero();
        for (&n, &c) in &self.by_size {
            acc += self.mass(c);
            if acc >= target {
                return LogSum::log2(n);
            }
        }
        self.max_entropy()
    }

    /// `Pr[N > bound]` for an integer class-size bound.
    pub fn mass_above(&self, bound: u128) -> BigRational {
        self.by_size.range(bound + 1..).map(|(_, &c)| self.mass(c)).sum()
    }

    /// `Pr[N < bound]`.
    pub fn mass_below(&self, bound: u128) -> BigRational {
        self.by_size.range(..bound).map(|(_, &c)| self.mass(c)).sum()
    }
}

/// Real entropy report of `F^-1` for uniform input.
pub fn real_entropy_of_inverse(f: &FiniteFunction) -> Result<EntropyReport> {
    Ok(ClassHistogram::from_function(f)?.report())
}

/// Same for a function on an explicitly enumerated domain.
pub fn real_entropy_of_domain(f: &dyn DomainFunction) -> Result<EntropyReport> {
    Ok(ClassHistogram::from_domain(f)?.report())
}

/// Whether `H(X | F(X)) >= n - m` holds, with the slack `H - (n - m)`.
pub fn shrink_lower_bound_check(f: &FiniteFunction) -> Result<(bool, LogSum)> {
    let h = ClassHistogram::from_function(f)?.shannon();
    let bound = LogSum::integer(f.input_len() as i64 - f.output_len() as i64);
    let slack = &h - &bound;
    Ok((slack.signum() >= 0, slack))
}
