use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Trial-division bound; larger cofactors are kept as opaque log bases.
const TRIAL_LIMIT: u64 = 1 << 20;

/// Exact value `r + sum_b c_b * log2(b)` with rational `r`, `c_b` and bases `b`
/// that are odd primes (or cofactors without prime factors below 2^20).
///
/// Logarithms of integers and of ratios of integers are closed under the
/// operations here, so entropies of counting distributions are represented
/// without rounding and compared for equality exactly.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LogSum {
    rational: BigRational,
    logs: BTreeMap<BigUint, BigRational>,
}

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn factor(mut n: BigUint) -> Vec<(BigUint, u64)> {
    let mut out = Vec::new();
    let two = BigUint::from(2u8);
    let mut twos = 0;
    while !n.is_zero() && n.is_even() {
        n /= &two;
        twos += 1;
    }
    if twos > 0 {
        out.push((two, twos));
    }
    let mut p = 3u64;
    while p < TRIAL_LIMIT && BigUint::from(p) * BigUint::from(p) <= n {
        let bp = BigUint::from(p);
        let mut e = 0;
        while (&n % &bp).is_zero() {
            n /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push((bp, e));
        }
        p += 2;
    }
    if n > BigUint::one() {
        out.push((n, 1));
    }
    out
}

impl LogSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(r: BigRational) -> Self {
        LogSum { rational: r, logs: BTreeMap::new() }
    }

    pub fn integer(v: i64) -> Self {
        Self::rational(BigRational::from_integer(v.into()))
    }

    /// `log2(n)` for `n >= 1`.
    pub fn log2(n: impl Into<BigUint>) -> Self {
        let n = n.into();
        assert!(!n.is_zero(), "log of zero");
        let mut out = LogSum::zero();
        for (p, e) in factor(n) {
            let c = BigRational::from_integer(BigInt::from(e));
            if p == BigUint::from(2u8) {
                out.rational += c;
            } else {
                out.logs.insert(p, c);
            }
        }
        out
    }

    /// `log2(r)` for a positive rational.
    pub fn log2_ratio(r: &BigRational) -> Self {
        assert!(r.is_positive(), "log of a non-positive rational");
        let num = r.numer().magnitude().clone();
        let den = r.denom().magnitude().clone();
        Self::log2(num) - Self::log2(den)
    }

    /// `log2(n)` with the convention `log(0) = -1`.
    pub fn log2_or_minus_one(n: u64) -> Self {
        if n == 0 {
            Self::integer(-1)
        } else {
            Self::log2(n)
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LogSum {
            rational: &self.rational * c,
            logs: self.logs.iter().map(|(b, v)| (b.clone(), v * c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.logs.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.logs.is_empty()
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn to_f64(&self) -> f64 {
        let mut v = self.rational.to_f64().unwrap_or(f64::NAN);
        for (b, c) in &self.logs {
            let lb = b.to_f64().map(f64::log2).unwrap_or_else(|| b.bits() as f64);
            v += c.to_f64().unwrap_or(f64::NAN) * lb;
        }
        v
    }

    /// Sign of the value: exact when zero, otherwise decided in floating point.
    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.is_rational() {
            if self.rational.is_positive() {
                1
            } else {
                -1
            }
        } else {
            let v = self.to_f64();
            if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                // cancelled below f64 resolution; fall back to a wider sum
                self.wide_signum()
            }
        }
    }

    fn wide_signum(&self) -> i32 {
        // Scale all terms by 2^60 before rounding each to f64.
        let scale = BigRational::from_integer(BigInt::one() << 60u32);
        let mut v = (&self.rational * &scale).to_f64().unwrap_or(0.0);
        for (b, c) in &self.logs {
            v += (c * &scale).to_f64().unwrap_or(0.0) * b.to_f64().map(f64::log2).unwrap_or(b.bits() as f64);
        }
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    }

    pub fn cmp_value(&self, other: &LogSum) -> std::cmp::Ordering {
        match (self - other).signum() {
            0 => std::cmp::Ordering::Equal,
            s if s > 0 => std::cmp::Ordering::Greater,
            _ => std::cmp::Ordering::Less,
        }
    }

    pub fn le(&self, other: &LogSum) -> bool {
        self.cmp_value(other) != std::cmp::Ordering::Greater
    }

    pub fn lt(&self, other: &LogSum) -> bool {
        self.cmp_value(other) == std::cmp::Ordering::Less
    }

    fn normalize(mut self) -> Self {
        self.logs.retain(|_, c| !c.is_zero());
        self
    }
}

fn rational_text(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for LogSum {
    /// `p/q` for rationals, otherwise `r + c*log2(b) + ...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return f.write_str(&rational_text(&self.rational));
        }
        let mut parts = Vec::new();
        if !self.rational.is_zero() {
            parts.push(rational_text(&self.rational));
        }
        for (b, c) in &self.logs {
            parts.push(format!("{}*log2({b})", rational_text(c)));
        }
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for LogSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogSum({self} ~ {:.6})", self.to_f64())
    }
}

impl Add<&LogSum> for &LogSum {
    type Output = LogSum;
    fn add(self, rhs: &LogSum) -> LogSum {
        let mut out = self.clone();
        out.rational += &rhs.rational;
        for (b, c) in &rhs.logs {
            *out.logs.entry(b.clone()).or_insert_with(BigRational::zero) += c;
        }
        out.normalize()
    }
}

impl Add for LogSum {
    type Output = LogSum;
    fn add(self, rhs: LogSum) -> LogSum {
        &self + &rhs
    }
}

impl Neg for &LogSum {
    type Output = LogSum;
    fn neg(self) -> LogSum {
        self.scale(&-BigRational::one())
    }
}

impl Sub<&LogSum> for &LogSum {
    type Output = LogSum;
    fn sub(self, rhs: &LogSum) -> LogSum {
        self + &(-rhs)
    }
}

impl Sub for LogSum {
    type Output = LogSum;
    fn sub(self, rhs: LogSum) -> LogSum {
        &self - &rhs
    }
}

impl std::iter::Sum for LogSum {
    fn sum<I: Iterator<Item = LogSum>>(iter: I) -> LogSum {
        iter.fold(LogSum::zero(), |a, b| &a + &b)
    }
}
