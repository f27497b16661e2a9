use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use iel_core::{BitString, IelError, Result, Rng};
use iel_entropy::{ratio, LogSum};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::target::Target;

/// Exact output distribution of a finder on one input.
pub type Law = Vec<(BitString, BigRational)>;

/// Largest coin budget enumerated by [`CoinStrategy::law`].
pub const MAX_COIN_BITS: usize = 20;

/// A randomized rule for picking a sibling, with its exact law.
pub trait Strategy: Send + Sync {
    fn label(&self) -> String;
    fn sample(&self, target: &dyn Target, z: &BitString, rng: &mut Rng) -> Result<BitString>;
    fn law(&self, target: &dyn Target, z: &BitString) -> Result<Law>;
    /// Coin bits per call, when fixed.
    fn coin_len(&self) -> Option<usize> {
        None
    }
}

/// Draw from a law: exact when the common denominator fits in 128 bits.
pub fn sample_law(law: &Law, rng: &mut Rng) -> BitString {
    let den = law.iter().fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
    if let Some(d) = den.to_u128() {
        let mut u = rng.below_u128(d);
        for (x, p) in law {
            let w = (p.numer() * (&den / p.denom())).to_u128().expect("below the denominator");
            if u < w {
                return x.clone();
            }
            u -= w;
        }
    } else {
        let mut u = rng.unit();
        for (x, p) in law {
            u -= p.to_f64().unwrap_or(0.0);
            if u < 0.0 {
                return x.clone();
            }
        }
    }
    law.last().expect("non-empty law").0.clone()
}

/// Merge repeated outcomes and drop zero mass, keeping outcomes sorted.
pub fn normalize_law(law: Law) -> Law {
    let mut acc: BTreeMap<BitString, BigRational> = BTreeMap::new();
    for (x, p) in law {
        *acc.entry(x).or_insert_with(BigRational::zero) += p;
    }
    acc.into_iter().filter(|(_, p)| !p.is_zero()).collect()
}

/// Shannon entropy of a law, exactly.
pub fn law_entropy(law: &Law) -> LogSum {
    let mut by_prob: BTreeMap<BigRational, u64> = BTreeMap::new();
    for (_, p) in law {
        *by_prob.entry(p.clone()).or_insert(0) += 1;
    }
    by_prob
        .into_iter()
        .map(|(p, k)| (-&LogSum::log2_ratio(&p)).scale(&(&p * BigRational::from_integer(k.into()))))
        .sum()
}

/// Statistical distance between a law and the uniform law on `support`.
pub fn distance_from_uniform(law: &Law, support: &[BitString]) -> BigRational {
    let u = ratio(1, support.len() as i64);
    let mut l1 = BigRational::zero();
    let mut seen = 0usize;
    for (x, p) in law {
        if support.binary_search(x).is_ok() {
            seen += 1;
            l1 += (p - &u).abs();
        } else {
            l1 += p;
        }
    }
    l1 += &u * BigRational::from_integer((support.len() - seen).into());
    l1 / BigRational::from_integer(2.into())
}

/// Uniform sibling: the optimal finder.
#[derive(Clone, Copy, Debug, Default)]
pub struct Optimal;

impl Strategy for Optimal {
    fn label(&self) -> String {
        "optimal".into()
    }

    fn sample(&self, target: &dyn Target, z: &BitString, rng: &mut Rng) -> Result<BitString> {
        let s = target.siblings(z)?;
        Ok(s[rng.below(s.len() as u64) as usize].clone())
    }

    fn law(&self, target: &dyn Target, z: &BitString) -> Result<Law> {
        let s = target.siblings(z)?;
        let p = ratio(1, s.len() as i64);
        Ok(s.into_iter().map(|x| (x, p.clone())).collect())
    }
}

/// Always returns its input.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl Strategy for Identity {
    fn label(&self) -> String {
        "identity".into()
    }

    fn sample(&self, _: &dyn Target, z: &BitString, _: &mut Rng) -> Result<BitString> {
        Ok(z.clone())
    }

    fn law(&self, _: &dyn Target, z: &BitString) -> Result<Law> {
        Ok(vec![(z.clone(), BigRational::one())])
    }

    fn coin_len(&self) -> Option<usize> {
        Some(0)
    }
}

/// Deterministic smallest sibling.
#[derive(Clone, Copy, Debug, Default)]
pub struct Canonical;

impl Strategy for Canonical {
    fn label(&self) -> String {
        "canonical".into()
    }

    fn sample(&self, target: &dyn Target, z: &BitString, _: &mut Rng) -> Result<BitString> {
        Ok(target.siblings(z)?.swap_remove(0))
    }

    fn law(&self, target: &dyn Target, z: &BitString) -> Result<Law> {
        Ok(vec![(target.siblings(z)?.swap_remove(0), BigRational::one())])
    }

    fn coin_len(&self) -> Option<usize> {
        Some(0)
    }
}

/// Returns its input with probability `eps`, otherwise a uniform sibling.
#[derive(Clone, Debug)]
pub struct Lazy {
    eps: BigRational,
    num: u128,
    den: u128,
}

impl Lazy {
    pub fn new(eps: BigRational) -> Result<Self> {
        if eps.is_negative() || eps > BigRational::one() {
            return Err(IelError::Domain(format!("laziness {eps} outside [0, 1]")));
        }
        let num = eps.numer().to_u128().ok_or_else(|| IelError::Domain("laziness numerator too large".into()))?;
        let den = eps.denom().to_u128().ok_or_else(|| IelError::Domain("laziness denominator too large".into()))?;
        Ok(Lazy { eps, num, den })
    }

    pub fn eps(&self) -> &BigRational {
        &self.eps
    }
}

impl Strategy for Lazy {
    fn label(&self) -> String {
        format!("lazy({})", iel_entropy::rational_string(&self.eps))
    }

    fn sample(&self, target: &dyn Target, z: &BitString, rng: &mut Rng) -> Result<BitString> {
        if rng.below_u128(self.den) < self.num {
            Ok(z.clone())
        } else {
            Optimal.sample(target, z, rng)
        }
    }

    fn law(&self, target: &dyn Target, z: &BitString) -> Result<Law> {
        let s = target.siblings(z)?;
        let share = (BigRational::one() - &self.eps) / BigRational::from_integer(s.len().into());
        Ok(s.into_iter()
            .map(|x| {
                let p = if &x == z { &share + &self.eps } else { share.clone() };
                (x, p)
            })
            .collect())
    }
}

/// Draws up to `tries` uniform domain elements and returns the first that
/// collides with the input, or the input itself.
#[derive(Clone, Copy, Debug)]
pub struct Sampling {
    pub tries: u32,
}

impl Strategy for Sampling {
    fn label(&self) -> String {
        format!("sampling({})", self.tries)
    }

    fn sample(&self, target: &dyn Target, z: &BitString, rng: &mut Rng) -> Result<BitString> {
        let y = target.image(z)?;
        for _ in 0..self.tries {
            let w = target.sample_input(rng);
            if target.image(&w)? == y {
                return Ok(w);
            }
        }
        Ok(z.clone())
    }

    /// Each sibling gets `(1 - (1 - q)^T) / S` and the input also keeps
    /// `(1 - q)^T`, where `q = S / |domain|`.
    fn law(&self, target: &dyn Target, z: &BitString) -> Result<Law> {
        let s = target.siblings(z)?;
        let size = BigInt::from(s.len());
        let q = BigRational::new(size.clone(), BigInt::from(target.domain_size()));
        let miss = num_traits::pow(BigRational::one() - q, self.tries as usize);
        let share = (BigRational::one() - &miss) / BigRational::from_integer(size);
        Ok(s.into_iter()
            .map(|x| {
                let p = if &x == z { &share + &miss } else { share.clone() };
                (x, p)
            })
            .collect())
    }
}

type CoinFn = dyn Fn(&dyn Target, &BitString, &BitString) -> Result<BitString> + Send + Sync;

/// A strategy given as a deterministic function of `(input, coins)`.
#[derive(Clone)]
pub struct CoinStrategy {
    label: String,
    coin_len: usize,
    f: Arc<CoinFn>,
}

impl CoinStrategy {
    pub fn new<F>(label: impl Into<String>, coin_len: usize, f: F) -> Self
    where
        F: Fn(&dyn Target, &BitString, &BitString) -> Result<BitString> + Send + Sync + 'static,
    {
        CoinStrategy { label: label.into(), coin_len, f: Arc::new(f) }
    }
}

impl Strategy for CoinStrategy {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn sample(&self, target: &dyn Target, z: &BitString, rng: &mut Rng) -> Result<BitString> {
        (self.f)(target, z, &rng.bits(self.coin_len))
    }

    /// Enumerates all `2^coin_len` coin strings.
    fn law(&self, target: &dyn Target, z: &BitString) -> Result<Law> {
        if self.coin_len > MAX_COIN_BITS {
            return Err(IelError::Capacity(format!("{} coin bits exceed {MAX_COIN_BITS}", self.coin_len)));
        }
        let total = 1u64 << self.coin_len;
        let mut counts: BTreeMap<BitString, u64> = BTreeMap::new();
        for r in 0..total {
            *counts.entry((self.f)(target, z, &BitString::from_u64(r, self.coin_len))?).or_insert(0) += 1;
        }
        Ok(counts.into_iter().map(|(x, k)| (x, ratio(k, total))).collect())
    }

    fn coin_len(&self) -> Option<usize> {
        Some(self.coin_len)
    }
}

/// A strategy bound to a target, with the collision contract enforced: any
/// output outside `F^-1(F(z))` is replaced by `z` and counted.
pub struct CollisionFinder {
    target: Arc<dyn Target>,
    strategy: Arc<dyn Strategy>,
    calls: AtomicU64,
    violations: AtomicU64,
}

impl CollisionFinder {
    pub fn new(target: Arc<dyn Target>, strategy: Arc<dyn Strategy>) -> Self {
        CollisionFinder { target, strategy, calls: AtomicU64::new(0), violations: AtomicU64::new(0) }
    }

    pub fn optimal(target: Arc<dyn Target>) -> Self {
        Self::new(target, Arc::new(Optimal))
    }

    pub fn target(&self) -> &dyn Target {
        self.target.as_ref()
    }

    pub fn target_arc(&self) -> Arc<dyn Target> {
        self.target.clone()
    }

    pub fn label(&self) -> String {
        self.strategy.label()
    }

    pub fn coin_len(&self) -> Option<usize> {
        self.strategy.coin_len()
    }

    /// Oracle queries so far (samples and law evaluations).
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn violations(&self) -> u64 {
        self.violations.load(Ordering::Relaxed)
    }

    pub fn call(&self, z: &BitString, rng: &mut Rng) -> Result<BitString> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let out = self.strategy.sample(self.target.as_ref(), z, rng)?;
        if out == *z || self.target.image(&out).ok() == Some(self.target.image(z)?) {
            Ok(out)
        } else {
            self.violations.fetch_add(1, Ordering::Relaxed);
            Ok(z.clone())
        }
    }

    /// Exact output law on `z`, after substitution.
    pub fn law(&self, z: &BitString) -> Result<Law> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let y = self.target.image(z)?;
        let raw = self.strategy.law(self.target.as_ref(), z)?;
        let mut fixed = Vec::with_capacity(raw.len());
        for (x, p) in raw {
            if x == *z || self.target.image(&x).ok().as_ref() == Some(&y) {
                fixed.push((x, p));
            } else {
                self.violations.fetch_add(1, Ordering::Relaxed);
                fixed.push((z.clone(), p));
            }
        }
        let law = normalize_law(fixed);
        let total: BigRational = law.iter().map(|(_, p)| p.clone()).sum();
        if !total.is_one() {
            return Err(IelError::Contract(format!("{} law sums to {total}", self.label())));
        }
        Ok(law)
    }
}

/// `lcm` of the denominators in a law, for exact integer sampling.
pub fn law_denominator(law: &Law) -> BigUint {
    law.iter()
        .fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()))
        .to_biguint()
        .expect("positive denominators")
}
