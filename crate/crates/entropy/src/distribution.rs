use std::collections::HashMap;

use iel_core::{BitString, IelError, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::logsum::{ratio, LogSum};

/// Normalization tolerance for distributions built from floating-point weights.
pub const TOLERANCE_LOG2: i32 = -40;

/// Finite distribution over bit strings with exact rational probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    support: Vec<(BitString, BigRational)>,
    index: HashMap<BitString, usize>,
}

impl Distribution {
    /// Exact distribution proportional to positive counts.
    pub fn from_counts(counts: Vec<(BitString, u64)>) -> Result<Self> {
        let total: u128 = counts.iter().map(|&(_, c)| c as u128).sum();
        if total == 0 {
            return Err(IelError::Domain("empty support".into()));
        }
        let probs = counts
            .into_iter()
            .filter(|&(_, c)| c > 0)
            .map(|(x, c)| (x, ratio(c, total)))
            .collect();
        Self::from_rationals(probs)
    }

    /// Probabilities must be positive and sum to exactly one.
    pub fn from_rationals(probs: Vec<(BitString, BigRational)>) -> Result<Self> {
        let mut sum = BigRational::zero();
        let mut index = HashMap::new();
        let mut support = Vec::with_capacity(probs.len());
        for (x, p) in probs {
            if p.is_negative() {
                return Err(IelError::Domain(format!("negative probability at {x}")));
            }
            if p.is_zero() {
                continue;
            }
            sum += &p;
            if index.insert(x.clone(), support.len()).is_some() {
                return Err(IelError::Domain(format!("repeated support value {x}")));
            }
            support.push((x, p));
        }
        if support.is_empty() {
            return Err(IelError::Domain("empty support".into()));
        }
        if !sum.is_one() {
            return Err(IelError::Domain(format!("probabilities sum to {sum}")));
        }
        Ok(Distribution { support, index })
    }

    /// Floating weights accepted when `|sum - 1| <= 2^-40`; the stored values
    /// are the exact binary fractions of the inputs, renormalized.
    pub fn from_f64(probs: Vec<(BitString, f64)>) -> Result<Self> {
        let sum: f64 = probs.iter().map(|p| p.1).sum();
        if (sum - 1.0).abs() > 2f64.powi(TOLERANCE_LOG2) {
            return Err(IelError::Domain(format!("probabilities sum to {sum}")));
        }
        let exact: Vec<(BitString, BigRational)> = probs
            .into_iter()
            .map(|(x, p)| {
                BigRational::from_float(p)
                    .ok_or_else(|| IelError::Domain(format!("non-finite probability {p}")))
                    .map(|r| (x, r))
            })
            .collect::<Result<_>>()?;
        let total: BigRational = exact.iter().map(|p| p.1.clone()).sum();
        Self::from_rationals(exact.into_iter().map(|(x, p)| (x, p / &total)).collect())
    }

    pub fn uniform(values: Vec<BitString>) -> Result<Self> {
        Self::from_counts(values.into_iter().map(|v| (v, 1)).collect())
    }

    pub fn support(&self) -> &[(BitString, BigRational)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn prob(&self, x: &BitString) -> BigRational {
        self.index.get(x).map(|&k| self.support[k].1.clone()).unwrap_or_else(BigRational::zero)
    }

    /// `log2(1 / Pr[X = x])`.
    pub fn sample_entropy(&self, x: &BitString) -> Result<LogSum> {
        match self.index.get(x) {
            Some(&k) => Ok(-&LogSum::log2_ratio(&self.support[k].1)),
            None => Err(IelError::Domain(format!("{x} is outside the support"))),
        }
    }

    pub fn report(&self) -> EntropyReport {
        EntropyReport::from_samples(
            self.support.iter().map(|(x, p)| (self.sample_entropy(x).unwrap(), p.clone())),
            Some(LogSum::log2(self.support.len() as u64)),
        )
    }

    /// Distribution of `proj(X)`.
    pub fn map(&self, proj: &dyn Fn(&BitString) -> BitString) -> Distribution {
        let mut acc: HashMap<BitString, BigRational> = HashMap::new();
        let mut order = Vec::new();
        for (x, p) in &self.support {
            let y = proj(x);
            if !acc.contains_key(&y) {
                order.push(y.clone());
            }
            *acc.entry(y).or_insert_with(BigRational::zero) += p;
        }
        let support = order.into_iter().map(|y| {
            let p = acc.remove(&y).unwrap();
            (y, p)
        });
        Self::from_rationals(support.collect()).expect("image of a distribution")
    }

    /// Report of `X` given `Y = proj(X)`; sample entropies are `log2(Pr[Y=y] / Pr[X=x])`
    /// and min/max are their extremes.
    pub fn conditional_report(&self, proj: &dyn Fn(&BitString) -> BitString) -> EntropyReport {
        let y = self.map(proj);
        EntropyReport::from_samples(self.support.iter().map(|(x, p)| {
            let py = y.prob(&proj(x));
            (LogSum::log2_ratio(&(py / p)), p.clone())
        }), None)
    }

    /// Half the L1 distance over the joint support.
    pub fn statistical_distance(&self, other: &Distribution) -> BigRational {
        let mut l1 = BigRational::zero();
        for (x, p) in &self.support {
            l1 += (p - other.prob(x)).abs();
        }
        for (x, q) in &other.support {
            if !self.index.contains_key(x) {
                l1 += q;
            }
        }
        l1 / BigRational::from_integer(2.into())
    }

    /// A distribution with min-entropy at least `k` obtained by capping every
    /// probability at `2^-k` and spreading the removed mass over fresh points.
    /// Returns it together with its statistical distance from `self`.
    pub fn smooth_to_min_entropy(&self, k: u32) -> (Distribution, BigRational) {
        let cap = ratio(1, BigInt::one() << k);
        let mut out = Vec::new();
        let mut excess = BigRational::zero();
        for (x, p) in &self.support {
            if p > &cap {
                excess += p - &cap;
                out.push((x.clone(), cap.clone()));
            } else {
                out.push((x.clone(), p.clone()));
            }
        }
        let fresh_len = self.support.iter().map(|(x, _)| x.len()).max().unwrap_or(0) + 33;
        let mut counter = 0u64;
        let moved = excess.clone();
        while excess.is_positive() {
            let chunk = if excess > cap { cap.clone() } else { excess.clone() };
            excess -= &chunk;
            let label = BitString::ones(fresh_len - 32).concat(&BitString::from_u64(counter, 32));
            counter += 1;
            out.push((label, chunk));
        }
        (Distribution::from_rationals(out).expect("mass preserved"), moved)
    }

    /// Mass of points whose sample entropy is at least `k`.
    pub fn mass_with_sample_entropy_at_least(&self, k: &LogSum) -> BigRational {
        self.support
            .iter()
            .filter(|(x, _)| k.le(&self.sample_entropy(x).unwrap()))
            .map(|(_, p)| p.clone())
            .sum()
    }
}

/// Shannon, min- and max-entropy with the sample-entropy histogram.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyReport {
    pub shannon: LogSum,
    pub min_entropy: LogSum,
    pub max_entropy: LogSum,
    /// Distinct sample-entropy values, ascending, with their probability mass.
    pub histogram: Vec<(LogSum, BigRational)>,
}

impl EntropyReport {
    /// Report from (sample entropy, mass) pairs. `max_entropy` defaults to the
    /// largest sample entropy, the conditional (real) max-entropy convention.
    pub fn from_samples(samples: impl Iterator<Item = (LogSum, BigRational)>, max_entropy: Option<LogSum>) -> Self {
        let mut groups: HashMap<LogSum, BigRational> = HashMap::new();
        for (h, p) in samples {
            *groups.entry(h).or_insert_with(BigRational::zero) += p;
        }
        let mut histogram: Vec<(LogSum, BigRational)> = groups.into_iter().collect();
        histogram.sort_by(|a, b| a.0.cmp_value(&b.0));
        let shannon = histogram.iter().map(|(h, p)| h.scale(p)).sum();
        let min_entropy = histogram.first().map(|h| h.0.clone()).unwrap_or_default();
        let max_entropy = max_entropy.unwrap_or_else(|| histogram.last().map(|h| h.0.clone()).unwrap_or_default());
        EntropyReport { shannon, min_entropy, max_entropy, histogram }
    }

    pub fn is_flat(&self) -> bool {
        self.histogram.len() == 1
    }

    /// `H_min <= H <= H_0`, with equalities exactly when the histogram is a point mass.
    pub fn chain_holds(&self) -> bool {
        let ordered = self.min_entropy.le(&self.shannon) && self.shannon.le(&self.max_entropy);
        let eq_low = self.min_entropy == self.shannon;
        let eq_high = self.shannon == self.max_entropy;
        ordered && eq_low == self.is_flat() && eq_high == self.is_flat()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "shannon": self.shannon.to_string(),
            "shannon_bits": self.shannon.to_f64(),
            "min": self.min_entropy.to_string(),
            "max": self.max_entropy.to_string(),
            "histogram": self
                .histogram
                .iter()
                .map(|(h, p)| json!([h.to_string(), rational_string(p)]))
                .collect::<Vec<_>>(),
        })
    }
}

pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use iel_core::bits;

    fn dyadic() -> Distribution {
        Distribution::from_rationals(vec![
            (bits("00"), ratio(1, 2)),
            (bits("01"), ratio(1, 4)),
            (bits("10"), ratio(1, 4)),
        ])
        .unwrap()
    }

    #[test]
    fn sample_entropies() {
        let u = Distribution::uniform((0..4).map(|v| BitString::from_u64(v, 2)).collect()).unwrap();
        assert_eq!(u.sample_entropy(&bits("11")).unwrap(), LogSum::integer(2));
        let point = Distribution::uniform(vec![bits("1")]).unwrap();
        assert_eq!(point.sample_entropy(&bits("1")).unwrap(), LogSum::zero());
        assert_eq!(dyadic().sample_entropy(&bits("01")).unwrap(), LogSum::integer(2));
        assert!(dyadic().sample_entropy(&bits("11")).is_err());
    }

    #[test]
    fn reports() {
        let u = Distribution::uniform((0..8).map(|v| BitString::from_u64(v, 3)).collect()).unwrap();
        let r = u.report();
        assert_eq!((r.shannon.clone(), r.min_entropy.clone(), r.max_entropy.clone()), (LogSum::integer(3), LogSum::integer(3), LogSum::integer(3)));
        let r = dyadic().report();
        assert_eq!(r.shannon, LogSum::rational(ratio(3, 2)));
        assert_eq!(r.min_entropy, LogSum::integer(1));
        assert_eq!(r.max_entropy, LogSum::log2(3u32));
        assert!(r.chain_holds());
        assert!(r.min_entropy.lt(&r.shannon) && r.shannon.lt(&r.max_entropy));
    }

    #[test]
    fn unnormalized_rejected() {
        assert!(Distribution::from_rationals(vec![(bits("0"), ratio(1, 3))]).is_err());
        assert!(Distribution::from_f64(vec![(bits("0"), 0.5), (bits("1"), 0.5 + 1e-15)]).is_ok());
        assert!(Distribution::from_f64(vec![(bits("0"), 0.5), (bits("1"), 0.51)]).is_err());
    }
}
