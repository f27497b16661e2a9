use std::collections::{BTreeMap, BTreeSet};

use iel_core::{BitString, IelError, Result, Rng};
use iel_entropy::{ratio, LogSum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::heuristic::{FracSum, QOracle};
use crate::relation::{QStatement, RelationQ};
use crate::sampler::Sampler;

/// Projected answers of an algorithm are compared against `L(i, g)`.
pub type SetFamily<'a> = dyn Fn(&QStatement) -> Option<BTreeSet<BitString>> + Sync + 'a;

/// Coin strings of the bad instances, split by `floor` of their sample-entropy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BucketSets {
    pub coin_len: usize,
    pub buckets: BTreeMap<usize, BTreeSet<u64>>,
}

impl BucketSets {
    pub fn get(&self, i: usize) -> Option<&BTreeSet<u64>> {
        self.buckets.get(&i)
    }

    pub fn contains(&self, i: usize, x: u64) -> bool {
        self.buckets.get(&i).is_some_and(|b| b.contains(&x))
    }

    pub fn total(&self) -> usize {
        self.buckets.values().map(BTreeSet::len).sum()
    }

    /// `E_I |C(I)|` for `I` uniform in `1..=m`.
    pub fn mean_size(&self) -> BigRational {
        let m = self.coin_len;
        let s: usize = (1..=m).map(|i| self.get(i).map_or(0, BTreeSet::len)).sum();
        ratio(s as u64, m as u64)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "coins": self.coin_len,
            "buckets": self.buckets.iter().map(|(i, b)| (i.to_string(), json!(b.len()))).collect::<serde_json::Map<_, _>>(),
        })
    }
}

/// `C(i)`: coin strings `x` with `D(x)` in `bad` and sample-entropy of `D(x)` in `[i, i+1)`.
pub fn build_bucket_sets(sampler: &Sampler, bad: &BTreeSet<BitString>) -> Result<BucketSets> {
    let counts = sampler.counts();
    let out = sampler.out_len();
    let mut buckets: BTreeMap<usize, BTreeSet<u64>> = BTreeMap::new();
    for x in 0..1u64 << sampler.coin_len() {
        let y = sampler.sample_u64(x);
        if bad.contains(&BitString::from_u64(y, out)) {
            buckets.entry(sampler.entropy_floor(counts[&y])).or_default().insert(x);
        }
    }
    Ok(BucketSets { coin_len: sampler.coin_len(), buckets })
}

/// Pairwise analogue of uniform preimage picking, checked exhaustively.
#[derive(Clone, Debug)]
pub struct PickingReport {
    pub coin_len: usize,
    /// Eligible `(i, w, x*)`: sample-entropy of `D(x*)` at least `i`.
    pub tuples: u64,
    pub min_probability: Option<BigRational>,
    /// `2^-m / 10`.
    pub bound: BigRational,
    pub worst: Option<(usize, u64, u64)>,
    pub holds: bool,
}

/// For every `i` in `1..=m`, `w` in `{0,1}^i` and `x*` with `H(D(x*)) >= i`:
/// `Pr_{g, x <- (g o D)^-1(w)}[x = x*] >= 2^-m / 10`, the preimage set taken over all coins.
pub fn two_universal_picking(q: &RelationQ) -> Result<PickingReport> {
    let m = q.m();
    let dom = 1usize << m;
    let sampler = q.sampler();
    let counts = sampler.counts();
    let out = sampler.out_len();
    let enc: Vec<u128> = (0..dom as u64)
        .map(|x| q.encode_instance(&BitString::from_u64(sampler.sample_u64(x), out)))
        .collect::<Result<_>>()?;
    // H(D(x)) >= i  iff  count(D(x)) * 2^i <= 2^m
    let reach: Vec<usize> = (0..dom as u64)
        .map(|x| {
            let c = counts[&sampler.sample_u64(x)];
            (0..=m).rev().find(|&i| (c as u128) << i <= 1u128 << m).unwrap_or(0)
        })
        .collect();
    let members = q.members()?;
    // acc[i][x][w]: sum over g with prefix w of 1/|set|
    let empty = || vec![vec![BTreeMap::<u64, FracSum>::new(); dom]; m + 1];
    let acc = members
        .par_iter()
        .fold(empty, |mut acc, g| {
            let vals: Vec<u128> = enc.iter().map(|&v| g.eval_encoded(v)).collect();
            for i in 1..=m {
                let mut sizes: BTreeMap<u128, u64> = BTreeMap::new();
                for &v in &vals {
                    *sizes.entry(v >> (m - i)).or_insert(0) += 1;
                }
                for x in 0..dom {
                    if reach[x] >= i {
                        let w = vals[x] >> (m - i);
                        acc[i][x].entry(w as u64).or_default().add(1, sizes[&w]);
                    }
                }
            }
            acc
        })
        .reduce(empty, |mut a, b| {
            for (ai, bi) in a.iter_mut().zip(b) {
                for (ax, bx) in ai.iter_mut().zip(bi) {
                    for (w, s) in bx {
                        ax.entry(w).or_default().merge(s);
                    }
                }
            }
            a
        });
    let total = BigRational::from_integer(BigInt::from(members.len()));
    let mut min: Option<BigRational> = None;
    let mut worst = None;
    let mut tuples = 0u64;
    for i in 1..=m {
        for x in 0..dom {
            if reach[x] < i {
                continue;
            }
            for w in 0..1u64 << i {
                tuples += 1;
                let p = acc[i][x].get(&w).map(FracSum::value).unwrap_or_default() / &total;
                if min.as_ref().is_none_or(|v| p < *v) {
                    min = Some(p);
                    worst = Some((i, w, x as u64));
                }
            }
        }
    }
    let bound = ratio(1u32, 10u128 << m);
    Ok(PickingReport { coin_len: m, tuples, holds: min.as_ref().is_none_or(|p| *p >= bound), min_probability: min, bound, worst })
}

/// What an algorithm's projected answers look like against a set family.
#[derive(Clone, Debug)]
pub struct AccessMeasurement {
    pub oracle: String,
    pub trials: u64,
    /// Answers outside `L(Y)`; invalid answers are ⊥ and never counted here.
    pub outside: u64,
    pub bottom: u64,
    pub rho_hat: f64,
    /// 95% Wilson interval for `rho`.
    pub wilson: (f64, f64),
    /// `E log2 |L(Y)|` over all statements, with `log 0 = -1`.
    pub k_avg: Option<LogSum>,
    /// `E log2 |S(Y)|`.
    pub real: Option<LogSum>,
    pub seed: u64,
}

impl AccessMeasurement {
    pub fn to_json(&self) -> Value {
        let text = |v: &Option<LogSum>| v.as_ref().map(|s| Value::String(s.to_string())).unwrap_or(Value::Null);
        json!({
            "finder": self.oracle,
            "trials": self.trials,
            "outside": self.outside,
            "bottom": self.bottom,
            "rho_hat": self.rho_hat,
            "wilson": [self.wilson.0, self.wilson.1],
            "k_avg": text(&self.k_avg),
            "real": text(&self.real),
            "mode": "mc",
            "seed": self.seed,
        })
    }
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.975);
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) + z * z / (4.0 * n)) / n).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// `E log2 |L(I, G)|` over every statement with `I` in `1..=m`, `log 0 = -1`.
pub fn average_log_size(q: &RelationQ, family: &SetFamily) -> Result<LogSum> {
    let m = q.m();
    let members = q.members()?;
    let hist = members
        .par_iter()
        .try_fold(BTreeMap::new, |mut acc: BTreeMap<u64, u64>, g| -> Result<_> {
            for i in 1..=m {
                let st = QStatement { i, g: g.clone() };
                let l = family(&st).ok_or_else(|| IelError::Contract(format!("no set for statement i = {i}")))?;
                *acc.entry(l.len() as u64).or_insert(0) += 1;
            }
            Ok(acc)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            Ok(a)
        })?;
    let total = (m * members.len()) as u64;
    Ok(hist.into_iter().map(|(c, w)| LogSum::log2_or_minus_one(c).scale(&ratio(w, total))).sum())
}

/// Monte Carlo estimate of `Pr[Gamma(Y, A(Y)) not in L(Y) and not ⊥]` for uniform
/// statements `Y`, with `Gamma(y, (x, w)) = x` for members of `Q` and ⊥ otherwise.
/// `exact_sizes` also computes `E log |L|` and `E log |S|` over all statements.
pub fn measure_avg_access(
    q: &RelationQ,
    oracle: &dyn QOracle,
    family: &SetFamily,
    trials: u64,
    seed: u64,
    exact_sizes: bool,
) -> Result<AccessMeasurement> {
    let (outside, bottom) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, u64)> {
            let mut rng = Rng::new(seed, t);
            let st = q.random_statement(&mut rng);
            let l = family(&st).ok_or_else(|| IelError::Contract(format!("no set for statement i = {}", st.i)))?;
            Ok(match oracle.solve(&st, &mut rng) {
                Some((x, w)) if q.holds(&st, &x, &w) => ((!l.contains(&x)) as u64, 0),
                _ => (0, 1),
            })
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let (k_avg, real) = if exact_sizes {
        let solutions = |st: &QStatement| {
            Some(q.solutions(st).into_iter().map(|x| BitString::from_u64(x, q.m())).collect::<BTreeSet<_>>())
        };
        (Some(average_log_size(q, family)?), Some(average_log_size(q, &solutions)?))
    } else {
        (None, None)
    };
    Ok(AccessMeasurement {
        oracle: oracle.label(),
        trials,
        outside,
        bottom,
        rho_hat: outside as f64 / trials.max(1) as f64,
        wilson: wilson_interval(outside, trials),
        k_avg,
        real,
        seed,
    })
}

/// `L(i, g) = S(i, g) \ C(i)`.
pub fn light_bucket_family<'a>(q: &'a RelationQ, buckets: &'a BucketSets) -> impl Fn(&QStatement) -> Option<BTreeSet<BitString>> + Sync + 'a {
    move |st: &QStatement| {
        Some(
            q.solutions(st)
                .into_iter()
                .filter(|&x| !buckets.contains(st.i, x))
                .map(|x| BitString::from_u64(x, q.m()))
                .collect(),
        )
    }
}

/// The two counting claims behind the bucket sets, computed exactly.
#[derive(Clone, Debug)]
pub struct BucketClaims {
    pub tau: BigRational,
    /// `Pr_{I,G,R}[A_1(I, G) in C(I)]`.
    pub oracle_in_buckets: BigRational,
    /// `2 m tau`.
    pub oracle_bound: BigRational,
    /// `Pr_{I,G, X <- S~(I,G)}[X in C(I)]`.
    pub uniform_in_buckets: BigRational,
    /// `E_I |C(I)| 2^-m / 10`.
    pub uniform_bound: BigRational,
}

impl BucketClaims {
    pub fn holds(&self) -> bool {
        self.oracle_in_buckets <= self.oracle_bound && self.uniform_in_buckets >= self.uniform_bound
    }
}

/// Both claims for buckets built from the instances the oracle hits with
/// probability below `tau` per loop.
pub fn bucket_claims(q: &RelationQ, oracle: &dyn QOracle, buckets: &BucketSets, tau: &BigRational) -> Result<BucketClaims> {
    let m = q.m();
    let members = q.members()?;
    let empty = || (vec![FracSum::default(); m + 1], vec![FracSum::default(); m + 1]);
    let (by_oracle, by_uniform) = members
        .par_iter()
        .try_fold(empty, |(mut a, mut u), g| -> Result<_> {
            for i in 1..=m {
                let st = QStatement { i, g: g.clone() };
                let law = oracle
                    .law(&st)
                    .ok_or_else(|| IelError::Capacity(format!("oracle {} has no exact law", oracle.label())))?;
                let inside: u64 = law
                    .outcomes
                    .iter()
                    .filter(|(x, _, _)| x.len() == m && buckets.contains(i, x.to_u64().unwrap()))
                    .map(|(_, _, w)| w)
                    .sum();
                a[i].add(inside, law.total);
                let sols = q.solutions(&st);
                let hit = sols.iter().filter(|&&x| buckets.contains(i, x)).count() as u64;
                u[i].add(hit, sols.len().max(1) as u64);
            }
            Ok((a, u))
        })
        .try_reduce(empty, |(mut a, mut u), (b, v)| {
            for i in 0..=m {
                a[i].merge(b[i].clone());
                u[i].merge(v[i].clone());
            }
            Ok((a, u))
        })?;
    let denom = BigRational::from_integer(BigInt::from(m * members.len()));
    let sum = |v: &[FracSum]| v.iter().map(FracSum::value).sum::<BigRational>() / &denom;
    Ok(BucketClaims {
        tau: tau.clone(),
        oracle_in_buckets: sum(&by_oracle),
        oracle_bound: ratio(2 * m as u64, 1) * tau,
        uniform_in_buckets: sum(&by_uniform),
        uniform_bound: buckets.mean_size() * ratio(1u32, 10u128 << m),
    })
}
