use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use iel_core::{BitString, FiniteFunction, IelError, Result, Rng};
use iel_entropy::{ratio, ClassHistogram, LogSum};
use iel_hashing::{HashFamilySpec, HashMember};
use iel_reductions::{normalize_law, CollisionFinder, Law, Strategy, Target};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::func::{direct_product, tabulate, Base};
use crate::params::ceil_sqrt;

/// A rational strictly above `e`.
fn e_upper() -> BigRational {
    BigRational::new(BigInt::from(271_828_182_845_904_523_537u128), BigInt::from(10u128.pow(20)))
}

/// `tail <= e^(-2s)`, decided with a rational upper bound on `e`, which can
/// only make the check stricter.
pub fn within_hoeffding(tail: &BigRational, s: u64) -> bool {
    tail * num_traits::pow(e_upper(), 2 * s as usize) <= BigRational::one()
}

/// `F^t` as an explicit table, for `t * n0 <= 24`.
pub fn product_function(f: &FiniteFunction, t: usize) -> Result<FiniteFunction> {
    tabulate(&direct_product(Arc::new(Base(f.clone())), t)?)
}

/// Exact entropy bookkeeping of a `t`-fold direct product.
#[derive(Clone, Debug)]
pub struct GapAmpReport {
    pub n0: usize,
    pub t: usize,
    pub s: u64,
    /// `ceil(sqrt(s t))`.
    pub sqrt_st: u64,
    /// Real Shannon entropy `k` of `F^-1`.
    pub k: LogSum,
    pub product_shannon: LogSum,
    pub shannon_additive: bool,
    pub product_min: LogSum,
    pub min_additive: bool,
    pub product_max: LogSum,
    pub max_additive: bool,
    /// `Pr[H_sam < t k - n0 sqrt(st)]` on the product.
    pub low_tail: BigRational,
    /// `Pr[H_sam > t k + n0 sqrt(st)]` on the product.
    pub high_tail: BigRational,
    /// The concentration parts assume `t > s`.
    pub concentration_applies: bool,
    pub low_tail_ok: bool,
    pub high_tail_ok: bool,
}

impl GapAmpReport {
    pub fn all_hold(&self) -> bool {
        self.shannon_additive
            && self.min_additive
            && self.max_additive
            && (!self.concentration_applies || (self.low_tail_ok && self.high_tail_ok))
    }
}

/// Exact real-entropy parts of gap amplification for `F^t`: Shannon, min- and
/// max-entropy additivity, and concentration of the sample entropy around
/// `t k` within `n0 sqrt(st)` except with probability `e^(-2s)`.
pub fn gapamp_extras(f: &FiniteFunction, t: usize, s: u64) -> Result<GapAmpReport> {
    let hist = ClassHistogram::from_function(f)?;
    let prod = hist.power(t)?;
    let tr = ratio(t as u64, 1);
    let k = hist.shannon();
    let product_shannon = prod.shannon();
    let shannon_additive = product_shannon == k.scale(&tr);
    let product_min = prod.min_entropy();
    let product_max = prod.max_entropy();
    let min_additive = product_min == hist.min_entropy().scale(&tr);
    let max_additive = product_max == hist.max_entropy().scale(&tr);
    let r = ceil_sqrt(&BigUint::from(s * t as u64)).to_u64().unwrap();
    let slack = LogSum::integer((f.input_len() as u64 * r) as i64);
    let tk = k.scale(&tr);
    let low = &tk - &slack;
    let high = &tk + &slack;
    let total = BigRational::from_integer(BigInt::from(prod.domain_size()));
    let mut low_tail = BigRational::zero();
    let mut high_tail = BigRational::zero();
    for (&size, &count) in prod.sizes() {
        let h = LogSum::log2(size);
        if h.lt(&low) {
            low_tail += BigRational::from_integer(BigInt::from(count)) / &total;
        }
        if high.lt(&h) {
            high_tail += BigRational::from_integer(BigInt::from(count)) / &total;
        }
    }
    Ok(GapAmpReport {
        n0: f.input_len(),
        t,
        s,
        sqrt_st: r,
        k,
        product_shannon,
        shannon_additive,
        product_min,
        min_additive,
        product_max,
        max_additive,
        low_tail_ok: within_hoeffding(&low_tail, s),
        high_tail_ok: within_hoeffding(&high_tail, s),
        low_tail,
        high_tail,
        concentration_applies: t as u64 > s,
    })
}

/// Tail of `log2 |L(x_1)| + ... + log2 |L(x_t)|` above `t k + n0 sqrt(st)`,
/// where `k = E log2 |L(X)|`.
#[derive(Clone, Debug)]
pub struct SetProductReport {
    pub k_avg: LogSum,
    pub threshold: LogSum,
    pub tail: BigRational,
    pub holds: bool,
}

/// `sizes[x] = |L(x)|` over the whole domain `{0,1}^n0`.
pub fn set_product_tail(sizes: &[u64], n0: usize, t: usize, s: u64) -> Result<SetProductReport> {
    if sizes.len() != 1 << n0 || sizes.contains(&0) {
        return Err(IelError::Domain("one nonempty set per input".into()));
    }
    let mut single: BTreeMap<u128, u128> = BTreeMap::new();
    for &c in sizes {
        *single.entry(c as u128).or_insert(0) += 1;
    }
    let total = ratio(1u32, 1u32) * BigRational::from_integer(BigInt::from(sizes.len()));
    let k_avg: LogSum = single
        .iter()
        .map(|(&c, &w)| LogSum::log2(c).scale(&(BigRational::from_integer(BigInt::from(w)) / &total)))
        .sum();
    let mut acc: BTreeMap<BigUint, BigUint> = BTreeMap::from([(BigUint::one(), BigUint::one())]);
    for _ in 0..t {
        let mut next = BTreeMap::new();
        for (p, w) in &acc {
            for (&c, &cw) in &single {
                *next.entry(p * c).or_insert_with(BigUint::zero) += w * cw;
            }
        }
        acc = next;
    }
    let r = ceil_sqrt(&BigUint::from(s * t as u64)).to_u64().unwrap();
    let threshold = k_avg.scale(&ratio(t as u64, 1)) + LogSum::integer((n0 as u64 * r) as i64);
    let denom = BigInt::from(sizes.len()).pow(t as u32);
    let mut tail = BigRational::zero();
    for (p, w) in acc {
        if threshold.le(&LogSum::log2(p)) {
            tail += BigRational::new(BigInt::from(w), denom.clone());
        }
    }
    Ok(SetProductReport { holds: within_hoeffding(&tail, s), k_avg, threshold, tail })
}

/// Number of `x'` in the product of classes of the given sizes that agree
/// with `x` in at least `j` coordinates.
pub fn agreement_count(class_sizes: &[u64], j: usize) -> BigUint {
    // coefficient a of prod (z + (c_i - 1)) counts agreement sets of size a
    let mut poly = vec![BigUint::one()];
    for &c in class_sizes {
        let mut next = vec![BigUint::zero(); poly.len() + 1];
        for (a, v) in poly.iter().enumerate() {
            next[a + 1] += v;
            next[a] += v * (c - 1);
        }
        poly = next;
    }
    poly.iter().skip(j).sum()
}

/// Bound on the collisions that agree on a `q/8` fraction of coordinates.
#[derive(Clone, Debug)]
pub struct AgreementReport {
    pub t: usize,
    /// `ceil(q t / 8)`.
    pub j: usize,
    /// Largest count over all tuples of class sizes.
    pub worst: BigUint,
    /// `C(t, j) * cmax^(t - j)`.
    pub bound: BigUint,
    /// `log2 bound <= (1 - q/8) t k + t` with `k = log2 cmax`.
    pub log_bound_holds: bool,
    pub holds: bool,
}

pub fn agreement_bound(f: &FiniteFunction, t: usize, q: &BigRational) -> Result<AgreementReport> {
    let hist = ClassHistogram::from_function(f)?;
    let sizes: Vec<u64> = hist.sizes().keys().map(|&c| c as u64).collect();
    let cmax = *sizes.last().unwrap();
    let j = (q * ratio(t as u64, 8)).ceil().to_integer().to_usize().unwrap_or(t).min(t);
    let mut worst = BigUint::zero();
    let mut holds = true;
    // every multiset of class sizes of length t
    let mut idx = vec![0usize; t];
    loop {
        let tuple: Vec<u64> = idx.iter().map(|&i| sizes[i]).collect();
        let count = agreement_count(&tuple, j);
        let per_tuple = per_tuple_bound(&tuple, j);
        holds &= count <= per_tuple;
        worst = worst.max(count);
        // next non-decreasing index vector
        let mut p = t;
        while p > 0 && idx[p - 1] == sizes.len() - 1 {
            p -= 1;
        }
        if p == 0 {
            break;
        }
        idx[p - 1] += 1;
        let v = idx[p - 1];
        for i in idx.iter_mut().skip(p) {
            *i = v;
        }
    }
    let bound = binomial(t, j) * BigUint::from(cmax).pow((t - j) as u32);
    let k = LogSum::log2(cmax);
    let rhs = k.scale(&((BigRational::one() - q / BigRational::from_integer(8.into())) * ratio(t as u64, 1)))
        + LogSum::integer(t as i64);
    let log_bound_holds = LogSum::log2(bound.clone()).le(&rhs);
    Ok(AgreementReport { t, j, holds: holds && worst <= bound, worst, bound, log_bound_holds })
}

/// `sum over j-subsets S of prod_{i not in S} c_i`.
fn per_tuple_bound(sizes: &[u64], j: usize) -> BigUint {
    let mut poly = vec![BigUint::one()];
    for &c in sizes {
        let mut next = vec![BigUint::zero(); poly.len() + 1];
        for (a, v) in poly.iter().enumerate() {
            next[a + 1] += v;
            next[a] += v * c;
        }
        poly = next;
    }
    poly[j].clone()
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Pairwise family `in -> out` used for exact sweeps (GF(2^8), two coefficients).
pub fn sweep_family(in_len: usize, out_len: usize) -> Result<HashFamilySpec> {
    HashFamilySpec::new(2, in_len, out_len, false)
}

fn member_table(g: &HashMember, n: usize) -> Vec<u64> {
    (0..1u64 << n)
        .map(|x| g.evaluate(&BitString::from_u64(x, n)).unwrap().to_u64().unwrap())
        .collect()
}

/// Exact checks for `F'(x, g) = (F(x), g, g(x))` over every pairwise `g`.
#[derive(Clone, Debug)]
pub struct EntropyReductionReport {
    pub ell: usize,
    pub s: u64,
    pub members: u64,
    /// Largest `Pr_x[|F'^-1| < 2^(k-ell-s)] - 2^-s - Pr_x[|F^-1| < 2^k]` over
    /// every `g` and every `k = log2 c` with `c` a class size of `F`.
    pub min_entropy_excess: BigRational,
    pub min_entropy_holds: bool,
    /// Largest `Pr_g[|L'(x, g)| > 2^(k-ell+s-1) + 1]` over `x`, with `L(x)` the
    /// class of `x` and `2^k` the largest class.
    pub markov_worst: BigRational,
    pub markov_bound: BigRational,
    pub markov_holds: bool,
}

pub fn entropy_reduction_check(f: &FiniteFunction, ell: usize, s: u64) -> Result<EntropyReductionReport> {
    if s == 0 {
        return Err(IelError::Domain("s must be positive".into()));
    }
    let n = f.input_len();
    let spec = sweep_family(n, ell)?;
    let fx: Vec<u64> = (0..1u64 << n).map(|x| f.eval_u64(x)).collect();
    let counts = {
        let mut m: HashMap<u64, u64> = HashMap::new();
        for &y in &fx {
            *m.entry(y).or_insert(0) += 1;
        }
        m
    };
    let class: Vec<u64> = fx.iter().map(|y| counts[y]).collect();
    let cmax = *class.iter().max().unwrap();
    let mut thresholds: Vec<u64> = class.clone();
    thresholds.sort_unstable();
    thresholds.dedup();
    let below_k: Vec<u64> = thresholds.iter().map(|&c| class.iter().filter(|&&v| v < c).count() as u64).collect();
    let members: Vec<HashMember> = spec.members()?.collect();
    let dom = 1u64 << n;
    let scale = 1u128 << (ell as u64 + s);
    let (excess_num, markov_counts) = members
        .par_iter()
        .fold(
            || (i128::MIN, vec![0u64; dom as usize]),
            |(mut worst, mut markov), g| {
                let gx = member_table(g, n);
                let mut buckets: HashMap<(u64, u64), u64> = HashMap::new();
                for x in 0..dom as usize {
                    *buckets.entry((fx[x], gx[x])).or_insert(0) += 1;
                }
                let sub: Vec<u64> = (0..dom as usize).map(|x| buckets[&(fx[x], gx[x])]).collect();
                for (ti, &c) in thresholds.iter().enumerate() {
                    // count_small * 2^s - 2^n - 2^s * below, all over 2^(n+s)
                    let small = sub.iter().filter(|&&v| (v as u128) * scale < c as u128).count() as i128;
                    let e = (small << s) - dom as i128 - ((below_k[ti] as i128) << s);
                    worst = worst.max(e);
                }
                for x in 0..dom as usize {
                    // |L'| - 1 > cmax 2^(s-1) / 2^ell
                    if ((sub[x] - 1) as u128) << ell > (cmax as u128) << (s - 1) {
                        markov[x] += 1;
                    }
                }
                (worst, markov)
            },
        )
        .reduce(
            || (i128::MIN, vec![0u64; dom as usize]),
            |(a, mut ma), (b, mb)| {
                ma.iter_mut().zip(mb).for_each(|(u, v)| *u += v);
                (a.max(b), ma)
            },
        );
    let min_entropy_excess = BigRational::new(BigInt::from(excess_num), BigInt::from(1u128 << (n as u64 + s)));
    let worst_markov = *markov_counts.iter().max().unwrap();
    let markov_worst = ratio(worst_markov, members.len() as u64);
    let markov_bound = ratio(1u32, 1u64 << (s - 1));
    Ok(EntropyReductionReport {
        ell,
        s,
        members: members.len() as u64,
        min_entropy_holds: excess_num <= 0,
        min_entropy_excess,
        markov_holds: markov_worst <= markov_bound,
        markov_worst,
        markov_bound,
    })
}

/// Exact checks for `F'(x, g) = (g, g(F(x)))` over every pairwise `g`.
#[derive(Clone, Debug)]
pub struct OutputReductionReport {
    pub out_len: usize,
    pub image_size: u64,
    /// `Pr_{x,g}[exists y' in Image(F), y' != F(x), g(y') = g(F(x))]`.
    pub false_collision: BigRational,
    /// `|Image(F)| / 2^out_len`.
    pub bound: BigRational,
    /// Fraction of `g` injective on `Image(F)`.
    pub injective: BigRational,
    /// `1 - C(|Image|, 2) / 2^out_len`.
    pub injective_floor: BigRational,
    pub holds: bool,
}

pub fn output_reduction_check(f: &FiniteFunction, log_n: usize) -> Result<OutputReductionReport> {
    let (n, m) = (f.input_len(), f.output_len());
    if log_n >= n {
        return Err(IelError::Domain(format!("cannot remove {log_n} of {n} bits")));
    }
    let out = n - log_n;
    let spec = sweep_family(m, out)?;
    let counts = f.preimage_counts()?;
    let image: Vec<u64> = (0..counts.len() as u64).filter(|&y| counts[y as usize] > 0).collect();
    let members: Vec<HashMember> = spec.members()?.collect();
    let (bad, injective) = members
        .par_iter()
        .map(|g| {
            let mut by_hash: HashMap<u64, Vec<u64>> = HashMap::new();
            for &y in &image {
                by_hash.entry(g.evaluate(&BitString::from_u64(y, m)).unwrap().to_u64().unwrap()).or_default().push(y);
            }
            // inputs whose output shares its hash with another image point
            let bad: u64 = by_hash.values().filter(|ys| ys.len() > 1).flat_map(|ys| ys.iter()).map(|&y| counts[y as usize]).sum();
            (bad as u128, (by_hash.len() == image.len()) as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let g = members.len() as u128;
    let false_collision = BigRational::new(BigInt::from(bad), BigInt::from(g << n));
    let bound = ratio(image.len() as u64, 1u128 << out);
    let injective = ratio(injective, members.len() as u64);
    let pairs = image.len() as u128 * (image.len() as u128 - 1) / 2;
    let injective_floor = BigRational::one() - ratio(pairs, 1u128 << out);
    Ok(OutputReductionReport {
        out_len: out,
        image_size: image.len() as u64,
        holds: false_collision <= bound && injective >= injective_floor,
        false_collision,
        bound,
        injective,
        injective_floor,
    })
}

/// Target-collision game for `F'_y(x) = F(y xor x)` against an unbounded
/// adversary that commits to `x`, receives `y` and returns a sibling if one exists.
#[derive(Clone, Debug)]
pub struct ShiftGameReport {
    /// Success for the best and worst committed `x`.
    pub best: BigRational,
    pub worst: BigRational,
    /// `Pr_u[|F^-1(F(u))| > 1]`.
    pub predicted: BigRational,
}

pub fn shift_game(f: &FiniteFunction) -> Result<ShiftGameReport> {
    let n = f.input_len();
    let counts = f.preimage_counts()?;
    let dom = 1u64 << n;
    let shared: Vec<bool> = (0..dom).map(|u| counts[f.eval_u64(u) as usize] > 1).collect();
    let predicted = ratio(shared.iter().filter(|&&b| b).count() as u64, dom);
    let wins: Vec<u64> = (0..dom)
        .into_par_iter()
        .map(|x| {
            (0..dom)
                .filter(|&y| {
                    // a brute-force search for x' != x with F(y ^ x') = F(y ^ x)
                    let v = f.eval_u64(y ^ x);
                    (0..dom).any(|xp| xp != x && f.eval_u64(y ^ xp) == v)
                })
                .count() as u64
        })
        .collect();
    Ok(ShiftGameReport {
        best: ratio(*wins.iter().max().unwrap(), dom),
        worst: ratio(*wins.iter().min().unwrap(), dom),
        predicted,
    })
}

/// A collision finder for `F` built from one for `F^t`: on `x` it picks a random
/// coordinate `i` and random other inputs, runs the product finder and returns
/// coordinate `i` of its answer.
pub struct ProductWrapper {
    inner: CollisionFinder,
    n0: usize,
    t: usize,
}

impl ProductWrapper {
    pub fn new(inner: CollisionFinder, n0: usize, t: usize) -> Result<Self> {
        if t == 0 || n0 * t > 24 {
            return Err(IelError::Capacity(format!("product of {t} copies of {n0} bits")));
        }
        Ok(ProductWrapper { inner, n0, t })
    }

    pub fn inner(&self) -> &CollisionFinder {
        &self.inner
    }

    fn tuple(&self, x: &BitString, i: usize, rest: u64) -> BitString {
        let mut out = BitString::new();
        let mut r = rest;
        for j in 0..self.t {
            if j == i {
                out.extend(x);
            } else {
                out.extend(&BitString::from_u64(r & ((1 << self.n0) - 1), self.n0));
                r >>= self.n0;
            }
        }
        out
    }
}

impl Strategy for ProductWrapper {
    fn label(&self) -> String {
        format!("wrap{}({})", self.t, self.inner.label())
    }

    fn sample(&self, _target: &dyn Target, z: &BitString, rng: &mut Rng) -> Result<BitString> {
        let i = rng.below(self.t as u64) as usize;
        let rest = rng.bits(self.n0 * (self.t - 1));
        let rest = if rest.is_empty() { 0 } else { rest.to_u64()? };
        let out = self.inner.call(&self.tuple(z, i, rest), rng)?;
        out.slice(i * self.n0, (i + 1) * self.n0)
    }

    fn law(&self, _target: &dyn Target, z: &BitString) -> Result<Law> {
        let others = 1u64 << (self.n0 * (self.t - 1));
        let w = ratio(1u32, others as u128 * self.t as u128);
        let mut acc: BTreeMap<BitString, BigRational> = BTreeMap::new();
        for i in 0..self.t {
            for rest in 0..others {
                for (x, p) in self.inner.law(&self.tuple(z, i, rest))? {
                    *acc.entry(x.slice(i * self.n0, (i + 1) * self.n0)?).or_insert_with(BigRational::zero) += p * &w;
                }
            }
        }
        Ok(normalize_law(acc.into_iter().collect()))
    }
}
