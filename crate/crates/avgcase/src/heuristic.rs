use std::collections::BTreeMap;
use std::sync::Arc;

use iel_core::{BitString, IelError, Result, Rng};
use iel_entropy::ratio;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::relation::{QStatement, RelationQ};

/// Finite output law with integer weights over `total`; missing mass is a ⊥ answer.
#[derive(Clone, Debug, Default)]
pub struct IntLaw {
    pub outcomes: Vec<(BitString, BitString, u64)>,
    pub total: u64,
}

/// An algorithm answering statements of `Q` with a candidate `(x, w)`.
pub trait QOracle: Send + Sync {
    fn label(&self) -> String;
    fn solve(&self, st: &QStatement, rng: &mut Rng) -> Option<(BitString, BitString)>;

    /// Exact answer law, when the oracle can state it.
    fn law(&self, _st: &QStatement) -> Option<IntLaw> {
        None
    }
}

/// Uniform `x` in `S(i, g)` with its smallest witness, ⊥ when `S(i, g)` is empty.
pub struct ExhaustiveSolver {
    q: Arc<RelationQ>,
}

impl ExhaustiveSolver {
    pub fn new(q: Arc<RelationQ>) -> Self {
        ExhaustiveSolver { q }
    }

    fn pair(&self, x: u64) -> (BitString, BitString) {
        (BitString::from_u64(x, self.q.m()), self.q.canonical_witness(x).cloned().expect("solutions have witnesses"))
    }
}

impl QOracle for ExhaustiveSolver {
    fn label(&self) -> String {
        "exhaustive".into()
    }

    fn solve(&self, st: &QStatement, rng: &mut Rng) -> Option<(BitString, BitString)> {
        let sols = self.q.solutions(st);
        if sols.is_empty() {
            return None;
        }
        Some(self.pair(sols[rng.below(sols.len() as u64) as usize]))
    }

    fn law(&self, st: &QStatement) -> Option<IntLaw> {
        let sols = self.q.solutions(st);
        let total = sols.len().max(1) as u64;
        Some(IntLaw {
            outcomes: sols
                .into_iter()
                .map(|x| {
                    let (xb, w) = self.pair(x);
                    (xb, w, 1)
                })
                .collect(),
            total,
        })
    }
}

/// Uniformly random `(x, w)` regardless of the statement.
pub struct RandomGuess {
    x_len: usize,
    w_len: usize,
}

impl RandomGuess {
    pub fn new(q: &RelationQ) -> Self {
        RandomGuess { x_len: q.m(), w_len: q.relation().witness_len() }
    }
}

impl QOracle for RandomGuess {
    fn label(&self) -> String {
        "random".into()
    }

    fn solve(&self, _st: &QStatement, rng: &mut Rng) -> Option<(BitString, BitString)> {
        Some((rng.bits(self.x_len), rng.bits(self.w_len)))
    }
}

/// A genuine solution `x` paired with the witness of an unrelated coin string.
pub struct MismatchedWitness {
    q: Arc<RelationQ>,
}

impl MismatchedWitness {
    pub fn new(q: Arc<RelationQ>) -> Self {
        MismatchedWitness { q }
    }
}

impl QOracle for MismatchedWitness {
    fn label(&self) -> String {
        "mismatched".into()
    }

    fn solve(&self, st: &QStatement, rng: &mut Rng) -> Option<(BitString, BitString)> {
        let sols = self.q.solutions(st);
        let x = *sols.get(rng.below(sols.len().max(1) as u64) as usize)?;
        let other = rng.below(1 << self.q.m());
        let w = match self.q.canonical_witness(other) {
            Some(w) => w.clone(),
            None => rng.bits(self.q.relation().witness_len()),
        };
        Some((BitString::from_u64(x, self.q.m()), w))
    }
}

/// Loop parameters of the search heuristic.
#[derive(Clone, Debug, PartialEq)]
pub struct HeuristicParams {
    pub n: u64,
    pub delta: BigRational,
    pub beta: u32,
}

impl HeuristicParams {
    pub fn new(n: u64, delta: BigRational, beta: u32) -> Result<Self> {
        if n == 0 || delta <= BigRational::zero() || delta > ratio(1, 1) {
            return Err(IelError::Config(format!("need n >= 1 and delta in (0, 1], got n = {n}, delta = {delta}")));
        }
        Ok(HeuristicParams { n, delta, beta })
    }

    /// `delta = 1/4`, `beta = 2`.
    pub fn standard(n: u64) -> Self {
        HeuristicParams { n, delta: ratio(1, 4), beta: 2 }
    }

    /// `n (n / delta)^beta`, rounded up.
    pub fn loops(&self) -> Result<u64> {
        let base = ratio(self.n, 1) / &self.delta;
        let v = num_traits::pow(base, self.beta as usize) * ratio(self.n, 1);
        v.ceil()
            .to_integer()
            .to_u64()
            .ok_or_else(|| IelError::Capacity(format!("loop count {v} exceeds 64 bits")))
    }
}

/// Result of one run of the heuristic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicOutcome {
    /// `Some(w)` for the answer `(1, w)`, `None` for `0`.
    pub witness: Option<BitString>,
    pub iterations: u64,
}

/// The search heuristic built from an oracle for `Q`: repeat `n (n/delta)^beta`
/// times, draw `i` in `1..=m` and `g` with `g(y)_1..i = 0^i`, ask the oracle and
/// accept only a verified witness for `y` whose `x` samples `y`.
pub fn heuristic_b(
    q: &RelationQ,
    oracle: &dyn QOracle,
    y: &BitString,
    params: &HeuristicParams,
    rng: &mut Rng,
) -> Result<HeuristicOutcome> {
    if y.len() > q.spec().in_len {
        return Err(IelError::Domain(format!("instance of {} bits for a sampler on {}", y.len(), q.spec().in_len)));
    }
    let loops = params.loops()?;
    let m = q.m();
    for it in 1..=loops {
        let i = rng.index(m);
        let g = q.spec().sample_prefix(y, &BitString::zeros(i), rng)?;
        if let Some((x, w)) = oracle.solve(&QStatement { i, g }, rng) {
            if x.len() == m && q.relation().holds(y, &w) && q.sampler().sample(&x)? == *y {
                return Ok(HeuristicOutcome { witness: Some(w), iterations: it });
            }
        }
    }
    Ok(HeuristicOutcome { witness: None, iterations: loops })
}

/// Sums `a / b` with small denominators exactly.
#[derive(Clone, Debug, Default)]
pub(crate) struct FracSum(BTreeMap<u64, u64>);

impl FracSum {
    pub(crate) fn add(&mut self, a: u64, b: u64) {
        if a > 0 {
            *self.0.entry(b).or_insert(0) += a;
        }
    }

    pub(crate) fn merge(&mut self, other: FracSum) {
        for (b, a) in other.0 {
            *self.0.entry(b).or_insert(0) += a;
        }
    }

    pub(crate) fn value(&self) -> BigRational {
        self.0.iter().map(|(&b, &a)| BigRational::new(BigInt::from(a), BigInt::from(b))).sum()
    }
}

fn law_of(oracle: &dyn QOracle, st: &QStatement) -> Result<IntLaw> {
    oracle
        .law(st)
        .ok_or_else(|| IelError::Capacity(format!("oracle {} has no exact law", oracle.label())))
}

/// Per instance `y` with a witness, the exact probability that one loop of the
/// heuristic succeeds: `E_I Pr_G[oracle answers a valid (x, w) with D(x) = y | G(y)_1..I = 0^I]`.
pub fn hit_probabilities(q: &RelationQ, oracle: &dyn QOracle) -> Result<BTreeMap<BitString, BigRational>> {
    let m = q.m();
    let out = q.sampler().out_len();
    let support: Vec<u64> = q
        .sampler()
        .counts()
        .keys()
        .copied()
        .filter(|&y| !q.relation().witnesses(&BitString::from_u64(y, out)).is_empty())
        .collect();
    let slot: BTreeMap<u64, usize> = support.iter().enumerate().map(|(j, &y)| (y, j)).collect();
    let enc: Vec<u128> =
        support.iter().map(|&y| q.encode_instance(&BitString::from_u64(y, out))).collect::<Result<_>>()?;
    let members = q.members()?;
    let empty = || (vec![vec![0u64; m + 1]; support.len()], vec![vec![FracSum::default(); m + 1]; support.len()]);
    let (cond, hits) = members
        .par_iter()
        .try_fold(empty, |(mut cond, mut hits), g| -> Result<_> {
            let vals: Vec<u128> = enc.iter().map(|&v| g.eval_encoded(v)).collect();
            for i in 1..=m {
                let ok: Vec<bool> = vals.iter().map(|&v| v >> (m - i) == 0).collect();
                for (j, &b) in ok.iter().enumerate() {
                    cond[j][i] += b as u64;
                }
                let law = law_of(oracle, &QStatement { i, g: g.clone() })?;
                for (x, w, wt) in &law.outcomes {
                    let y = q.sampler().sample(x)?;
                    if let Some(&j) = y.to_u64().ok().and_then(|v| slot.get(&v)) {
                        if ok[j] && q.relation().holds(&y, w) {
                            hits[j][i].add(*wt, law.total);
                        }
                    }
                }
            }
            Ok((cond, hits))
        })
        .try_reduce(empty, |(mut ca, mut ha), (cb, hb)| {
            for j in 0..ca.len() {
                for i in 0..=m {
                    ca[j][i] += cb[j][i];
                    ha[j][i].merge(hb[j][i].clone());
                }
            }
            Ok((ca, ha))
        })?;
    let mut result = BTreeMap::new();
    for (j, &y) in support.iter().enumerate() {
        let mut p = BigRational::zero();
        for i in 1..=m {
            if cond[j][i] > 0 {
                p += hits[j][i].value() / BigRational::from_integer(BigInt::from(cond[j][i]));
            }
        }
        result.insert(BitString::from_u64(y, out), p / BigRational::from_integer(BigInt::from(m)));
    }
    Ok(result)
}

/// `1 - (1 - p)^loops`: success of the whole heuristic when one loop succeeds with `p`.
pub fn success_after(p: &BigRational, loops: u64) -> f64 {
    1.0 - (1.0 - p.to_f64().unwrap_or(0.0)).powf(loops as f64)
}

/// Instances with a witness whose per-loop hitting probability is below `tau`.
pub fn bad_instances(hits: &BTreeMap<BitString, BigRational>, tau: &BigRational) -> Vec<BitString> {
    hits.iter().filter(|(_, p)| *p < tau).map(|(y, _)| y.clone()).collect()
}

