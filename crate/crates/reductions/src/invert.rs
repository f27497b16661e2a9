use iel_constructions::TruncConstruction;
use iel_core::{BitString, FiniteFunction, IelError, Result, Rng};
use iel_entropy::ratio;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::finder::{distance_from_uniform, normalize_law, sample_law, CollisionFinder, Law};

/// Call caps for [`invert_trunc`]; `None` means unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InvConfig {
    pub step_cap: Option<u64>,
    pub total_cap: Option<u64>,
}

impl InvConfig {
    /// `64 n` calls per step and `8 n` overall.
    pub fn standard(n: usize) -> Self {
        InvConfig { step_cap: Some(64 * n as u64), total_cap: Some(8 * n as u64) }
    }

    /// No caps. Only safe when every step is feasible, e.g. `y = f(x)`.
    pub fn uncapped() -> Self {
        InvConfig { step_cap: None, total_cap: None }
    }
}

/// Outcome of one extension step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extend {
    Found { x: BitString, calls: u64 },
    TimedOut { calls: u64 },
}

/// Repeats `x' := A(x, i)` until `f(x')_i = b`; the `i`-th bit is 1-based.
pub fn extend_one(
    finder: &CollisionFinder,
    c: &TruncConstruction,
    x: &BitString,
    b: bool,
    i: usize,
    cap: Option<u64>,
    rng: &mut Rng,
) -> Result<Extend> {
    if i == 0 || i > c.n() {
        return Err(IelError::Range(format!("index {i} outside [1, {}]", c.n())));
    }
    let z = c.encode(x, i);
    let mut calls = 0u64;
    loop {
        if cap.is_some_and(|k| calls >= k) {
            return Ok(Extend::TimedOut { calls });
        }
        let (xp, _) = c.decode(&finder.call(&z, rng)?)?;
        calls += 1;
        if c.f().eval(&xp)?.get(i - 1) == b {
            return Ok(Extend::Found { x: xp, calls });
        }
    }
}

/// Result of [`invert_trunc`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inversion {
    pub x: Option<BitString>,
    pub calls: u64,
    pub success: bool,
}

/// The bit-by-bit inverter: start from a uniform `x`, then fix `y_1, ..., y_n`
/// one extension at a time.
pub fn invert_trunc(
    finder: &CollisionFinder,
    c: &TruncConstruction,
    y: &BitString,
    cfg: InvConfig,
    rng: &mut Rng,
) -> Result<Inversion> {
    let n = c.n();
    if y.len() != n {
        return Err(IelError::Domain(format!("target of length {} for n = {n}", y.len())));
    }
    let mut x = rng.bits(n);
    let mut calls = 0u64;
    for i in 1..=n {
        let left = cfg.total_cap.map(|t| t.saturating_sub(calls));
        let cap = match (cfg.step_cap, left) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        match extend_one(finder, c, &x, y.get(i - 1), i, cap, rng)? {
            Extend::Found { x: xp, calls: j } => {
                x = xp;
                calls += j;
            }
            Extend::TimedOut { calls: j } => {
                return Ok(Inversion { x: None, calls: calls + j, success: false });
            }
        }
    }
    let success = c.f().eval(&x)? == *y;
    Ok(Inversion { x: Some(x), calls, success })
}

/// Exact expected finder calls of the uncapped inverter with the optimal finder,
/// over `y = f(X)`: the sum over `i` of the expected number of feasible next bits.
pub fn expected_optimal_calls(f: &FiniteFunction) -> Result<BigRational> {
    let n = f.input_len();
    let table = f.tabulate()?.table().expect("tabulated").to_vec();
    let mut total = 0u128;
    for i in 1..=n {
        // prefixes of length i - 1, and which next bits occur
        let mut seen = vec![0u8; 1 << (i - 1)];
        for &y in &table {
            let p = (y >> (n - i + 1)) as usize;
            seen[p] |= 1 << ((y >> (n - i)) & 1);
        }
        for &y in &table {
            total += seen[(y >> (n - i + 1)) as usize].count_ones() as u128;
        }
    }
    Ok(ratio(total, 1u128 << n))
}

/// Coupling of two laws with `Pr[a != b] = SD(P, Q)`: with the overlap mass
/// both sides agree, otherwise each draws from its own excess independently.
#[derive(Clone, Debug)]
pub struct MaximalCoupling {
    common: Law,
    left: Law,
    right: Law,
    overlap: BigRational,
}

impl MaximalCoupling {
    pub fn new(p: &Law, q: &Law) -> Self {
        let p = normalize_law(p.clone());
        let q = normalize_law(q.clone());
        let get = |l: &Law, x: &BitString| {
            l.binary_search_by(|(k, _)| k.cmp(x)).map(|i| l[i].1.clone()).unwrap_or_else(|_| BigRational::zero())
        };
        let mut keys: Vec<BitString> = p.iter().chain(q.iter()).map(|(x, _)| x.clone()).collect();
        keys.sort();
        keys.dedup();
        let (mut common, mut left, mut right) = (Vec::new(), Vec::new(), Vec::new());
        for x in keys {
            let (a, b) = (get(&p, &x), get(&q, &x));
            let m = if a < b { a.clone() } else { b.clone() };
            if !m.is_zero() {
                common.push((x.clone(), m.clone()));
            }
            if a > m {
                left.push((x.clone(), &a - &m));
            }
            if b > m {
                right.push((x, &b - &m));
            }
        }
        let overlap: BigRational = common.iter().map(|(_, m)| m.clone()).sum();
        MaximalCoupling { common, left, right, overlap }
    }

    /// `SD(P, Q)`.
    pub fn distance(&self) -> BigRational {
        BigRational::one() - &self.overlap
    }

    fn scaled(l: &Law, by: &BigRational) -> Law {
        l.iter().map(|(x, p)| (x.clone(), p / by)).collect()
    }

    pub fn sample(&self, rng: &mut Rng) -> (BitString, BitString) {
        let d = self.distance();
        let agree = if d.is_zero() {
            true
        } else if self.overlap.is_zero() {
            false
        } else {
            let two: Law = vec![(BitString::from_u64(1, 1), self.overlap.clone()), (BitString::from_u64(0, 1), d.clone())];
            sample_law(&two, rng).get(0)
        };
        if agree {
            let x = sample_law(&Self::scaled(&self.common, &self.overlap), rng);
            (x.clone(), x)
        } else {
            (sample_law(&Self::scaled(&self.left, &d), rng), sample_law(&Self::scaled(&self.right, &d), rng))
        }
    }

    /// Per-round `(Pr[a = b and a in B], Pr[a in B or b in B])` for an event `B`.
    pub fn round_masses(&self, event: &dyn Fn(&BitString) -> bool) -> (BigRational, BigRational) {
        let mass = |l: &Law| -> BigRational { l.iter().filter(|(x, _)| event(x)).map(|(_, p)| p.clone()).sum() };
        let both = mass(&self.common);
        let d = self.distance();
        if d.is_zero() {
            return (both.clone(), both);
        }
        let ra = mass(&self.left) / &d;
        let rb = mass(&self.right) / &d;
        let one = BigRational::one();
        let either = &both + &d * (&one - (&one - ra) * (&one - rb));
        (both, either)
    }
}

/// One run of the finder's extension step next to the optimal finder's, sharing
/// coins through a maximal coupling of their per-call laws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoupledExtend {
    pub finder: (BitString, u64),
    pub optimal: (BitString, u64),
}

impl CoupledExtend {
    pub fn agree(&self) -> bool {
        self.finder == self.optimal
    }
}

/// Exact quantities behind one coupled extension step.
#[derive(Clone, Debug)]
pub struct CouplingProfile {
    /// `eps(x, i)`: distance of the finder's law from uniform on siblings.
    pub eps: BigRational,
    /// `p(b | f(x)_{1..i-1})`.
    pub p: BigRational,
    /// Exact probability that both runs return the same `(x', j)`.
    pub agreement: BigRational,
    coupling: MaximalCoupling,
}

impl CouplingProfile {
    pub fn new(finder: &CollisionFinder, c: &TruncConstruction, x: &BitString, b: bool, i: usize) -> Result<Self> {
        let z = c.encode(x, i);
        let law = finder.law(&z)?;
        let sibs = finder.target().siblings(&z)?;
        let uniform: Law = {
            let u = ratio(1, sibs.len() as i64);
            sibs.iter().map(|s| (s.clone(), u.clone())).collect()
        };
        let eps = distance_from_uniform(&law, &sibs);
        let hits = |w: &BitString| -> bool {
            c.decode(w).ok().and_then(|(xp, _)| c.f().eval(&xp).ok()).map(|y| y.get(i - 1) == b).unwrap_or(false)
        };
        let p = ratio(sibs.iter().filter(|s| hits(s)).count() as i64, sibs.len() as i64);
        if p.is_zero() {
            return Err(IelError::Infeasible(format!("no sibling of ({x}, {i}) has bit {i} equal to {}", b as u8)));
        }
        let coupling = MaximalCoupling::new(&law, &uniform);
        let (both, either) = coupling.round_masses(&hits);
        Ok(CouplingProfile { eps, p, agreement: both / either, coupling })
    }

    /// `1 - 2 eps / p`.
    pub fn agreement_floor(&self) -> BigRational {
        BigRational::one() - BigRational::from_integer(2.into()) * &self.eps / &self.p
    }

    /// Runs both extension loops on shared coupled draws. Each call of the
    /// loop draws one coupled pair; a side that has already stopped ignores it.
    pub fn run(&self, c: &TruncConstruction, b: bool, i: usize, cap: u64, rng: &mut Rng) -> Result<Option<CoupledExtend>> {
        let hit = |w: &BitString| -> Result<bool> { Ok(c.f().eval(&c.decode(w)?.0)?.get(i - 1) == b) };
        let (mut fa, mut fo) = (None, None);
        for j in 1..=cap {
            let (a, o) = self.coupling.sample(rng);
            if fa.is_none() && hit(&a)? {
                fa = Some((c.decode(&a)?.0, j));
            }
            if fo.is_none() && hit(&o)? {
                fo = Some((c.decode(&o)?.0, j));
            }
            if let (Some(a), Some(o)) = (&fa, &fo) {
                return Ok(Some(CoupledExtend { finder: a.clone(), optimal: o.clone() }));
            }
        }
        Ok(None)
    }
}

/// Exact `E_{x, i}[eps(x, i)]` for a finder on the truncation target.
pub fn mean_epsilon(finder: &CollisionFinder, c: &TruncConstruction) -> Result<BigRational> {
    let n = c.n();
    let mut acc = BigRational::zero();
    for i in 1..=n {
        for x in 0..1u64 << n {
            let z = c.encode(&BitString::from_u64(x, n), i);
            let law = finder.law(&z)?;
            acc += distance_from_uniform(&law, &finder.target().siblings(&z)?);
        }
    }
    Ok(acc / BigRational::from_integer(((n as u64) << n).into()))
}
