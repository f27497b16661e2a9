use std::fmt;
use std::str::FromStr;

use iel_core::{ceil_log2, IelError, Result};
use iel_entropy::{rational_string, ratio};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

/// Grids with more points than this are summarized by their top point only.
pub const MAX_LISTED_GRID: u64 = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PathKind {
    /// From a gap to accessible average max-entropy.
    AvgMax,
    /// From a gap to accessible Shannon entropy.
    Shannon,
}

impl PathKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PathKind::AvgMax => "avg-max",
            PathKind::Shannon => "shannon",
        }
    }

    pub fn tag(&self) -> u8 {
        match self {
            PathKind::AvgMax => 1,
            PathKind::Shannon => 2,
        }
    }
}

impl fmt::Display for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PathKind {
    type Err = IelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avg-max" | "avgmax" => Ok(PathKind::AvgMax),
            "shannon" => Ok(PathKind::Shannon),
            other => Err(IelError::Parse(format!("unknown path {other:?}"))),
        }
    }
}

/// Inputs to the calculator; every derived quantity comes from these.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub path: PathKind,
    /// Security parameter. Output reduction removes `ceil(log2 n)` bits.
    pub n: u64,
    pub n0: u64,
    pub m0: u64,
    /// Entropy gap in bits.
    pub delta: BigRational,
    pub s: u64,
    /// Real Shannon entropy of `F^-1`, when known. Reported, never used.
    pub k_real: Option<f64>,
}

impl PipelineConfig {
    pub fn new(path: PathKind, n: u64, n0: u64, m0: u64, delta: BigRational, s: u64) -> Result<Self> {
        let cfg = PipelineConfig { path, n, n0, m0, delta, s, k_real: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 0 {
            return Err(IelError::Config("s must be positive".into()));
        }
        if !self.delta.is_positive() {
            return Err(IelError::Config(format!("gap {} is not positive", rational_string(&self.delta))));
        }
        if self.n0 == 0 || self.m0 == 0 {
            return Err(IelError::Config("empty base function".into()));
        }
        if self.n < 2 {
            return Err(IelError::Config(format!("security parameter {} below 2", self.n)));
        }
        Ok(())
    }

    pub fn with_k_real(mut self, k: f64) -> Self {
        self.k_real = Some(k);
        self
    }

    /// `ceil(log2 n)`, at least 1.
    pub fn log_n(&self) -> u64 {
        ceil_log2(self.n).max(1) as u64
    }

    /// `ceil(log2(n)^2)`.
    pub fn default_s(n: u64) -> u64 {
        let l = (n as f64).log2();
        if n.is_power_of_two() {
            let k = n.trailing_zeros() as u64;
            (k * k).max(1)
        } else {
            ((l * l).ceil() as u64).max(1)
        }
    }

    /// Instance obtained from a one-way function on `n` bits through the hashed
    /// construction: `n0 = 4n + ceil(log n)`, gap `log n / n`.
    pub fn avg_max_for_owf(n: u64) -> Result<Self> {
        let log = ceil_log2(n) as u64;
        let n0 = 4 * n + log;
        Self::new(PathKind::AvgMax, n, n0, n0, ratio(log, n), Self::default_s(n))
    }

    /// Instance obtained through the truncation construction: `n0 = n + ceil(log n)`,
    /// gap `1 / (64 n^2)`.
    pub fn shannon_for_owf(n: u64) -> Result<Self> {
        let n0 = n + ceil_log2(n) as u64;
        Self::new(PathKind::Shannon, n, n0, n0, ratio(1, 64 * n as u128 * n as u128), Self::default_s(n))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "path": self.path.as_str(),
            "n": self.n,
            "n0": self.n0,
            "m0": self.m0,
            "delta": rational_string(&self.delta),
            "s": self.s,
            "k_real": self.k_real,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |k: &str| v.get(k).ok_or_else(|| IelError::Parse(format!("missing field {k}")));
        let int = |k: &str| field(k)?.as_u64().ok_or_else(|| IelError::Parse(format!("{k} is not an integer")));
        let path: PathKind = field("path")?.as_str().ok_or_else(|| IelError::Parse("path is not a string".into()))?.parse()?;
        let delta = parse_rational(field("delta")?.as_str().ok_or_else(|| IelError::Parse("delta is not a string".into()))?)?;
        let mut cfg = PipelineConfig::new(path, int("n")?, int("n0")?, int("m0")?, delta, int("s")?)?;
        cfg.k_real = v.get("k_real").and_then(Value::as_f64);
        Ok(cfg)
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| IelError::Parse(format!("bad numerator in {s:?}")))?;
        let b: BigInt = b.trim().parse().map_err(|_| IelError::Parse(format!("bad denominator in {s:?}")))?;
        if b.is_zero() {
            return Err(IelError::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(a, b));
    }
    if let Ok(i) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(i));
    }
    // decimal literal, read exactly
    let (int, frac) = s.split_once('.').ok_or_else(|| IelError::Parse(format!("not a number: {s:?}")))?;
    let neg = int.starts_with('-');
    let digits = format!("{}{}", int.trim_start_matches('-'), frac);
    let v: BigInt = digits.parse().map_err(|_| IelError::Parse(format!("not a number: {s:?}")))?;
    let r = BigRational::new(v, num_traits::pow(BigInt::from(10u8), frac.len()));
    Ok(if neg { -r } else { r })
}

/// Key length of the Toeplitz family `in -> out`.
pub fn pairwise_key_len(in_len: &BigUint, out_len: &BigUint) -> BigUint {
    if out_len.is_zero() {
        BigUint::zero()
    } else {
        in_len + out_len * 2u8 - 1u8
    }
}

fn ceil_nonneg(r: &BigRational) -> BigUint {
    if !r.is_positive() {
        return BigUint::zero();
    }
    r.ceil().to_integer().to_biguint().expect("positive")
}

fn big(v: u64) -> BigRational {
    BigRational::from_integer(v.into())
}

fn rat(v: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from_biguint(Sign::Plus, v.clone()))
}

/// `ceil(sqrt(v))`.
pub fn ceil_sqrt(v: &BigUint) -> BigUint {
    let r = v.sqrt();
    if &(&r * &r) < v {
        r + 1u8
    } else {
        r
    }
}

/// Least `t > s` with `t * a >= b * ceil(sqrt(s t)) + c`, for `a > 0`.
pub fn least_t(a: &BigRational, b: &BigRational, c: &BigRational, s: u64) -> Result<BigUint> {
    if !a.is_positive() || b.is_negative() {
        return Err(IelError::Config("degenerate repetition inequality".into()));
    }
    let sb = BigUint::from(s);
    let sr = big(s);
    // With r = ceil(sqrt(st)) fixed, t ranges over (floor((r-1)^2/s), floor(r^2/s)] and
    // needs t >= ceil((b r + c) / a). Any solution has r^2/s >= (b r + c)/a.
    let phi = |r: &BigUint| rat(&(r * r)) / &sr - (b * rat(r) + c) / a;
    let mut lo = BigUint::one();
    let mut hi = BigUint::from(2u8);
    while phi(&hi) < BigRational::zero() {
        hi <<= 1;
        if hi.bits() > 4096 {
            return Err(IelError::Config("no repetition count satisfies the inequality".into()));
        }
    }
    let mid_start = (b * big(s) / (a * BigRational::from_integer(2.into()))).floor().to_integer();
    if let Some(m) = mid_start.to_biguint() {
        if m > lo && m < hi {
            lo = m;
        }
    }
    // smallest r in [lo, hi] with phi(r) >= 0; phi increases beyond its minimum
    while lo < hi {
        let mid: BigUint = (&lo + &hi) >> 1;
        if phi(&mid) >= BigRational::zero() {
            hi = mid;
        } else {
            lo = mid + 1u8;
        }
    }
    let mut r = lo;
    loop {
        let lo_t = (&r - 1u8) * (&r - 1u8) / &sb + 1u8;
        let hi_t = &r * &r / &sb;
        let need = ceil_nonneg(&((b * rat(&r) + c) / a));
        let start = lo_t.max(need).max(&sb + 1u8);
        if start <= hi_t {
            return Ok(start);
        }
        r += 1u8;
    }
}

/// One stage of a grid member: lengths of the function after the stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub name: &'static str,
    pub in_len: BigUint,
    pub out_len: BigUint,
    /// Key bits of the hash introduced by the stage, zero otherwise.
    pub hash_key: BigUint,
}

impl Stage {
    fn to_json(&self) -> Value {
        json!({
            "stage": self.name,
            "in": self.in_len.to_string(),
            "out": self.out_len.to_string(),
            "hash_key": self.hash_key.to_string(),
        })
    }
}

/// Parameters of the grid member built for advice `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridPoint {
    pub j: BigUint,
    pub k: BigRational,
    /// Output bits of the first input hash.
    pub ell: BigUint,
    /// Collision-resistance level `Delta / 4k` (Shannon path).
    pub q: Option<BigRational>,
    /// Second repetition count (Shannon path).
    pub t_prime: Option<BigUint>,
    /// Output bits of the second input hash (Shannon path).
    pub ell2: Option<BigUint>,
    pub stages: Vec<Stage>,
}

impl GridPoint {
    pub fn member_in(&self) -> &BigUint {
        &self.stages.last().unwrap().in_len
    }

    pub fn member_out(&self) -> &BigUint {
        &self.stages.last().unwrap().out_len
    }

    fn to_json(&self) -> Value {
        let opt_u = |v: &Option<BigUint>| v.as_ref().map(|v| Value::String(v.to_string())).unwrap_or(Value::Null);
        json!({
            "j": self.j.to_string(),
            "k": rational_string(&self.k),
            "ell": self.ell.to_string(),
            "q": self.q.as_ref().map(rational_string),
            "t_prime": opt_u(&self.t_prime),
            "ell2": opt_u(&self.ell2),
            "stages": self.stages.iter().map(Stage::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Everything the calculator derives from a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSheet {
    pub cfg: PipelineConfig,
    pub log_n: u64,
    pub t: BigUint,
    /// `ceil(sqrt(s t))`.
    pub sqrt_st: BigUint,
    pub kappa: BigUint,
    pub grid_step: BigRational,
    /// The member for the largest advice, which has the longest input.
    pub top: GridPoint,
    /// Every member, when there are at most [`MAX_LISTED_GRID`].
    pub grid: Option<Vec<GridPoint>>,
    /// Common input length `N` of the padded members.
    pub padded_in: BigUint,
    /// Output length `L = N - log n` of each member.
    pub block_out: BigUint,
    pub shoup_blocks: BigUint,
    pub masks: BigUint,
    pub member_key: BigUint,
    pub in_len: BigUint,
    pub out_len: BigUint,
    pub key_len: BigUint,
    /// `n0^4 s / Delta^3` (avg-max) or `n0^8 s^2 / Delta^7` (Shannon).
    pub theorem_output: f64,
}

impl ParamSheet {
    pub fn shrinks(&self) -> bool {
        self.out_len < self.in_len
    }

    pub fn to_json(&self) -> Value {
        let s = |v: &BigUint| v.to_string();
        json!({
            "config": self.cfg.to_json(),
            "log_n": self.log_n,
            "t": s(&self.t),
            "sqrt_st": s(&self.sqrt_st),
            "kappa": s(&self.kappa),
            "grid_step": rational_string(&self.grid_step),
            "top": self.top.to_json(),
            "grid": self.grid.as_ref().map(|g| g.iter().map(GridPoint::to_json).collect::<Vec<_>>()),
            "padded_in": s(&self.padded_in),
            "block_out": s(&self.block_out),
            "shoup_blocks": s(&self.shoup_blocks),
            "masks": s(&self.masks),
            "member_key": s(&self.member_key),
            "in_len": s(&self.in_len),
            "out_len": s(&self.out_len),
            "key_len": s(&self.key_len),
            "lengths": {
                "uniform_output": s(&self.out_len),
                "nonuniform_output": s(&self.block_out),
                "theorem_output": self.theorem_output,
                "notes": {
                    "uniform_output": "all grid members concatenated; advice k unknown",
                    "nonuniform_output": "a single member; advice k given",
                    "theorem_output": "closed-form magnitude without constants",
                },
            },
        })
    }
}

fn grid_point(cfg: &PipelineConfig, t: &BigUint, r: &BigUint, j: BigUint, step: &BigRational) -> Result<GridPoint> {
    let d = &cfg.delta;
    let s = big(cfg.s);
    let k = step * rat(&j);
    let tr = rat(t);
    let n0 = BigUint::from(cfg.n0);
    let n1 = t * cfg.n0;
    let m1 = t * cfg.m0;
    let log_n = BigUint::from(cfg.log_n());
    let mut stages = vec![Stage { name: "product", in_len: n1.clone(), out_len: m1.clone(), hash_key: BigUint::zero() }];
    let reduce_entropy = |stages: &mut Vec<Stage>, ell: &BigUint| {
        let prev = stages.last().unwrap().clone();
        let key = pairwise_key_len(&prev.in_len, ell);
        stages.push(Stage {
            name: "reduce-entropy",
            in_len: &prev.in_len + &key,
            out_len: &prev.out_len + &key + ell,
            hash_key: key,
        });
    };
    let reduce_output = |stages: &mut Vec<Stage>| -> Result<()> {
        let prev = stages.last().unwrap().clone();
        if prev.in_len <= log_n {
            return Err(IelError::Config("input too short for output reduction".into()));
        }
        let out = &prev.in_len - &log_n;
        let key = pairwise_key_len(&prev.out_len, &out);
        stages.push(Stage { name: "reduce-output", in_len: &prev.in_len + &key, out_len: &key + &out, hash_key: key });
        Ok(())
    };
    let (ell, q, t_prime, ell2) = match cfg.path {
        PathKind::AvgMax => {
            let ell = ceil_nonneg(&(&tr * (&k - d) + rat(&(&n0 * r)) + &s));
            reduce_entropy(&mut stages, &ell);
            (ell, None, None, None)
        }
        PathKind::Shannon => {
            let ell = ceil_nonneg(&(&tr * &k - &tr * d / big(2) + &s));
            reduce_entropy(&mut stages, &ell);
            let q = d / (big(4) * &k);
            let tp = ceil_nonneg(&(&s / &q)).max(BigUint::one());
            let prev = stages.last().unwrap().clone();
            stages.push(Stage {
                name: "product",
                in_len: &prev.in_len * &tp,
                out_len: &prev.out_len * &tp,
                hash_key: BigUint::zero(),
            });
            let inner = &tr * (d / big(2) - d * &q / big(16)) + rat(&(&n0 * r)) + big(1);
            let ell2 = ceil_nonneg(&(rat(&tp) * inner + &s));
            reduce_entropy(&mut stages, &ell2);
            (ell, Some(q), Some(tp), Some(ell2))
        }
    };
    reduce_output(&mut stages)?;
    Ok(GridPoint { j, k, ell, q, t_prime, ell2, stages })
}

/// Deterministic parameter sheet for a configuration.
pub fn calc_params(cfg: &PipelineConfig) -> Result<ParamSheet> {
    cfg.validate()?;
    let d = &cfg.delta;
    let s = cfg.s;
    let n0 = big(cfg.n0);
    let (a, b, c, step) = match cfg.path {
        PathKind::AvgMax => (d / big(2), big(2) * &n0, big(3 * s), d / big(2)),
        PathKind::Shannon => {
            let step = d * d / (big(128) * &n0);
            (step.clone(), big(2) * &n0, big(2 * s + 1) + big(3) * d, step)
        }
    };
    let t = least_t(&a, &b, &c, s)?;
    let sqrt_st = ceil_sqrt(&(&t * s));
    let kappa = ceil_nonneg(&(&n0 / &step)).max(BigUint::one());
    let top = grid_point(cfg, &t, &sqrt_st, kappa.clone(), &step)?;
    let grid = if kappa <= BigUint::from(MAX_LISTED_GRID) {
        let kk = kappa.to_u64().unwrap();
        Some((1..=kk).map(|j| grid_point(cfg, &t, &sqrt_st, j.into(), &step)).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };
    let log_n = cfg.log_n();
    let padded_in = top.member_in().clone();
    let block_out = &padded_in - log_n;
    let long_in = &kappa * &padded_in;
    let shoup_blocks = (&long_in - &block_out).div_ceil(&BigUint::from(log_n));
    let masks = BigUint::from(shoup_blocks.bits());
    let member_key = &padded_in + &masks * &block_out;
    let in_len = &block_out + &shoup_blocks * log_n;
    let out_len = &kappa * &block_out;
    let key_len = &kappa * &member_key;
    let df = d.to_f64().unwrap_or(f64::NAN);
    let n0f = cfg.n0 as f64;
    let sf = s as f64;
    let theorem_output = match cfg.path {
        PathKind::AvgMax => n0f.powi(4) * sf / df.powi(3),
        PathKind::Shannon => n0f.powi(8) * sf * sf / df.powi(7),
    };
    Ok(ParamSheet {
        cfg: cfg.clone(),
        log_n,
        t,
        sqrt_st,
        kappa,
        grid_step: step,
        top,
        grid,
        padded_in,
        block_out,
        shoup_blocks,
        masks,
        member_key,
        in_len,
        out_len,
        key_len,
        theorem_output,
    })
}

/// `log2 v` in floating point, for lengths far beyond `f64` integers.
pub fn big_log2(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 64 {
        return (v.to_u64().unwrap() as f64).log2();
    }
    let shift = bits - 64;
    ((v >> shift).to_u64().unwrap() as f64).log2() + shift as f64
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(IelError::Domain("a slope needs two points".into()));
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Slope of `log2(out_len)` against `log2 n` over a range of security parameters.
pub fn output_exponent(make: impl Fn(u64) -> Result<PipelineConfig>, ns: &[u64]) -> Result<f64> {
    let pts = ns
        .iter()
        .map(|&n| Ok((n as f64, big_log2(&calc_params(&make(n)?)?.out_len))))
        .collect::<Result<Vec<_>>>()?;
    fit_exponent(&pts)
}
