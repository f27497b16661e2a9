use std::collections::BTreeSet;

use iel_core::{BitString, IelError, Result};
use iel_entropy::{rational_string, ratio, LogSum};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::finder::{law_entropy, CollisionFinder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditMode {
    /// Every domain element, exact laws.
    Exact,
    /// A sampled population of inputs, exact laws per input.
    MonteCarlo,
}

impl AuditMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AuditMode::Exact => "exact",
            AuditMode::MonteCarlo => "mc",
        }
    }
}

/// What an audit measured about one finder.
#[derive(Clone, Debug)]
pub struct AccessAudit {
    pub finder: String,
    pub target: String,
    pub mode: AuditMode,
    pub seed: u64,
    /// `H(A(Z) | Z)` averaged over the population, exactly.
    pub shannon: Option<LogSum>,
    /// Standard error of the mean in Monte Carlo mode.
    pub shannon_stderr: Option<f64>,
    /// `Pr[A(Z) not in L(Z)]`.
    pub p: Option<BigRational>,
    /// `max log2 |L(z)|`.
    pub k_max: Option<LogSum>,
    /// `E[log2 |L(Z)|]`.
    pub k_avg: Option<LogSum>,
    /// Finder queries spent by the audit.
    pub calls: u64,
    pub violations: u64,
}

impl AccessAudit {
    fn new(finder: &CollisionFinder, mode: AuditMode, seed: u64) -> Self {
        AccessAudit {
            finder: finder.label(),
            target: finder.target().label(),
            mode,
            seed,
            shannon: None,
            shannon_stderr: None,
            p: None,
            k_max: None,
            k_avg: None,
            calls: 0,
            violations: 0,
        }
    }

    pub fn to_json(&self) -> Value {
        let text = |v: &Option<LogSum>| v.as_ref().map(|s| Value::String(s.to_string())).unwrap_or(Value::Null);
        json!({
            "finder": self.finder,
            "F": self.target,
            "shannon": text(&self.shannon),
            "p": self.p.as_ref().map(|p| Value::String(rational_string(p))).unwrap_or(Value::Null),
            "k_max": text(&self.k_max),
            "k_avg": text(&self.k_avg),
            "calls": self.calls,
            "mode": self.mode.as_str(),
            "seed": self.seed,
        })
    }
}

fn population(finder: &CollisionFinder, given: Option<&[BitString]>) -> Result<(Vec<BitString>, AuditMode)> {
    match given {
        Some(p) if !p.is_empty() => Ok((p.to_vec(), AuditMode::MonteCarlo)),
        Some(_) => Err(IelError::Domain("empty population".into())),
        None => finder
            .target()
            .enumerate()
            .map(|d| (d, AuditMode::Exact))
            .ok_or_else(|| IelError::Capacity(format!("{} cannot be enumerated", finder.target().label()))),
    }
}

/// `H(A(Z) | Z)` for `Z` uniform on the domain (`sample = None`) or on a
/// supplied sample of inputs.
pub fn audit_shannon(finder: &CollisionFinder, sample: Option<&[BitString]>, seed: u64) -> Result<AccessAudit> {
    let (pop, mode) = population(finder, sample)?;
    let before = (finder.calls(), finder.violations());
    let w = ratio(1, pop.len() as i64);
    let mut total = LogSum::zero();
    let mut values = Vec::with_capacity(pop.len());
    for z in &pop {
        let h = law_entropy(&finder.law(z)?);
        values.push(h.to_f64());
        total = total + h.scale(&w);
    }
    let mut out = AccessAudit::new(finder, mode, seed);
    if mode == AuditMode::MonteCarlo {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
        out.shannon_stderr = Some((var / k).sqrt());
    }
    out.shannon = Some(total);
    out.calls = finder.calls() - before.0;
    out.violations = finder.violations() - before.1;
    Ok(out)
}

/// `p = Pr[A(Z) not in L(Z)]`, `k_max = max log2 |L(z)|`, `k_avg = E log2 |L(Z)|`
/// for an explicit family of sets. Every `L(z)` must contain `z`.
pub fn audit_max(
    finder: &CollisionFinder,
    family: &dyn Fn(&BitString) -> Result<BTreeSet<BitString>>,
    sample: Option<&[BitString]>,
    seed: u64,
) -> Result<AccessAudit> {
    let (pop, mode) = population(finder, sample)?;
    let before = (finder.calls(), finder.violations());
    let w = ratio(1, pop.len() as i64);
    let mut p = BigRational::zero();
    let mut k_avg = LogSum::zero();
    let mut largest = 0usize;
    for z in &pop {
        let l = family(z)?;
        if !l.contains(z) {
            return Err(IelError::Contract(format!("L({z}) does not contain {z}")));
        }
        largest = largest.max(l.len());
        k_avg = k_avg + LogSum::log2(l.len() as u64).scale(&w);
        let outside: BigRational = finder.law(z)?.into_iter().filter(|(x, _)| !l.contains(x)).map(|(_, q)| q).sum();
        p += outside * &w;
    }
    let mut out = AccessAudit::new(finder, mode, seed);
    out.p = Some(p);
    out.k_max = Some(LogSum::log2(largest as u64));
    out.k_avg = Some(k_avg);
    out.calls = finder.calls() - before.0;
    out.violations = finder.violations() - before.1;
    Ok(out)
}

/// `k / p + 2^(-k / p)`: a `p`-accessible max-entropy bound from an accessible
/// Shannon entropy bound `k`, with the lower-order constant fixed to 1.
pub fn shannon_to_pmax(k: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(IelError::Domain(format!("probability {p} outside (0, 1)")));
    }
    if k < 0.0 {
        return Err(IelError::Domain(format!("negative entropy bound {k}")));
    }
    Ok(k / p + (-k / p).exp2())
}

/// `L(z) = {z} ∪ {x' : Pr[A(z) = x'] >= 2^(-k/p)}`.
pub fn pmax_set(finder: &CollisionFinder, z: &BitString, k: f64, p: f64) -> Result<BTreeSet<BitString>> {
    shannon_to_pmax(k, p)?;
    let threshold = (-k / p).exp2();
    let mut out: BTreeSet<BitString> = finder
        .law(z)?
        .into_iter()
        .filter(|(_, q)| q.to_f64().unwrap_or(0.0) >= threshold)
        .map(|(x, _)| x)
        .collect();
    out.insert(z.clone());
    Ok(out)
}

/// Largest `eps = 2^-j` for which the lazy finder stays within `slack` of the
/// optimal finder's Shannon entropy, searching `j` up to `max_j`.
pub fn calibrate_lazy(
    target: std::sync::Arc<dyn crate::Target>,
    slack: &BigRational,
    max_j: u32,
) -> Result<(BigRational, LogSum)> {
    let optimal = audit_shannon(&CollisionFinder::optimal(target.clone()), None, 0)?.shannon.unwrap();
    let floor = &optimal - &LogSum::rational(slack.clone());
    for j in 1..=max_j {
        let eps = ratio(1, num_bigint::BigInt::from(1u8) << j);
        let lazy = CollisionFinder::new(target.clone(), std::sync::Arc::new(crate::Lazy::new(eps.clone())?));
        let h = audit_shannon(&lazy, None, 0)?.shannon.unwrap();
        if floor.le(&h) {
            return Ok((eps, h));
        }
    }
    Err(IelError::Infeasible(format!("no laziness 2^-j with j <= {max_j} meets the slack")))
}
