use iel_core::{IelError, Result, Rng};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::distribution::Distribution;
use crate::logsum::LogSum;

/// Largest number of sample-entropy compositions enumerated in exact mode.
pub const MAX_COMPOSITIONS: u64 = 2_000_000;

#[derive(Clone, Debug)]
pub struct FlatteningReport {
    pub t: usize,
    pub epsilon: f64,
    /// `(1 - eps)`-quantile of `|H_{X^t}(x) - t H(X)|`.
    pub quantile: f64,
    /// The same quantile as an exact value (exact mode only).
    pub exact_quantile: Option<LogSum>,
    /// `sqrt(t log2(1/eps)) * log2 |U|` with `U` the support.
    pub envelope: f64,
    pub exact: bool,
}

impl FlatteningReport {
    pub fn ratio(&self) -> f64 {
        if self.envelope == 0.0 {
            0.0
        } else {
            self.quantile / self.envelope
        }
    }
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn envelope(d: &Distribution, t: usize, eps: f64) -> f64 {
    (t as f64 * (1.0 / eps).log2()).sqrt() * (d.len() as f64).log2()
}

/// Exact quantile by enumerating how many times each support point occurs
/// among the `t` draws (the sample entropy only depends on these counts).
pub fn flattening_deviation(d: &Distribution, t: usize, eps: &BigRational) -> Result<FlatteningReport> {
    let s = d.len();
    let comps = binom((t + s - 1) as u64, (s - 1) as u64);
    if comps > MAX_COMPOSITIONS {
        return Err(IelError::Capacity(format!("{comps} compositions of {t} into {s} parts")));
    }
    let ents: Vec<LogSum> = d.support().iter().map(|(x, _)| d.sample_entropy(x).unwrap()).collect();
    let probs: Vec<BigRational> = d.support().iter().map(|(_, p)| p.clone()).collect();
    let h = d.report().shannon;
    let th = h.scale(&BigRational::from_integer(t.into()));

    let mut fact = vec![BigInt::one()];
    for k in 1..=t {
        let next = &fact[k - 1] * BigInt::from(k);
        fact.push(next);
    }
    let mut outcomes: Vec<(LogSum, f64, BigRational)> = Vec::with_capacity(comps as usize);
    let mut counts = vec![0usize; s];
    enumerate(&mut counts, 0, t, &mut |c| {
        let mut p = BigRational::from_integer(fact[t].clone());
        let mut sample = LogSum::zero();
        for j in 0..s {
            if c[j] > 0 {
                p = p / BigRational::from_integer(fact[c[j]].clone()) * num_traits::pow(probs[j].clone(), c[j]);
                sample = &sample + &ents[j].scale(&BigRational::from_integer(c[j].into()));
            }
        }
        let dev = &sample - &th;
        let dev = if dev.signum() < 0 { -&dev } else { dev };
        let v = dev.to_f64();
        outcomes.push((dev, v, p));
    });
    outcomes.sort_by(|a, b| a.0.cmp_value(&b.0));
    let target = BigRational::one() - eps;
    let mut acc = BigRational::zero();
    let mut q = None;
    for (dev, v, p) in &outcomes {
        acc += p;
        if acc >= target {
            q = Some((dev.clone(), *v));
            break;
        }
    }
    let (exact_q, qv) = q.unwrap_or_else(|| {
        let last = outcomes.last().unwrap();
        (last.0.clone(), last.1)
    });
    Ok(FlatteningReport {
        t,
        epsilon: eps.to_f64().unwrap_or(f64::NAN),
        quantile: qv,
        exact_quantile: Some(exact_q),
        envelope: envelope(d, t, eps.to_f64().unwrap_or(f64::NAN)),
        exact: true,
    })
}

fn enumerate(counts: &mut Vec<usize>, j: usize, left: usize, visit: &mut dyn FnMut(&[usize])) {
    if j + 1 == counts.len() {
        counts[j] = left;
        visit(counts);
        return;
    }
    for c in 0..=left {
        counts[j] = c;
        enumerate(counts, j + 1, left - c, visit);
    }
}

/// Monte Carlo estimate from `samples` draws of `X^t`.
pub fn flattening_deviation_mc(
    d: &Distribution,
    t: usize,
    eps: f64,
    samples: usize,
    rng: &mut Rng,
) -> Result<FlatteningReport> {
    if samples < 100_000 {
        return Err(IelError::Config(format!("Monte Carlo mode needs at least 1e5 samples, got {samples}")));
    }
    let ents: Vec<f64> = d.support().iter().map(|(x, _)| d.sample_entropy(x).unwrap().to_f64()).collect();
    let cdf: Vec<f64> = d
        .support()
        .iter()
        .scan(0.0, |acc, (_, p)| {
            *acc += p.to_f64().unwrap_or(0.0);
            Some(*acc)
        })
        .collect();
    let th = d.report().shannon.to_f64() * t as f64;
    let mut devs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut sum = 0.0;
        for _ in 0..t {
            let u = rng.unit();
            let j = cdf.partition_point(|&c| c <= u).min(ents.len() - 1);
            sum += ents[j];
        }
        devs.push((sum - th).abs());
    }
    devs.sort_by(|a, b| a.total_cmp(b));
    let idx = (((1.0 - eps) * samples as f64).ceil() as usize).clamp(1, samples) - 1;
    Ok(FlatteningReport {
        t,
        epsilon: eps,
        quantile: devs[idx],
        exact_quantile: None,
        envelope: envelope(d, t, eps),
        exact: false,
    })
}
