use iel_core::{BitString, IelError, Result, Rng};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::family::{HashFamilySpec, HashMember};

/// Largest `t * out_len` for which joint output cells are tabulated.
pub const MAX_JOINT_BITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMode {
    Exhaustive,
    Statistical,
}

#[derive(Clone, Debug, Serialize)]
pub struct TwiseReport {
    pub mode: AuditMode,
    pub t: usize,
    pub tuples: u64,
    /// Total weight (exhaustive) or number of sampled members (statistical).
    pub total: u64,
    /// Every joint cell has mass exactly `2^-(t*m)` (exhaustive only).
    pub uniform: bool,
    /// Largest `|cell mass * 2^(t*m) - 1|` over all tuples and cells.
    pub max_relative_deviation: f64,
    /// Extreme pairwise collision probabilities as `(numerator, denominator)`.
    pub min_collision: (u64, u64),
    pub max_collision: (u64, u64),
    pub chi_square: f64,
    pub dof: u64,
    pub p_value: f64,
    pub flagged: bool,
}

fn combinations(n: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..t).collect();
    if t > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut k = t;
        while k > 0 && cur[k - 1] == n - t + k - 1 {
            k -= 1;
        }
        if k == 0 {
            return out;
        }
        cur[k - 1] += 1;
        for j in k..t {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn encoded_domain(spec: &HashFamilySpec) -> Result<Vec<u128>> {
    let mut xs = Vec::new();
    if spec.variable_length {
        for len in 0..=spec.in_len {
            for v in 0..1u64 << len {
                xs.push(spec.encode_input(&BitString::from_u64(v, len))?);
            }
        }
    } else {
        for v in 0..1u64 << spec.in_len {
            xs.push(spec.encode_input(&BitString::from_u64(v, spec.in_len))?);
        }
    }
    Ok(xs)
}

/// Exact audit over every member, each counted with the given weight.
pub fn twise_audit_exhaustive(spec: &HashFamilySpec, weight: &dyn Fn(&HashMember) -> u64) -> Result<TwiseReport> {
    if spec.in_len > 12 {
        return Err(IelError::Capacity(format!("exhaustive audit needs in_len <= 12, got {}", spec.in_len)));
    }
    let t = spec.t;
    let m = spec.out_len;
    if t * m > MAX_JOINT_BITS {
        return Err(IelError::Capacity(format!("{}-bit joint outputs are too many cells", t * m)));
    }
    let xs = encoded_domain(spec)?;
    let tuples = combinations(xs.len(), t);
    let pairs = combinations(xs.len(), 2);
    let work = (tuples.len() as u128 + xs.len() as u128) << spec.description_len();
    if work > 1u128 << 34 {
        return Err(IelError::Capacity("exhaustive audit too large".into()));
    }
    let cells = 1usize << (t * m);
    let mut counts = vec![0u64; tuples.len() * cells];
    let mut collisions = vec![0u64; pairs.len()];
    let mut total = 0u64;
    let mut out = vec![0u128; xs.len()];
    for g in spec.members()? {
        let wgt = weight(&g);
        if wgt == 0 {
            continue;
        }
        total += wgt;
        for (o, &x) in out.iter_mut().zip(&xs) {
            *o = g.eval_encoded(x);
        }
        for (k, tup) in tuples.iter().enumerate() {
            let cell = tup.iter().fold(0usize, |acc, &j| (acc << m) | out[j] as usize);
            counts[k * cells + cell] += wgt;
        }
        for (k, p) in pairs.iter().enumerate() {
            if out[p[0]] == out[p[1]] {
                collisions[k] += wgt;
            }
        }
    }
    let mut uniform = true;
    let mut dev = 0f64;
    for &c in &counts {
        let scaled = c as u128 * cells as u128;
        if scaled != total as u128 {
            uniform = false;
        }
        dev = dev.max((scaled as f64 / total as f64 - 1.0).abs());
    }
    let min_c = collisions.iter().copied().min().unwrap_or(0);
    let max_c = collisions.iter().copied().max().unwrap_or(0);
    Ok(TwiseReport {
        mode: AuditMode::Exhaustive,
        t,
        tuples: tuples.len() as u64,
        total,
        uniform,
        max_relative_deviation: dev,
        min_collision: (min_c, total),
        max_collision: (max_c, total),
        chi_square: 0.0,
        dof: (cells - 1) as u64,
        p_value: if uniform { 1.0 } else { 0.0 },
        flagged: !uniform,
    })
}

/// Chi-square test of the joint output of one random distinct t-tuple over
/// `samples` members drawn by `draw`.
pub fn twise_audit_statistical(
    spec: &HashFamilySpec,
    samples: usize,
    alpha: f64,
    draw: &mut dyn FnMut(&mut Rng) -> HashMember,
    rng: &mut Rng,
) -> Result<TwiseReport> {
    let t = spec.t;
    let m = spec.out_len;
    if t * m > MAX_JOINT_BITS {
        return Err(IelError::Capacity(format!("{}-bit joint outputs are too many cells", t * m)));
    }
    if spec.in_len < 64 && (1u64 << spec.in_len) < t as u64 {
        return Err(IelError::Domain("fewer inputs than the independence degree".into()));
    }
    let mut xs: Vec<BitString> = Vec::with_capacity(t);
    while xs.len() < t {
        let x = rng.bits(spec.in_len);
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    let enc: Vec<u128> = xs.iter().map(|x| spec.encode_input(x)).collect::<Result<_>>()?;
    let cells = 1usize << (t * m);
    let mut counts = vec![0u64; cells];
    let mut coll = 0u64;
    for _ in 0..samples {
        let g = draw(rng);
        let outs: Vec<u128> = enc.iter().map(|&x| g.eval_encoded(x)).collect();
        let cell = outs.iter().fold(0usize, |acc, &o| (acc << m) | o as usize);
        counts[cell] += 1;
        if outs[0] == outs[1] {
            coll += 1;
        }
    }
    let expected = samples as f64 / cells as f64;
    let chi: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dof = (cells - 1) as u64;
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).map_err(|e| IelError::Config(e.to_string()))?.sf(chi)
    };
    let dev = counts.iter().map(|&c| (c as f64 / expected - 1.0).abs()).fold(0.0, f64::max);
    Ok(TwiseReport {
        mode: AuditMode::Statistical,
        t,
        tuples: 1,
        total: samples as u64,
        uniform: false,
        max_relative_deviation: dev,
        min_collision: (coll, samples as u64),
        max_collision: (coll, samples as u64),
        chi_square: chi,
        dof,
        p_value,
        flagged: p_value < alpha,
    })
}

/// Statistical audit of the honest sampler.
pub fn twise_audit(spec: &HashFamilySpec, samples: usize, alpha: f64, rng: &mut Rng) -> Result<TwiseReport> {
    let s = *spec;
    twise_audit_statistical(spec, samples, alpha, &mut |r| s.sample(r), rng)
}

#[cfg(test)]
mod tests {
    use super::combinations;

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(8, 3).len(), 56);
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert!(combinations(2, 3).is_empty());
    }
}
