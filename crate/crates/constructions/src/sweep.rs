use iel_core::{BitString, IelError, Result};
use iel_entropy::{ratio, LogSum};
use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::hashtrunc::{member_outputs, HashTruncConstruction, MAX_SWEEP_N};
use crate::light::LightThreshold;

/// Exact `E[log2 |F^-1(F(Z))|]` and `E[log2 |L(Z)|]` for uniform `Z = (x, g, i)`.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub n: usize,
    pub c: BigRational,
    pub real: LogSum,
    pub light: LogSum,
    /// `real - light`.
    pub gap: LogSum,
    /// `c * log2(n) / (64 n)`, for comparison only.
    pub reference: f64,
}

fn size_expectation(hist: &[u64], total: u128) -> LogSum {
    hist.iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(s, &k)| LogSum::log2(s as u128).scale(&ratio(BigUint::from(k), BigUint::from(total))))
        .sum()
}

/// Exact gap between the real entropy of the hashed construction's inverse and
/// the entropy of its `L` sets, by sweeping the whole family.
pub fn inaccessible_gap(c: &HashTruncConstruction, cexp: &BigRational) -> Result<GapReport> {
    let n = c.n();
    if n > MAX_SWEEP_N {
        return Err(IelError::Capacity(format!("gap sweep at n = {n}")));
    }
    let counts = c.f().preimage_counts()?;
    let light: Vec<Vec<bool>> = (1..=n)
        .map(|i| LightThreshold::new(n, i, cexp).map(|th| counts.iter().map(|&k| th.admits(k)).collect()))
        .collect::<Result<_>>()?;
    let members: Vec<Vec<u128>> = c.quotient_members()?.collect();
    let spec = *c.family();
    let size = (1usize << n) + 1;

    let (hist_f, hist_l) = members
        .par_iter()
        .fold(
            || (vec![0u64; size], vec![0u64; size], vec![0u64; 1 << n], vec![0u64; 1 << n]),
            |(mut hf, mut hl, mut all, mut lit), coeffs| {
                let outs = member_outputs(&spec, coeffs, n);
                for i in 1..=n {
                    let shift = n - i;
                    let lt = &light[i - 1];
                    let buckets = 1usize << i;
                    all[..buckets].fill(0);
                    lit[..buckets].fill(0);
                    for (y, &k) in counts.iter().enumerate() {
                        if k > 0 {
                            let p = (outs[y] >> shift) as usize;
                            all[p] += k;
                            if lt[y] {
                                lit[p] += k;
                            }
                        }
                    }
                    for (y, &k) in counts.iter().enumerate() {
                        if k > 0 {
                            let p = (outs[y] >> shift) as usize;
                            hf[all[p] as usize] += k;
                            let l = lit[p] + if lt[y] { 0 } else { k };
                            hl[l as usize] += k;
                        }
                    }
                }
                (hf, hl, all, lit)
            },
        )
        .map(|(hf, hl, _, _)| (hf, hl))
        .reduce(
            || (vec![0u64; size], vec![0u64; size]),
            |(mut a, mut b), (c2, d)| {
                a.iter_mut().zip(c2).for_each(|(u, v)| *u += v);
                b.iter_mut().zip(d).for_each(|(u, v)| *u += v);
                (a, b)
            },
        );

    let total = (members.len() as u128) * (n as u128) << n;
    let real = size_expectation(&hist_f, total);
    let light = size_expectation(&hist_l, total);
    let gap = &real - &light;
    let reference = cexp.to_f64().unwrap_or(f64::NAN) * (n as f64).log2() / (64.0 * n as f64);
    Ok(GapReport { n, c: cexp.clone(), real, light, gap, reference })
}

/// Outcome of the exhaustive sibling-hit check.
#[derive(Clone, Debug)]
pub struct SiblingHitReport {
    pub n: usize,
    /// Eligible `(f(x), f(x*), i)` tuples examined.
    pub tuples: u64,
    /// Smallest hit probability over eligible tuples.
    pub min_probability: Option<BigRational>,
    /// `2^-n / 8`.
    pub bound: BigRational,
    /// A tuple attaining the minimum, as `(f(x), f(x*), i)`.
    pub worst: Option<(BitString, BitString, usize)>,
    pub holds: bool,
}

/// For every pair of distinct images `y = f(x)`, `y* = f(x*)` and index `i`
/// with `i <= H(y*) <= H(y)`, where `H(v) = n - log2 |f^-1(v)|`, computes
/// `Pr_{g, z'}[z' = (x*, g, i)]` for `z'` uniform on `F^-1(F(x, g, i))`, and
/// checks it against `2^-n / 8`.
pub fn sibling_hit_bounds(c: &HashTruncConstruction) -> Result<SiblingHitReport> {
    let n = c.n();
    let counts = c.f().preimage_counts()?;
    // Every class size divides lcm(1..=2^n); keep sums as integer multiples of 1/lcm.
    let mut lcm = BigUint::from(1u8);
    for k in 1..=(1u64 << n) {
        lcm = lcm.lcm(&BigUint::from(k));
    }
    let lcm = lcm
        .to_u128()
        .filter(|&l| l.checked_mul(1u128 << 24).is_some())
        .ok_or_else(|| IelError::Capacity(format!("exact sibling sweep at n = {n}")))?;

    let images: Vec<usize> = (0..counts.len()).filter(|&y| counts[y] > 0).collect();
    let m = images.len();
    // eligibility: 2^i * |f^-1(y*)| <= 2^n and |f^-1(y)| <= |f^-1(y*)|
    let eligible = |a: usize, b: usize, i: usize| {
        let (ya, yb) = (images[a], images[b]);
        ya != yb && (counts[yb] << i) <= (1u64 << n) && counts[ya] <= counts[yb]
    };
    let tuples: u64 = (1..=n)
        .map(|i| (0..m).flat_map(|a| (0..m).map(move |b| (a, b))).filter(|&(a, b)| eligible(a, b, i)).count() as u64)
        .sum();

    let members: Vec<Vec<u128>> = c.quotient_members()?.collect();
    let spec = *c.family();
    let slots = n * m * m;
    let sums = members
        .par_iter()
        .fold(
            || vec![0u128; slots],
            |mut acc, coeffs| {
                let outs = member_outputs(&spec, coeffs, n);
                let mut class: Vec<u64> = vec![0; 1 << n];
                let mut groups: Vec<Vec<usize>> = vec![Vec::new(); 1 << n];
                for i in 1..=n {
                    let shift = n - i;
                    for g in groups.iter_mut().take(1 << i) {
                        g.clear();
                    }
                    class[..1 << i].fill(0);
                    for (a, &y) in images.iter().enumerate() {
                        let p = (outs[y] >> shift) as usize;
                        class[p] += counts[y];
                        groups[p].push(a);
                    }
                    for (p, group) in groups.iter().enumerate().take(1 << i) {
                        if group.len() < 2 {
                            continue;
                        }
                        let share = lcm / class[p] as u128;
                        for &a in group {
                            for &b in group {
                                if eligible(a, b, i) {
                                    acc[((i - 1) * m + a) * m + b] += share;
                                }
                            }
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u128; slots],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(u, v)| *u += v);
                a
            },
        );

    let family = members.len() as u128;
    let bound = ratio(1u8, BigUint::from(8u8) << n);
    let mut worst: Option<(u128, usize, usize, usize)> = None;
    for i in 1..=n {
        for a in 0..m {
            for b in 0..m {
                if eligible(a, b, i) {
                    let s = sums[((i - 1) * m + a) * m + b];
                    if worst.map(|w| s < w.0).unwrap_or(true) {
                        worst = Some((s, a, b, i));
                    }
                }
            }
        }
    }
    // probability = s / (lcm * |family|); compare s * 8 * 2^n >= lcm * |family|
    let holds = worst
        .map(|(s, ..)| BigUint::from(s) * (BigUint::from(8u8) << n) >= BigUint::from(lcm) * BigUint::from(family))
        .unwrap_or(true);
    Ok(SiblingHitReport {
        n,
        tuples,
        min_probability: worst.map(|(s, ..)| ratio(BigUint::from(s), BigUint::from(lcm) * BigUint::from(family))),
        bound,
        worst: worst.map(|(_, a, b, i)| {
            (BitString::from_u64(images[a] as u64, n), BitString::from_u64(images[b] as u64, n), i)
        }),
        holds,
    })
}
