use iel_constructions::{member_outputs, HashTruncConstruction, LightThreshold};
use iel_core::{BitString, IelError, Result, Rng};
use iel_entropy::ratio;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::finder::CollisionFinder;

/// One run of the hashed-construction inverter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashInversion {
    pub candidate: BitString,
    pub success: bool,
}

/// Picks `x` and `i` uniformly, then `g'` uniform among members with
/// `g'(y)_{1..i} = g'(f(x))_{1..i}`, and returns the first component of the
/// finder's answer on `(x, g', i)`.
pub fn invert_hashtrunc(
    finder: &CollisionFinder,
    c: &HashTruncConstruction,
    y: &BitString,
    rng: &mut Rng,
) -> Result<HashInversion> {
    let n = c.n();
    if y.len() != n {
        return Err(IelError::Domain(format!("target of length {} for n = {n}", y.len())));
    }
    let x = rng.bits(n);
    let i = rng.index(n);
    let g = c.family().sample_equal_prefix(y, &c.f().eval(&x)?, i, rng)?;
    let (candidate, _, _) = c.decode(&finder.call(&c.encode(&x, &g, i), rng)?)?;
    let success = c.f().eval(&candidate)? == *y;
    Ok(HashInversion { candidate, success })
}

/// Exact success of the inverter with the optimal finder on `y = f(X)`, and
/// the escape probability `Pr[A_1(X, G, I) not in f^-1(tilde-L(f(X), I))]`.
#[derive(Clone, Debug)]
pub struct HashInversionExact {
    pub success: BigRational,
    pub escape: BigRational,
    /// Exponent `c` of the light threshold.
    pub c: BigRational,
}

impl HashInversionExact {
    /// `success >= escape / n^c`, decided on integers.
    pub fn bound_holds(&self, n: usize) -> bool {
        let (p, q) = (
            self.c.numer().to_u32().expect("small exponent") as usize,
            self.c.denom().to_u32().expect("small exponent") as usize,
        );
        // success^q * n^p >= escape^q
        let lhs = num_traits::pow(self.success.clone(), q) * BigRational::from_integer(num_traits::pow(BigInt::from(n), p));
        lhs >= num_traits::pow(self.escape.clone(), q)
    }
}

/// Sweeps the constant-free members of the family (see
/// [`HashTruncConstruction::quotient_members`]); `n <= 6`.
pub fn hashtrunc_inversion_exact(c: &HashTruncConstruction, cexp: &BigRational) -> Result<HashInversionExact> {
    let n = c.n();
    let counts = c.f().preimage_counts()?;
    let light: Vec<Vec<bool>> = (1..=n)
        .map(|i| LightThreshold::new(n, i, cexp).map(|th| counts.iter().map(|&k| th.admits(k)).collect()))
        .collect::<Result<_>>()?;
    let mut lcm = BigUint::from(1u8);
    for k in 1..=(1u64 << n) {
        lcm = lcm.lcm(&BigUint::from(k));
    }
    let members: Vec<Vec<u128>> = c.quotient_members()?.collect();
    let lcm = lcm
        .to_u128()
        .filter(|&l| l.checked_mul((members.len() as u128) << (2 * n + 4)).is_some())
        .ok_or_else(|| IelError::Capacity(format!("exact inversion sweep at n = {n}")))?;
    let images: Vec<usize> = (0..counts.len()).filter(|&y| counts[y] > 0).collect();
    let m = images.len();
    let spec = *c.family();
    let slots = n * m * m;

    // per (i, y0, y): sum over matching g of |f^-1(y)| / S in units of 1/lcm,
    // and the number of matching g; plus the escape numerator
    let (hit, matches, escape) = members
        .par_iter()
        .fold(
            || (vec![0u128; slots], vec![0u64; slots], 0u128),
            |(mut hit, mut matches, mut escape), coeffs| {
                let outs = member_outputs(&spec, coeffs, n);
                let mut all = vec![0u64; 1 << n];
                let mut lit = vec![0u64; 1 << n];
                for i in 1..=n {
                    let shift = n - i;
                    let lt = &light[i - 1];
                    all[..1 << i].fill(0);
                    lit[..1 << i].fill(0);
                    for &y in &images {
                        let p = (outs[y] >> shift) as usize;
                        all[p] += counts[y];
                        if lt[y] {
                            lit[p] += counts[y];
                        }
                    }
                    for (a, &y0) in images.iter().enumerate() {
                        let p0 = (outs[y0] >> shift) as usize;
                        let s = all[p0] as u128;
                        let unit = lcm / s;
                        let inside = lit[p0] + if lt[y0] { 0 } else { counts[y0] };
                        escape += counts[y0] as u128 * (s - inside as u128) * unit;
                        for (b, &y) in images.iter().enumerate() {
                            if (outs[y] >> shift) as usize == p0 {
                                let slot = ((i - 1) * m + a) * m + b;
                                hit[slot] += counts[y] as u128 * unit;
                                matches[slot] += 1;
                            }
                        }
                    }
                }
                (hit, matches, escape)
            },
        )
        .reduce(
            || (vec![0u128; slots], vec![0u64; slots], 0u128),
            |(mut h, mut k, e), (h2, k2, e2)| {
                h.iter_mut().zip(h2).for_each(|(u, v)| *u += v);
                k.iter_mut().zip(k2).for_each(|(u, v)| *u += v);
                (h, k, e + e2)
            },
        );

    let lcm_r = BigRational::from_integer(BigInt::from(lcm));
    let mut success = BigRational::zero();
    for i in 1..=n {
        for (a, &y0) in images.iter().enumerate() {
            for (b, &y) in images.iter().enumerate() {
                let slot = ((i - 1) * m + a) * m + b;
                if matches[slot] == 0 {
                    continue;
                }
                let given = BigRational::new(BigInt::from(hit[slot]), BigInt::from(matches[slot])) / &lcm_r;
                success += given * ratio(counts[y0] as u128 * counts[y] as u128, 1u128 << (2 * n));
            }
        }
    }
    success /= BigRational::from_integer(n.into());
    let escape = BigRational::new(BigInt::from(escape), BigInt::from(lcm) * BigInt::from(members.len()))
        / BigRational::from_integer(BigInt::from((n as u128) << n));
    Ok(HashInversionExact { success, escape, c: cexp.clone() })
}
