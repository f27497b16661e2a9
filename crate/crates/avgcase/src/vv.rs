use std::collections::BTreeSet;

use iel_core::{BitString, IelError, Result, Rng};
use iel_entropy::ratio;
use iel_hashing::HashFamilySpec;
use num_rational::BigRational;
use rayon::prelude::*;

/// How isolation probabilities are obtained.
#[derive(Clone, Copy, Debug)]
pub enum IsolationMode {
    /// Every member of the family.
    Exhaustive,
    /// Independent members drawn from `Rng::new(seed, stream)`.
    Sampled { trials: u64, seed: u64 },
}

/// Per element of `S`, the probability that it is the only element hashed to `0^(k+2)`.
#[derive(Clone, Debug)]
pub struct IsolationReport {
    pub k: usize,
    pub set_size: usize,
    pub members: u64,
    pub per_element: Vec<(BitString, BigRational)>,
    pub min: BigRational,
    /// `2^-(k+3)`.
    pub bound: BigRational,
    /// Probability that exactly one element is isolated.
    pub unique: BigRational,
}

impl IsolationReport {
    pub fn holds(&self) -> bool {
        self.min >= self.bound
    }
}

/// Isolation probabilities under a pairwise family `{0,1}^len -> {0,1}^(k+2)`.
pub fn vv_isolation_probability(set: &BTreeSet<BitString>, k: usize, mode: IsolationMode) -> Result<IsolationReport> {
    let size = set.len();
    if k >= 32 || size < 1 << k || size > 2 << k {
        return Err(IelError::Domain(format!("|S| = {size} is outside [2^{k}, 2^{}]", k + 1)));
    }
    let len = set.iter().next().unwrap().len();
    if set.iter().any(|s| s.len() != len) {
        return Err(IelError::Domain("elements of S differ in length".into()));
    }
    let spec = HashFamilySpec::new(2, len, k + 2, false)?;
    let encoded: Vec<u128> = set.iter().map(|s| spec.encode_input(s)).collect::<Result<_>>()?;
    let count = |g: &iel_hashing::HashMember, hits: &mut Vec<u64>| {
        let zeros: Vec<usize> = (0..encoded.len()).filter(|&j| g.eval_encoded(encoded[j]) == 0).collect();
        if zeros.len() == 1 {
            hits[zeros[0]] += 1;
        }
    };
    let (hits, members) = match mode {
        IsolationMode::Exhaustive => {
            let members: Vec<_> = spec.members()?.collect();
            let hits = members
                .par_iter()
                .fold(|| vec![0u64; size], |mut h, g| {
                    count(g, &mut h);
                    h
                })
                .reduce(|| vec![0u64; size], |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(u, v)| *u += v);
                    a
                });
            (hits, members.len() as u64)
        }
        IsolationMode::Sampled { trials, seed } => {
            let mut rng = Rng::new(seed, 0);
            let mut hits = vec![0u64; size];
            for _ in 0..trials {
                count(&spec.sample(&mut rng), &mut hits);
            }
            (hits, trials)
        }
    };
    let per_element: Vec<(BitString, BigRational)> =
        set.iter().cloned().zip(hits.iter().map(|&h| ratio(h, members))).collect();
    let min = per_element.iter().map(|(_, p)| p.clone()).min().unwrap();
    Ok(IsolationReport {
        k,
        set_size: size,
        members,
        min,
        bound: ratio(1u32, 1u64 << (k + 3)),
        unique: ratio(hits.iter().sum::<u64>(), members),
        per_element,
    })
}
