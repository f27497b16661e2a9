use std::collections::HashSet;

use iel_core::{BitString, Rng};
use iel_hashing::{
    twise_audit, twise_audit_exhaustive, twise_audit_statistical, Gf2w, HashFamilySpec, HashMember, WIDTHS,
};
use num_bigint::BigUint;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

// GF(2)[x] arithmetic on BigUint bit patterns, independent of the field code.

fn clmul(a: &BigUint, b: &BigUint) -> BigUint {
    let mut acc = BigUint::default();
    for k in 0..b.bits() {
        if b.bit(k) {
            acc ^= a << k;
        }
    }
    acc
}

fn poly_mod(a: &BigUint, p: &BigUint) -> BigUint {
    let mut r = a.clone();
    let dp = p.bits();
    while r.bits() >= dp {
        let shift = r.bits() - dp;
        r ^= p << shift;
    }
    r
}

fn poly_gcd(a: &BigUint, b: &BigUint) -> BigUint {
    let (mut a, mut b) = (a.clone(), b.clone());
    while b.bits() > 0 {
        let r = poly_mod(&a, &b);
        a = b;
        b = r;
    }
    a
}

fn modulus(f: &Gf2w) -> BigUint {
    (BigUint::from(1u8) << f.width()) ^ BigUint::from(f.reduction_low())
}

fn to_u128(v: &BigUint) -> u128 {
    v.iter_u64_digits().enumerate().fold(0u128, |acc, (k, d)| acc | (d as u128) << (64 * k))
}

#[test]
fn reduction_polynomials_are_irreducible() {
    // Rabin: P of degree w = 2^j is irreducible iff x^(2^w) = x mod P and gcd(x^(2^(w/2)) - x, P) = 1.
    for w in WIDTHS {
        let f = Gf2w::new(w).unwrap();
        let p = modulus(&f);
        let x = BigUint::from(2u8);
        let mut acc = x.clone();
        let mut half = None;
        for k in 1..=w {
            acc = poly_mod(&clmul(&acc, &acc), &p);
            if k == w / 2 {
                half = Some(acc.clone());
            }
        }
        assert_eq!(acc, x, "w={w}");
        let g = poly_gcd(&p, &(half.unwrap() ^ &x));
        assert_eq!(g, BigUint::from(1u8), "w={w}");
    }
}

#[test]
fn multiplication_matches_schoolbook_reduction() {
    let mut rng = Rng::new(17, 0);
    for w in WIDTHS {
        let f = Gf2w::new(w).unwrap();
        let p = modulus(&f);
        let spec = HashFamilySpec::with_width(2, 1, 1, false, w).unwrap();
        for _ in 0..200 {
            let a = spec.random_element(&mut rng);
            let b = spec.random_element(&mut rng);
            let want = to_u128(&poly_mod(&clmul(&BigUint::from(a), &BigUint::from(b)), &p));
            assert_eq!(f.mul(a, b), want, "w={w} a={a:x} b={b:x}");
        }
    }
}

#[test]
fn published_style_vector() {
    let f = Gf2w::new(8).unwrap();
    let p = modulus(&f);
    let oracle = to_u128(&poly_mod(&clmul(&BigUint::from(0x03u8), &BigUint::from(0x57u8)), &p)) ^ 0x01;
    assert_eq!(oracle, 0xF8);
    let spec = HashFamilySpec::new(2, 8, 8, false).unwrap();
    let g = HashMember::from_coeffs(spec, vec![0x03, 0x01]).unwrap();
    assert_eq!(g.evaluate(&BitString::from_u64(0x57, 8)).unwrap(), BitString::from_u64(0xF8, 8));
}

#[test]
fn same_rng_state_same_member() {
    let spec = HashFamilySpec::new(3, 20, 7, true).unwrap();
    assert_eq!(spec.sample(&mut Rng::new(3, 3)), spec.sample(&mut Rng::new(3, 3)));
}

#[test]
fn pairwise_collision_probability_is_exact() {
    for n in [2usize, 3] {
        let spec = HashFamilySpec::new(2, n, n, false).unwrap();
        let r = twise_audit_exhaustive(&spec, &|_| 1).unwrap();
        assert!(r.uniform);
        assert_eq!(r.total, 1 << 16);
        assert_eq!(r.min_collision, ((1u64 << 16) >> n, 1 << 16));
        assert_eq!(r.max_collision, r.min_collision);
    }
}

#[test]
fn three_wise_joint_outputs_are_uniform() {
    let spec = HashFamilySpec::new(3, 2, 2, false).unwrap();
    let r = twise_audit_exhaustive(&spec, &|_| 1).unwrap();
    assert_eq!(r.tuples, 4);
    assert!(r.uniform);
    assert_eq!(r.max_relative_deviation, 0.0);
}

#[test]
fn doubled_constant_member_is_flagged() {
    let spec = HashFamilySpec::new(2, 3, 3, false).unwrap();
    let r = twise_audit_exhaustive(&spec, &|g| if g.is_zero() { 2 } else { 1 }).unwrap();
    assert!(r.flagged);
    assert!(!r.uniform);
}

#[test]
fn statistical_mode() {
    let spec = HashFamilySpec::new(2, 16, 4, false).unwrap();
    let mut rng = Rng::new(8, 1);
    let honest = twise_audit(&spec, 50_000, 1e-3, &mut rng).unwrap();
    assert_eq!(honest.dof, 255);
    assert!(!honest.flagged, "p = {}", honest.p_value);
    let mut skewed = |r: &mut Rng| {
        if r.bit() && r.bit() {
            HashMember::from_coeffs(spec, vec![0, 0]).unwrap()
        } else {
            spec.sample(r)
        }
    };
    let bad = twise_audit_statistical(&spec, 50_000, 1e-3, &mut skewed, &mut rng).unwrap();
    assert!(bad.flagged);
}

#[test]
fn constrained_sampling_is_uniform_on_the_satisfying_set() {
    let spec = HashFamilySpec::new(2, 2, 2, false).unwrap();
    let x = BitString::from_u64(2, 2);
    let y = BitString::from_u64(1, 2);
    let satisfying: Vec<HashMember> =
        spec.members().unwrap().filter(|g| g.evaluate(&x).unwrap() == y).collect();
    assert_eq!(satisfying.len(), (1 << 16) / 4);
    let index: std::collections::HashMap<_, _> =
        satisfying.iter().enumerate().map(|(k, g)| (g.coeffs().to_vec(), k)).collect();
    let mut counts = vec![0u64; satisfying.len()];
    let mut rng = Rng::new(21, 0);
    let draws = 20 * satisfying.len();
    for _ in 0..draws {
        let g = spec.sample_constrained(&x, &y, &mut rng).unwrap();
        counts[index[g.coeffs()]] += 1;
    }
    let e = draws as f64 / counts.len() as f64;
    let chi: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let p = ChiSquared::new((counts.len() - 1) as f64).unwrap().sf(chi);
    assert!(p > 1e-4, "chi {chi} p {p}");
}

#[test]
fn two_point_satisfying_set_size() {
    let spec = HashFamilySpec::new(2, 2, 2, false).unwrap();
    let (x1, x2) = (BitString::from_u64(0, 2), BitString::from_u64(3, 2));
    for y1 in 0..4 {
        for y2 in 0..4 {
            let (b1, b2) = (BitString::from_u64(y1, 2), BitString::from_u64(y2, 2));
            let count = spec
                .members()
                .unwrap()
                .filter(|g| g.evaluate(&x1).unwrap() == b1 && g.evaluate(&x2).unwrap() == b2)
                .count();
            assert_eq!(count, (1 << 16) >> 4);
        }
    }
}

#[test]
fn variable_length_encoding_is_injective() {
    for in_len in 0..=10 {
        let spec = HashFamilySpec::new(2, in_len, 4, true).unwrap();
        let mut seen = HashSet::new();
        for len in 0..=in_len {
            for v in 0..1u64 << len {
                assert!(seen.insert(spec.encode_input(&BitString::from_u64(v, len)).unwrap()));
            }
        }
        assert_eq!(seen.len(), (1 << (in_len + 1)) - 1);
    }
}

proptest! {
    #[test]
    fn outputs_have_declared_length(t in 2usize..5, n in 0usize..100, m in 0usize..100, seed in any::<u64>()) {
        let spec = HashFamilySpec::new(t, n, m, false).unwrap();
        let mut rng = Rng::new(seed, 0);
        let g = spec.sample(&mut rng);
        let x = rng.bits(n);
        prop_assert_eq!(g.evaluate(&x).unwrap().len(), m);
    }

    #[test]
    fn prefix_constraint_holds(n in 1usize..60, m in 1usize..60, seed in any::<u64>(), i in 0usize..60) {
        let spec = HashFamilySpec::new(3, n, m, true).unwrap();
        let mut rng = Rng::new(seed, 1);
        let len = rng.below(n as u64 + 1) as usize;
        let x = rng.bits(len);
        let p = rng.bits(i.min(m));
        let g = spec.sample_prefix(&x, &p, &mut rng).unwrap();
        prop_assert_eq!(g.evaluate(&x).unwrap().prefix(p.len()).unwrap(), p);
    }
}
