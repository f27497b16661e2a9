use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use iel_core::{BitFunction, BitString, FiniteFunction, Rng};
use iel_entropy::{ratio, ClassHistogram, LogSum};
use iel_hashing::{PairwiseFamily, PolyPairwise, ToeplitzFamily};
use iel_pipeline::*;
use iel_reductions::{audit_max, audit_shannon, function_target, CollisionFinder, Identity, Optimal};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn toy_avgmax() -> PipelineConfig {
    PipelineConfig::new(PathKind::AvgMax, 4, 4, 4, ratio(4, 1), 1).unwrap()
}

fn random_fn(n: usize, m: usize, seed: u64) -> FiniteFunction {
    FiniteFunction::random_function(n, m, &mut Rng::new(seed, 0)).unwrap()
}

/// Keyed table family `F_k(u) = T[u xor k]` on `L + b` bits.
fn table_base(l: usize, b: usize, seed: u64) -> Arc<dyn KeyedFamily> {
    let t = random_fn(l + b, l, seed);
    Arc::new(KeyedFn {
        key_len: l + b,
        in_len: l + b,
        out_len: l,
        label: "table".into(),
        f: move |k: &BitString, u: &BitString| t.apply(&k.xor(u).unwrap()),
    })
}

/// Two distinct inputs with equal output, by birthday search.
fn birthday(fam: &dyn KeyedFamily, key: &BitString, rng: &mut Rng) -> (BitString, BitString) {
    let mut seen: HashMap<BitString, BitString> = HashMap::new();
    loop {
        let x = rng.bits(fam.in_len());
        let y = fam.eval(key, &x).unwrap();
        match seen.get(&y) {
            Some(prev) if *prev != x => return (prev.clone(), x),
            _ => {
                seen.insert(y, x);
            }
        }
    }
}

#[test]
fn calculator_is_pure() {
    for cfg in [
        toy_avgmax(),
        PipelineConfig::avg_max_for_owf(64).unwrap(),
        PipelineConfig::shannon_for_owf(16).unwrap(),
    ] {
        let a = serde_json::to_vec(&calc_params(&cfg).unwrap().to_json()).unwrap();
        let b = serde_json::to_vec(&calc_params(&cfg.clone()).unwrap().to_json()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn config_json_round_trip() {
    let cfg = PipelineConfig::shannon_for_owf(32).unwrap().with_k_real(3.5);
    assert_eq!(PipelineConfig::from_json(&cfg.to_json()).unwrap(), cfg);
}

#[test]
fn doubling_the_gap_lowers_t() {
    for path in [PathKind::AvgMax, PathKind::Shannon] {
        for (n0, num, den) in [(8u64, 1u64, 2u64), (20, 1, 8), (40, 3, 4)] {
            let d = ratio(num, den);
            let a = calc_params(&PipelineConfig::new(path, 16, n0, n0, d.clone(), 4).unwrap()).unwrap();
            let b = calc_params(&PipelineConfig::new(path, 16, n0, n0, d * ratio(2, 1), 4).unwrap()).unwrap();
            assert!(b.t < a.t, "{path} n0={n0}: {} !< {}", b.t, a.t);
        }
    }
}

#[test]
fn t_is_least_for_the_amplification_inequality() {
    let cfg = PipelineConfig::avg_max_for_owf(16).unwrap();
    let sheet = calc_params(&cfg).unwrap();
    let ok = |t: u64| {
        let r = ceil_sqrt(&big(cfg.s * t));
        t > cfg.s
            && BigRational::from_integer(t.into()) * &cfg.delta / BigRational::from_integer(2.into())
                >= BigRational::from_integer((big(2 * cfg.n0) * r + big(3 * cfg.s)).into())
    };
    let t = sheet.t.to_u64().unwrap();
    assert!(ok(t));
    assert!(!ok(t - 1));
    assert_eq!(sheet.sqrt_st, ceil_sqrt(&big(cfg.s * t)));
}

#[test]
fn grid_step_and_size() {
    let cfg = PipelineConfig::new(PathKind::AvgMax, 16, 10, 10, ratio(3, 4), 4).unwrap();
    let sheet = calc_params(&cfg).unwrap();
    assert_eq!(sheet.grid_step, ratio(3, 8));
    // ceil(2 * 10 / (3/4)) = ceil(26.67)
    assert_eq!(sheet.kappa, big(27));
    let grid = sheet.grid.as_ref().unwrap();
    assert_eq!(grid.len(), 27);
    assert_eq!(grid[0].k, ratio(3, 8));
    assert_eq!(grid.last().unwrap().k, ratio(81, 8));

    let cfg = PipelineConfig::new(PathKind::Shannon, 16, 8, 8, ratio(1, 2), 4).unwrap();
    let sheet = calc_params(&cfg).unwrap();
    // Delta^2 / (128 n0) = (1/4) / 1024
    assert_eq!(sheet.grid_step, ratio(1, 4096));
    assert_eq!(sheet.kappa, big(8 * 4096));
    assert!(sheet.grid.is_none());
    assert_eq!(sheet.top.k, ratio(8, 1));
}

#[test]
fn grid_points_follow_the_closed_forms() {
    let cfg = PipelineConfig::new(PathKind::Shannon, 8, 4, 4, ratio(4, 1), 1).unwrap();
    let sheet = calc_params(&cfg).unwrap();
    let t = BigRational::from_integer(sheet.t.clone().into());
    let r = BigRational::from_integer(sheet.sqrt_st.clone().into());
    let d = &cfg.delta;
    for p in sheet.grid.as_ref().unwrap() {
        let ell = (&t * &p.k - &t * d / ratio(2, 1) + ratio(1, 1)).ceil().max(BigRational::zero());
        assert_eq!(BigRational::from_integer(p.ell.clone().into()), ell);
        let q = d / (ratio(4, 1) * &p.k);
        assert_eq!(p.q.as_ref().unwrap(), &q);
        let tp = (ratio(1, 1) / &q).ceil().max(BigRational::one());
        assert_eq!(BigRational::from_integer(p.t_prime.clone().unwrap().into()), tp);
        let inner = &t * (d / ratio(2, 1) - d * &q / ratio(16, 1)) + ratio(4, 1) * &r + ratio(1, 1);
        let ell2 = (tp * inner + ratio(1, 1)).ceil().max(BigRational::zero());
        assert_eq!(BigRational::from_integer(p.ell2.clone().unwrap().into()), ell2);
    }
}

#[test]
fn toeplitz_key_matches_calculator() {
    for (i, o) in [(1usize, 1usize), (7, 3), (64, 64), (100, 1), (5, 0), (33, 17)] {
        assert_eq!(big(ToeplitzFamily::new(i, o).key_len() as u64), pairwise_key_len(&big(i as u64), &big(o as u64)));
    }
}

#[test]
fn shoup_key_length() {
    for blocks in 1..=40usize {
        let ext = shoup_extend(table_base(6, 2, 1), blocks).unwrap();
        let masks = (blocks as f64).log2().floor() as usize + 1;
        assert_eq!(ext.key_len(), 8 + masks * 6, "blocks {blocks}");
        assert_eq!(ext.in_len(), 6 + 2 * blocks);
        assert_eq!(ext.out_len(), 6);
    }
}

#[test]
fn shoup_single_block_is_one_application() {
    let base = table_base(6, 2, 2);
    let ext = shoup_extend(base.clone(), 1).unwrap();
    let mut rng = Rng::new(2, 1);
    for _ in 0..50 {
        let key = ext.sample_key(&mut rng);
        let x = rng.bits(8);
        let (bk, mask) = (key.slice(0, 8).unwrap(), key.slice(8, 14).unwrap());
        let u = x.slice(0, 6).unwrap().xor(&mask).unwrap().concat(&x.slice(6, 8).unwrap());
        assert_eq!(ext.eval(&key, &x).unwrap(), base.eval(&bk, &u).unwrap());
    }
}

#[test]
fn shoup_transport_on_planted_collisions() {
    let mut rng = Rng::new(77, 0);
    let mut verified = 0;
    for trial in 0..100u64 {
        let ext = shoup_extend(table_base(6, 2, 1000 + trial), 1 + (trial as usize % 12)).unwrap();
        let key = ext.sample_key(&mut rng);
        let (x0, x1) = birthday(&ext, &key, &mut rng);
        let c = ext.base_collision(&key, &x0, &x1).unwrap().expect("colliding pair");
        let bk = key.slice(0, ext.base().key_len()).unwrap();
        assert_ne!(c.u0, c.u1);
        assert_eq!(ext.base().eval(&bk, &c.u0).unwrap(), ext.base().eval(&bk, &c.u1).unwrap());
        verified += 1;
    }
    assert_eq!(verified, 100);
}

#[test]
fn shoup_ignores_non_collisions() {
    let ext = shoup_extend(table_base(6, 2, 5), 6).unwrap();
    let mut rng = Rng::new(5, 0);
    let key = ext.sample_key(&mut rng);
    let x = rng.bits(ext.in_len());
    assert!(ext.base_collision(&key, &x, &x).unwrap().is_none());
    let y = loop {
        let y = rng.bits(ext.in_len());
        if ext.eval(&key, &y).unwrap() != ext.eval(&key, &x).unwrap() {
            break y;
        }
    };
    assert!(ext.base_collision(&key, &x, &y).unwrap().is_none());
}

#[test]
fn concatenation_collision_hits_every_member() {
    let members: Vec<Arc<dyn KeyedFamily>> =
        (0..3).map(|j| Arc::new(shoup_extend(table_base(3, 2, 40 + j), 4).unwrap()) as Arc<dyn KeyedFamily>).collect();
    let concat = concat_families(members).unwrap();
    assert_eq!(concat.out_len(), 9);
    assert_eq!(concat.in_len(), 11);
    let mut rng = Rng::new(9, 0);
    for _ in 0..20 {
        let key = concat.sample_key(&mut rng);
        let (x0, x1) = birthday(&concat, &key, &mut rng);
        for (j, m) in concat.members().iter().enumerate() {
            let mk = concat.member_key(&key, j).unwrap();
            let (y0, y1) = (m.eval(&mk, &x0).unwrap(), m.eval(&mk, &x1).unwrap());
            assert_eq!(y0, y1);
            assert_eq!(concat.member_output(&concat.eval(&key, &x0).unwrap(), j).unwrap(), y0);
        }
    }
}

#[test]
fn shift_by_zero_is_f_and_transport_is_a_collision() {
    let f = random_fn(6, 4, 11);
    let shift = random_shift(Arc::new(Base(f.clone())));
    assert_eq!(shift.key_len(), 6);
    let zero = BitString::zeros(6);
    for x in 0..64 {
        let xb = BitString::from_u64(x, 6);
        assert_eq!(shift.eval(&zero, &xb).unwrap(), f.apply(&xb));
    }
    let mut rng = Rng::new(11, 1);
    for _ in 0..50 {
        let y = rng.bits(6);
        let (x0, x1) = birthday(&shift, &y, &mut rng);
        let (a, b) = shift.transport(&y, &x0, &x1).unwrap();
        assert_ne!(a, b);
        assert_eq!(f.apply(&a), f.apply(&b));
    }
}

#[test]
fn shift_game_matches_prediction() {
    for seed in 0..3 {
        let f = random_fn(6, 5, 300 + seed);
        let r = shift_game(&f).unwrap();
        assert_eq!(r.best, r.predicted);
        assert_eq!(r.worst, r.predicted);
    }
    let r = shift_game(&FiniteFunction::identity(6).unwrap()).unwrap();
    assert!(r.best.is_zero());
}

#[test]
fn entropy_reduction_with_empty_hash_keeps_entropy() {
    let f = random_fn(4, 4, 12);
    let red = reduce_entropy(Arc::new(Base(f.clone())), Arc::new(ToeplitzFamily::new(4, 0))).unwrap();
    assert_eq!(red.input_len(), 4);
    let g = tabulate(&red).unwrap();
    assert_eq!(
        ClassHistogram::from_function(&g).unwrap().shannon(),
        ClassHistogram::from_function(&f).unwrap().shannon()
    );
}

#[test]
fn output_reduction_lengths() {
    let f = random_fn(6, 6, 13);
    let fam = Arc::new(ToeplitzFamily::new(6, 4));
    let red = reduce_output(Arc::new(Base(f)), fam.clone()).unwrap();
    assert_eq!(red.output_len(), fam.key_len() + 4);
    assert_eq!(red.input_len(), 6 + fam.key_len());
    assert!(red.output_len() < red.input_len());
}

#[test]
fn direct_product_of_one_copy_is_f() {
    let f = random_fn(5, 3, 14);
    let p = product_function(&f, 1).unwrap();
    for x in 0..32 {
        assert_eq!(p.eval_u64(x), f.eval_u64(x));
    }
}

#[test]
fn gap_amplification_parts_hold_exactly() {
    for (n0, seed) in [(4usize, 1u64), (6, 2)] {
        let f = random_fn(n0, n0, 500 + seed);
        for t in [2usize, 4, 8] {
            for s in [1u64, 2] {
                let r = gapamp_extras(&f, t, s).unwrap();
                assert!(r.shannon_additive && r.min_additive && r.max_additive, "n0={n0} t={t}");
                if r.concentration_applies {
                    assert!(r.low_tail_ok && r.high_tail_ok, "n0={n0} t={t} s={s}: {} {}", r.low_tail, r.high_tail);
                }
                assert!(r.all_hold());
            }
        }
    }
}

#[test]
fn product_shannon_additivity_against_tabulated_product() {
    let f = random_fn(4, 4, 15);
    let k = ClassHistogram::from_function(&f).unwrap().shannon();
    let p = product_function(&f, 2).unwrap();
    assert_eq!(ClassHistogram::from_function(&p).unwrap().shannon(), k.scale(&ratio(2, 1)));
}

#[test]
fn smoothed_min_entropy_at_eight_copies() {
    // the low tail below t k - n0 ceil(sqrt(st)) carries at most e^(-2s) of the mass
    let f = random_fn(6, 6, 16);
    let r = gapamp_extras(&f, 8, 2).unwrap();
    let bound = &r.k.scale(&ratio(8, 1)) - &LogSum::integer((6 * r.sqrt_st) as i64);
    let prod = ClassHistogram::from_function(&f).unwrap().power(8).unwrap();
    let below: BigRational = prod
        .sizes()
        .iter()
        .filter(|(&c, _)| LogSum::log2(c).lt(&bound))
        .map(|(_, &w)| ratio(w, prod.domain_size()))
        .sum();
    assert_eq!(below, r.low_tail);
    assert!(within_hoeffding(&below, 2));
}

#[test]
fn set_product_tail_holds() {
    let f = random_fn(4, 4, 17);
    let counts = f.preimage_counts().unwrap();
    let sizes: Vec<u64> = (0..16).map(|x| counts[f.eval_u64(x) as usize]).collect();
    for t in [2usize, 4, 8] {
        let r = set_product_tail(&sizes, 4, t, 1).unwrap();
        assert!(r.holds, "t={t}: {}", r.tail);
    }
}

#[test]
fn agreement_bound_holds() {
    for (n0, seed) in [(4usize, 18u64), (6, 19)] {
        let f = random_fn(n0, n0, seed);
        for t in [2usize, 4, 8] {
            for q in [ratio(1, 2), ratio(1, 1)] {
                let r = agreement_bound(&f, t, &q).unwrap();
                assert!(r.holds && r.log_bound_holds, "n0={n0} t={t} q={q}");
            }
        }
    }
}

#[test]
fn agreement_count_by_hand() {
    // classes of size 2 and 3: pairs agreeing in >= 1 coordinate = 6 - 1 * 2
    assert_eq!(agreement_count(&[2, 3], 1), big(4));
    assert_eq!(agreement_count(&[2, 3], 0), big(6));
    assert_eq!(agreement_count(&[2, 3], 2), big(1));
    assert_eq!(binomial(8, 3), big(56));
}

#[test]
fn entropy_reduction_bounds_hold_exactly() {
    let f = random_fn(6, 6, 20);
    let r = entropy_reduction_check(&f, 2, 2).unwrap();
    assert_eq!(r.members, 1 << 16);
    assert!(r.min_entropy_holds, "excess {}", r.min_entropy_excess);
    assert!(r.markov_holds, "{} > {}", r.markov_worst, r.markov_bound);
}

#[test]
fn entropy_reduction_audit_with_restricted_sets() {
    let f = random_fn(4, 4, 21);
    let (ell, s) = (1usize, 2u64);
    let fam: Arc<dyn PairwiseFamily> = Arc::new(ToeplitzFamily::new(4, ell));
    let red = reduce_entropy(Arc::new(Base(f.clone())), fam.clone()).unwrap();
    let table = tabulate(&red).unwrap();
    let cmax = ClassHistogram::from_function(&f).unwrap().max_class() as u64;
    let target = Arc::new(function_target(table).unwrap());
    let finder = CollisionFinder::new(target, Arc::new(Optimal));
    let sets = |z: &BitString| {
        let (x, key) = red.split(z);
        let gx = fam.eval(&key, &x).unwrap();
        let fx = f.apply(&x);
        Ok((0..16u64)
            .map(|v| BitString::from_u64(v, 4))
            .filter(|v| f.apply(v) == fx && fam.eval(&key, v).unwrap() == gx)
            .map(|v| v.concat(&key))
            .collect::<BTreeSet<_>>())
    };
    let audit = audit_max(&finder, &sets, None, 0).unwrap();
    assert!(audit.p.unwrap().is_zero());
    // Pr[|L'| > cmax 2^(s-1) / 2^ell + 1] <= 2^-(s-1)
    let limit = ratio(cmax << (s - 1), 1u64 << ell) + ratio(1, 1);
    let total = 1u64 << red.input_len();
    let big_sets = (0..total)
        .filter(|&z| ratio(sets(&BitString::from_u64(z, red.input_len())).unwrap().len() as u64, 1) > limit)
        .count() as u64;
    assert!(ratio(big_sets, total) <= ratio(1, 1u64 << (s - 1)));
}

#[test]
fn output_reduction_false_collisions_are_rare() {
    for seed in 0..3 {
        let f = random_fn(6, 6, 22 + seed);
        let r = output_reduction_check(&f, 2).unwrap();
        assert_eq!(r.out_len, 4);
        assert!(r.false_collision <= r.bound, "{} > {}", r.false_collision, r.bound);
        assert!(r.injective >= r.injective_floor);
    }
    // a function with a tiny image is hashed injectively by most members
    let f = FiniteFunction::from_table(6, 6, (0..64).map(|x| x % 2).collect(), "parity").unwrap();
    let r = output_reduction_check(&f, 1).unwrap();
    assert!(r.injective > ratio(9, 10), "{}", r.injective);
}

#[test]
fn output_reduction_monte_carlo_agrees() {
    let f = random_fn(6, 6, 30);
    let exact = output_reduction_check(&f, 2).unwrap();
    let fam = PolyPairwise::new(6, 4).unwrap();
    let counts = f.preimage_counts().unwrap();
    let image: Vec<u64> = (0..64).filter(|&y| counts[y as usize] > 0).collect();
    let mut rng = Rng::new(30, 0);
    let trials = 20_000;
    let mut bad = 0u64;
    for _ in 0..trials {
        let key = fam.sample_key(&mut rng);
        let x = rng.below(64);
        let y = f.eval_u64(x);
        let h = fam.eval(&key, &BitString::from_u64(y, 6)).unwrap();
        if image.iter().any(|&v| v != y && fam.eval(&key, &BitString::from_u64(v, 6)).unwrap() == h) {
            bad += 1;
        }
    }
    let p = exact.false_collision.to_f64().unwrap();
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    let mc = bad as f64 / trials as f64;
    assert!((mc - p).abs() <= 4.0 * sigma + 1e-9, "mc {mc} exact {p}");
}

#[test]
fn wrapper_finder_is_subadditive() {
    let f = random_fn(3, 3, 31);
    let t = 2;
    let prod = product_function(&f, t).unwrap();
    let k = ClassHistogram::from_function(&f).unwrap().shannon();
    for strat in [Arc::new(Optimal) as Arc<dyn iel_reductions::Strategy>, Arc::new(Identity)] {
        let inner = CollisionFinder::new(Arc::new(function_target(prod.clone()).unwrap()), strat);
        let h_prod = audit_shannon(&inner, None, 0).unwrap().shannon.unwrap();
        let wrapper = ProductWrapper::new(inner, 3, t).unwrap();
        let finder = CollisionFinder::new(Arc::new(function_target(f.clone()).unwrap()), Arc::new(wrapper));
        let h = audit_shannon(&finder, None, 0).unwrap().shannon.unwrap();
        assert_eq!(finder.violations(), 0);
        assert!(h_prod.le(&h.scale(&ratio(t as u64, 1))), "{h_prod} > {t} * {h}");
        assert!(h.le(&k));
    }
}

#[test]
fn wrapper_sampling_matches_its_law() {
    let f = random_fn(3, 2, 32);
    let prod = product_function(&f, 2).unwrap();
    let inner = CollisionFinder::new(Arc::new(function_target(prod).unwrap()), Arc::new(Optimal));
    let wrapper = ProductWrapper::new(inner, 3, 2).unwrap();
    let target = function_target(f).unwrap();
    let z = BitString::from_u64(5, 3);
    let law = iel_reductions::Strategy::law(&wrapper, &target, &z).unwrap();
    let mut rng = Rng::new(32, 0);
    let trials = 6000;
    let mut seen: HashMap<BitString, u64> = HashMap::new();
    for _ in 0..trials {
        *seen.entry(iel_reductions::Strategy::sample(&wrapper, &target, &z, &mut rng).unwrap()).or_insert(0) += 1;
    }
    for (x, p) in law {
        let p = p.to_f64().unwrap();
        let got = *seen.get(&x).unwrap_or(&0) as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((got - p).abs() <= 4.0 * sigma + 1e-9, "{x}: {got} vs {p}");
    }
}

#[test]
fn toy_avgmax_build_shrinks_and_matches_sheet() {
    let f = random_fn(4, 4, 40);
    let cfg = toy_avgmax();
    let u = build_uowhf_avgmax(&f, &cfg).unwrap();
    let sheet = calc_params(&cfg).unwrap();
    assert_eq!(u.sheet, sheet);
    assert!(u.family.out_len() < u.family.in_len());
    assert_eq!(big(u.family.key_len() as u64), sheet.key_len);
    assert_eq!(big(u.family.out_len() as u64), sheet.out_len);
    assert_eq!(u.members.len(), sheet.kappa.to_usize().unwrap());
    let mut rng = Rng::new(40, 0);
    let key = u.family.sample_key(&mut rng);
    let x = rng.bits(u.family.in_len());
    let y = u.family.eval(&key, &x).unwrap();
    assert_eq!(y.len(), u.family.out_len());
    assert_eq!(u.family.eval(&key, &x).unwrap(), y);
    let (path, v) = parse_descriptor(&u.descriptor_bytes()).unwrap();
    assert_eq!(path, PathKind::AvgMax);
    assert_eq!(v["sheet"], sheet.to_json());
}

#[test]
fn build_rejects_mismatched_configs() {
    let f = random_fn(4, 4, 41);
    assert!(build_uowhf_shannon(&f, &toy_avgmax()).is_err());
    let cfg = PipelineConfig::new(PathKind::AvgMax, 4, 5, 4, ratio(4, 1), 1).unwrap();
    assert!(build_uowhf_avgmax(&f, &cfg).is_err());
}

#[test]
fn toy_shannon_build_shrinks_and_matches_sheet() {
    let f = random_fn(4, 4, 42);
    let cfg = PipelineConfig::new(PathKind::Shannon, 4, 4, 4, ratio(4, 1), 1).unwrap();
    let u = build_uowhf_shannon(&f, &cfg).unwrap();
    assert!(u.sheet.shrinks());
    assert!(u.family.out_len() < u.family.in_len());
    assert_eq!(big(u.family.key_len() as u64), u.sheet.key_len);
    assert_eq!(big(u.family.in_len() as u64), u.sheet.in_len);
}

#[test]
fn measured_gap_toy_sheet() {
    // the identity finder accesses nothing, so the whole real entropy is a gap
    let f = random_fn(6, 6, 43);
    let finder = CollisionFinder::new(Arc::new(function_target(f.clone()).unwrap()), Arc::new(Identity));
    let accessible = audit_shannon(&finder, None, 0).unwrap().shannon.unwrap();
    let real = ClassHistogram::from_function(&f).unwrap().shannon();
    let gap = (&real - &accessible).to_f64();
    assert!(gap > 0.0);
    // exact rational just below the measured gap
    let delta = ratio((gap * 1024.0).floor() as u64, 1024);
    let cfg = PipelineConfig::new(PathKind::AvgMax, 4, 6, 6, delta, 2).unwrap().with_k_real(real.to_f64());
    let sheet = calc_params(&cfg).unwrap();
    assert!(sheet.shrinks());
    let u = build_uowhf_avgmax(&f, &cfg).unwrap().with_notes(serde_json::json!({"measured_gap": gap}));
    assert!(u.family.out_len() < u.family.in_len());
    assert_eq!(big(u.family.out_len() as u64), sheet.out_len);
    assert_eq!(u.descriptor_json()["notes"]["measured_gap"], gap);
}

/// Slope of `log2 g(n)` against `log2 n` over the same range, in closed form.
fn oracle_slope(ns: &[u64], g: impl Fn(f64) -> f64) -> f64 {
    fit_exponent(&ns.iter().map(|&n| (n as f64, g(n as f64).log2())).collect::<Vec<_>>()).unwrap()
}

#[test]
fn output_length_exponents() {
    let ns: Vec<u64> = (4..=10).map(|e| 1u64 << e).collect();
    let avg = output_exponent(PipelineConfig::avg_max_for_owf, &ns).unwrap();
    let sh = output_exponent(PipelineConfig::shannon_for_owf, &ns).unwrap();
    let avg_oracle = oracle_slope(&ns, |n| n.powi(7) / n.log2());
    println!("avg-max exponent {avg:.3} (n^7/log n gives {avg_oracle:.3}), shannon exponent {sh:.3}");
    assert!((avg - avg_oracle).abs() < 0.15);
    assert!((sh - 22.0).abs() <= 0.5);
}

#[test]
fn key_length_exponent() {
    let ns: Vec<u64> = (4..=10).map(|e| 1u64 << e).collect();
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .map(|&n| {
            let sheet = calc_params(&PipelineConfig::avg_max_for_owf(n).unwrap()).unwrap();
            (n as f64, iel_pipeline::params::big_log2(&sheet.key_len))
        })
        .collect();
    let key = fit_exponent(&pts).unwrap();
    println!("avg-max key exponent {key:.3}");
    assert!(key > 6.5 && key < 7.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sheets_always_shrink(n0 in 2u64..40, num in 1u64..16, den in 1u64..16, s in 1u64..6, shannon in any::<bool>()) {
        let path = if shannon { PathKind::Shannon } else { PathKind::AvgMax };
        let cfg = PipelineConfig::new(path, 16, n0, n0, ratio(num, den), s).unwrap();
        let sheet = calc_params(&cfg).unwrap();
        prop_assert!(sheet.shrinks());
        prop_assert!(sheet.t > big(s));
        prop_assert_eq!(&sheet.key_len, &(&sheet.kappa * &sheet.member_key));
    }

    #[test]
    fn shoup_collisions_always_transport(seed in 0u64..1000, blocks in 1usize..16) {
        let ext = shoup_extend(table_base(4, 2, seed), blocks).unwrap();
        let mut rng = Rng::new(seed, 7);
        let key = ext.sample_key(&mut rng);
        let (x0, x1) = birthday(&ext, &key, &mut rng);
        let c = ext.base_collision(&key, &x0, &x1).unwrap().unwrap();
        let bk = key.slice(0, ext.base().key_len()).unwrap();
        prop_assert_eq!(ext.base().eval(&bk, &c.u0).unwrap(), ext.base().eval(&bk, &c.u1).unwrap());
    }
}
