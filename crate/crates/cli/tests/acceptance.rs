//! End-to-end acceptance checks. Each test writes one `criterion N: PASS|FAIL`
//! line straight to stderr (bypassing test capture) and then asserts it.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use iel_avgcase::{
    heuristic_b, two_universal_picking, vv_isolation_probability, ExhaustiveSolver, HeuristicParams, IsolationMode,
    MismatchedWitness, PreimageRelation, QOracle, RandomGuess, RelationQ, Sampler,
};
use iel_constructions::{inaccessible_gap, sibling_hit_bounds, HashTruncConstruction, TruncConstruction};
use iel_core::{BitFunction, BitString, FiniteFunction, Rng};
use iel_entropy::{ratio, real_entropy_of_domain, real_entropy_of_inverse, ClassHistogram, Distribution, LogSum};
use iel_pipeline::*;
use iel_reductions::{
    audit_shannon, calibrate_lazy, expected_optimal_calls, function_target, invert_trunc, trunc_target, Canonical,
    CollisionFinder, Identity, InvConfig, Lazy, Sampling, Strategy, Target,
};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn verdict(id: &str, pass: bool, detail: &str) {
    let line = format!("criterion {id}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

fn random_fn(n: usize, m: usize, seed: u64) -> FiniteFunction {
    FiniteFunction::random_function(n, m, &mut Rng::new(seed, 0)).unwrap()
}

/// `sum_c (c / N) log2 c` over the nonzero class sizes, i.e. `E log2 |F^-1(F(X))|`.
fn expected_log_class(counts: &[u64]) -> LogSum {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| LogSum::log2(c).scale(&ratio(c, total)))
        .sum()
}

fn prod_pow(counts: &[u64]) -> BigUint {
    counts.iter().filter(|&&c| c > 0).map(|&c| BigUint::from(c).pow(c as u32)).product()
}

/// Functions used by the first two criteria: random, permutations and constants, n <= 12.
fn generated_functions() -> Vec<FiniteFunction> {
    let mut rng = Rng::new(1, 100);
    (0..100u64)
        .map(|j| {
            let n = 1 + (j as usize % 12);
            match j % 10 {
                0 => FiniteFunction::random_permutation(n, &mut rng).unwrap(),
                1 => FiniteFunction::constant(n, 1 + n / 2, rng.below(1 << (1 + n / 2))).unwrap(),
                _ => {
                    let m = rng.index(n + 2);
                    FiniteFunction::random_function(n, m, &mut rng).unwrap()
                }
            }
        })
        .collect()
}

#[test]
fn criterion_01_entropy_chain_and_identity() {
    let start = Instant::now();
    let mut rng = Rng::new(1, 0);
    let mut bad = Vec::new();

    // distributions from explicit counts; the oracle decides the chain on integers:
    // H_min <= H  iff  prod c^c <= cmax^N,  H <= H_0  iff  N^N <= k^N prod c^c
    for j in 0..100u64 {
        let n = 1 + (j as usize % 12);
        let k = rng.index((1usize << n).min(40));
        let mut support = BTreeSet::new();
        while support.len() < k {
            support.insert(rng.bits(n));
        }
        let flat_weight = 1 + rng.below(5);
        let counts: Vec<u64> = (0..k).map(|_| if j % 4 == 0 { flat_weight } else { 1 + rng.below(9) }).collect();
        let d = Distribution::from_counts(support.into_iter().zip(counts.iter().copied()).collect()).unwrap();
        let r = d.report();
        let total: u64 = counts.iter().sum();
        let cmax = *counts.iter().max().unwrap();
        let p = prod_pow(&counts);
        let nn = BigUint::from(total).pow(total as u32);
        let low = BigUint::from(cmax).pow(total as u32);
        let high = BigUint::from(k as u64).pow(total as u32) * &p;
        let flat = counts.iter().all(|&c| c == counts[0]);
        let shannon = &LogSum::log2(total) - &expected_log_class(&counts);
        let ok = r.chain_holds()
            && p <= low
            && nn <= high
            && (p == low) == flat
            && (nn == high) == flat
            && (r.min_entropy == r.shannon) == (p == low)
            && (r.shannon == r.max_entropy) == (nn == high)
            && r.is_flat() == flat
            && r.shannon == shannon
            && r.min_entropy == &LogSum::log2(total) - &LogSum::log2(cmax)
            && r.max_entropy == LogSum::log2(k as u64);
        if !ok {
            bad.push(format!("distribution {j}"));
        }
    }

    // H(X | F(X)) against E log2 |F^-1(F(X))| for uniform X
    for (j, f) in generated_functions().iter().enumerate() {
        let n = f.input_len();
        let d = Distribution::uniform((0..1u64 << n).map(|x| BitString::from_u64(x, n)).collect()).unwrap();
        let cond = d.conditional_report(&|x| f.apply(x));
        let counts: Vec<u64> = f.preimage_counts().unwrap().into_iter().filter(|&c| c > 0).collect();
        let total = 1u64 << n;
        let p = prod_pow(&counts);
        let lo = BigUint::from(*counts.iter().min().unwrap()).pow(total as u32);
        let hi = BigUint::from(*counts.iter().max().unwrap()).pow(total as u32);
        let flat = counts.iter().all(|&c| c == counts[0]);
        let oracle = expected_log_class(&counts);
        let ok = cond.shannon == oracle
            && real_entropy_of_inverse(f).unwrap().shannon == oracle
            && cond.chain_holds()
            && lo <= p
            && p <= hi
            && (cond.min_entropy == cond.shannon) == (lo == p)
            && (cond.shannon == cond.max_entropy) == (p == hi)
            && cond.is_flat() == flat;
        if !ok {
            bad.push(format!("function {j} ({})", f.label()));
        }
    }
    let elapsed = start.elapsed();
    let detail = format!("100 distributions + 100 functions, {} mismatches {bad:?}, {elapsed:.1?}", bad.len());
    verdict("1", bad.is_empty() && elapsed < Duration::from_secs(60), &detail);
}

#[test]
fn criterion_02_inverse_entropy_at_least_n_minus_m() {
    let mut fs = generated_functions();
    for seed in 0..40u64 {
        let n = 2 + seed as usize % 11;
        fs.push(random_fn(n, 1 + seed as usize % n, 500 + seed));
    }
    let mut bad = Vec::new();
    let mut tight = 0;
    for f in &fs {
        let (n, m) = (f.input_len(), f.output_len());
        let h = real_entropy_of_inverse(f).unwrap().shannon;
        let engine = LogSum::integer(n as i64 - m as i64).le(&h);
        // integer oracle: N * H = log2 prod c^c >= (n - m) N
        let counts = f.preimage_counts().unwrap();
        let oracle = n < m || prod_pow(&counts) >= BigUint::one() << ((n - m) << n);
        if engine != oracle || !engine {
            bad.push(f.label().to_string());
        }
        tight += (h == LogSum::integer(n as i64 - m as i64)) as usize;
    }
    verdict("2", bad.is_empty(), &format!("{} functions, {tight} meet the bound with equality, failing {bad:?}", fs.len()));
}

#[test]
fn criterion_03_optimal_finder_is_the_ceiling() {
    let mut bad = Vec::new();
    let mut checked = 0;
    for seed in 0..6u64 {
        let n = 4 + seed as usize % 3;
        let f = random_fn(n, n - seed as usize % 2, 30 + seed);
        let counts = f.preimage_counts().unwrap();
        assert!(counts.iter().any(|&c| c > 1), "test function must be non-injective");
        let targets: Vec<(Arc<dyn Target>, LogSum)> = {
            let mut v: Vec<(Arc<dyn Target>, LogSum)> =
                vec![(Arc::new(function_target(f.clone()).unwrap()), expected_log_class(&counts))];
            if f.input_len() == f.output_len() {
                let real = real_entropy_of_domain(&TruncConstruction::new(f.clone()).unwrap()).unwrap().shannon;
                v.push((Arc::new(trunc_target(f.clone()).unwrap()), real));
            }
            v
        };
        for (t, real) in targets {
            let opt = audit_shannon(&CollisionFinder::optimal(t.clone()), None, seed).unwrap();
            if opt.shannon.as_ref() != Some(&real) || opt.violations != 0 {
                bad.push(format!("optimal on {}", t.label()));
            }
            let others: Vec<Arc<dyn Strategy>> = vec![
                Arc::new(Identity),
                Arc::new(Canonical),
                Arc::new(Lazy::new(ratio(1, 64)).unwrap()),
                Arc::new(Lazy::new(ratio(1, 2)).unwrap()),
                Arc::new(Sampling { tries: 8 }),
                Arc::new(Sampling { tries: 1 }),
            ];
            for s in others {
                let a = CollisionFinder::new(t.clone(), s);
                let h = audit_shannon(&a, None, seed).unwrap().shannon.unwrap();
                if !h.lt(&real) || a.violations() != 0 {
                    bad.push(format!("{} on {}", a.label(), t.label()));
                }
                checked += 1;
            }
        }
    }
    verdict("3", bad.is_empty(), &format!("{checked} finder audits strictly below the optimum, failing {bad:?}"));
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

#[test]
fn criterion_04_inverter_mean_calls_at_most_2n() {
    let start = Instant::now();
    let trials = 10_000u64;
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [4usize, 6, 8] {
        let f = random_fn(n, n, 40 + n as u64);
        let c = TruncConstruction::new(f.clone()).unwrap();
        let a = CollisionFinder::optimal(Arc::new(trunc_target(f.clone()).unwrap()));
        let mut rng = Rng::new(4, n as u64);
        let mut all_inverted = true;
        let calls: Vec<f64> = (0..trials)
            .map(|_| {
                let y = f.apply(&rng.bits(n));
                let r = invert_trunc(&a, &c, &y, InvConfig::uncapped(), &mut rng).unwrap();
                all_inverted &= r.success && r.x.as_ref().is_some_and(|x| f.apply(x) == y);
                r.calls as f64
            })
            .collect();
        let (mean, se) = mean_and_se(&calls);
        let exact = expected_optimal_calls(&f).unwrap().to_f64().unwrap();
        ok &= all_inverted && mean <= 2.0 * n as f64 + 3.0 * se;
        parts.push(format!("n={n}: mean {mean:.3} (se {se:.3}, exact {exact:.3}) vs {}", 2 * n));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(120);
    verdict("4", ok, &format!("{}; {elapsed:.1?}", parts.join("; ")));
}

#[test]
fn criterion_05_capped_inverter_with_high_entropy_finder() {
    let trials = 2_000u64;
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [4usize, 6, 8] {
        let f = random_fn(n, n, 50 + n as u64);
        let c = TruncConstruction::new(f.clone()).unwrap();
        let t: Arc<dyn Target> = Arc::new(trunc_target(f.clone()).unwrap());
        let slack = ratio(1, 64 * (n * n) as u64);
        let (eps, h) = calibrate_lazy(t.clone(), &slack, 40).unwrap();
        let real = real_entropy_of_domain(&c).unwrap().shannon;
        let premise = (&real - &LogSum::rational(slack)).le(&h) && eps > BigRational::zero();
        let a = CollisionFinder::new(t, Arc::new(Lazy::new(eps.clone()).unwrap()));
        let mut rng = Rng::new(5, n as u64);
        let mut wins = 0u64;
        for _ in 0..trials {
            let y = f.apply(&rng.bits(n));
            let r = invert_trunc(&a, &c, &y, InvConfig::standard(n), &mut rng).unwrap();
            assert!(r.calls <= 8 * n as u64);
            if r.success {
                assert_eq!(f.apply(r.x.as_ref().unwrap()), y);
                wins += 1;
            }
        }
        let p = wins as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        ok &= premise && p >= 0.25 - 3.0 * sigma;
        parts.push(format!("n={n}: eps {eps}, success {p:.4} (sigma {sigma:.4})"));
    }
    verdict("5", ok, &parts.join("; "));
}

fn toy_samplers(coins: usize, seed: u64) -> Vec<Sampler> {
    let n = coins as u64;
    vec![
        Sampler::identity(n, 1, coins).unwrap(),
        Sampler::truncation(n, 1, coins, 1).unwrap(),
        Sampler::planted_biased(n, 1, coins, 2).unwrap(),
        Sampler::f_output(n, 1, random_fn(coins, coins, seed)).unwrap(),
    ]
}

fn relation_over(sampler: Sampler, seed: u64) -> (Arc<RelationQ>, FiniteFunction) {
    let out = sampler.out_len();
    let f = random_fn(out, out, seed);
    (Arc::new(RelationQ::new(sampler, Arc::new(PreimageRelation::new(f.clone()))).unwrap()), f)
}

#[test]
fn criterion_06_hashing_hit_lower_bounds() {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 2..=6usize {
        let c = HashTruncConstruction::new_default(random_fn(n, n, 60 + n as u64)).unwrap();
        let r = sibling_hit_bounds(&c).unwrap();
        let bound = ratio(1, 8u64 << n);
        let holds = r.holds && r.bound == bound && r.min_probability.as_ref().map_or(true, |p| *p >= bound);
        ok &= holds && r.tuples > 0;
        parts.push(format!("3-wise n={n}: {} tuples, min {}", r.tuples, r.min_probability.map(|p| p.to_string()).unwrap_or_default()));
    }
    for coins in 3..=6usize {
        for s in toy_samplers(coins, 66) {
            let name = s.name().to_string();
            let q = RelationQ::new(s, Arc::new(PreimageRelation::new(FiniteFunction::identity(coins).unwrap())));
            let r = two_universal_picking(&q.unwrap()).unwrap();
            let bound = ratio(1, 10u64 << coins);
            let holds = r.holds && r.bound == bound && r.min_probability.as_ref().map_or(true, |p| *p >= bound);
            ok &= holds;
            parts.push(format!("pairwise {name}/{coins}: {} tuples", r.tuples));
        }
    }
    verdict("6", ok, &parts.join("; "));
}

#[test]
fn criterion_07_inaccessible_gap_positive() {
    let start = Instant::now();
    let c = HashTruncConstruction::new_default(random_fn(8, 8, 2024)).unwrap();
    let r = inaccessible_gap(&c, &ratio(1, 1)).unwrap();
    let elapsed = start.elapsed();
    let reference = 3.0 / 512.0;
    let ok = r.gap.signum() > 0
        && r.light.le(&r.real)
        && (r.reference - reference).abs() < 1e-12
        && elapsed < Duration::from_secs(300);
    let detail = format!(
        "gap {:.6} bits (real {:.6}, light {:.6}), reference c log n / 64n = {:.6}, {elapsed:.1?}",
        r.gap.to_f64(),
        r.real.to_f64(),
        r.light.to_f64(),
        r.reference
    );
    verdict("7", ok, &detail);
}

#[test]
fn criterion_08_gap_amplification_and_reductions() {
    let mut bad = Vec::new();
    for (n0, seed) in [(4usize, 80u64), (6, 81)] {
        let f = random_fn(n0, n0, seed);
        let counts = f.preimage_counts().unwrap();
        let sizes: Vec<u64> = (0..1u64 << n0).map(|x| counts[f.eval_u64(x) as usize]).collect();
        let k = ClassHistogram::from_function(&f).unwrap().shannon();
        for t in [2usize, 4, 8] {
            for s in [1u64, 2] {
                let r = gapamp_extras(&f, t, s).unwrap();
                if !r.all_hold() || !r.shannon_additive || !r.min_additive || !r.max_additive {
                    bad.push(format!("gap amplification n0={n0} t={t} s={s}"));
                }
                if r.concentration_applies && !(r.low_tail_ok && r.high_tail_ok) {
                    bad.push(format!("concentration n0={n0} t={t} s={s}"));
                }
                if !set_product_tail(&sizes, n0, t, s).unwrap().holds {
                    bad.push(format!("set product tail n0={n0} t={t} s={s}"));
                }
            }
            for q in [ratio(1, 2), ratio(1, 1)] {
                let r = agreement_bound(&f, t, &q).unwrap();
                if !(r.holds && r.log_bound_holds) {
                    bad.push(format!("agreement n0={n0} t={t} q={q}"));
                }
            }
            // product additivity: tabulated product where small, histogram power otherwise
            let product = if t * n0 <= 16 {
                ClassHistogram::from_function(&product_function(&f, t).unwrap()).unwrap().shannon()
            } else {
                ClassHistogram::from_function(&f).unwrap().power(t).unwrap().shannon()
            };
            if product != k.scale(&ratio(t as u64, 1)) {
                bad.push(format!("product additivity n0={n0} t={t}"));
            }
        }
        let r = entropy_reduction_check(&f, 2, 2).unwrap();
        if !(r.min_entropy_holds && r.markov_holds) {
            bad.push(format!("entropy reduction n0={n0}"));
        }
        let r = output_reduction_check(&f, 2).unwrap();
        if r.false_collision > r.bound || r.injective < r.injective_floor {
            bad.push(format!("output reduction n0={n0}"));
        }
    }
    verdict("8", bad.is_empty(), &format!("n0 in {{4,6}}, t in {{2,4,8}}, failing {bad:?}"));
}

/// Keyed table family `F_k(u) = T[u xor k]` on `l + b` bits.
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
fn criterion_09_pipeline_end_to_end() {
    let mut parts = Vec::new();
    let mut ok = true;

    let f = random_fn(4, 4, 90);
    let avg = build_uowhf_avgmax(&f, &PipelineConfig::new(PathKind::AvgMax, 4, 4, 4, ratio(4, 1), 1).unwrap()).unwrap();
    let sh = build_uowhf_shannon(&f, &PipelineConfig::new(PathKind::Shannon, 4, 4, 4, ratio(4, 1), 1).unwrap()).unwrap();
    for (name, u) in [("avg-max", &avg), ("shannon", &sh)] {
        let shrinks = u.family.out_len() < u.family.in_len() && u.sheet.shrinks();
        ok &= shrinks;
        parts.push(format!("{name} {} -> {} bits", u.family.in_len(), u.family.out_len()));
    }
    let mut rng = Rng::new(90, 1);
    let key = avg.family.sample_key(&mut rng);
    let x = rng.bits(avg.family.in_len());
    let y = avg.family.eval(&key, &x).unwrap();
    ok &= y.len() == avg.family.out_len() && avg.family.eval(&key, &x).unwrap() == y;

    let mut rng = Rng::new(91, 0);
    let mut verified = 0;
    for trial in 0..100u64 {
        let ext = shoup_extend(table_base(6, 2, 1000 + trial), 1 + (trial as usize % 12)).unwrap();
        let key = ext.sample_key(&mut rng);
        let (x0, x1) = birthday(&ext, &key, &mut rng);
        let bk = key.slice(0, ext.base().key_len()).unwrap();
        if let Some(c) = ext.base_collision(&key, &x0, &x1).unwrap() {
            if c.u0 != c.u1 && ext.base().eval(&bk, &c.u0).unwrap() == ext.base().eval(&bk, &c.u1).unwrap() {
                verified += 1;
            }
        }
    }
    ok &= verified == 100;
    parts.push(format!("shoup transport {verified}/100"));

    let members: Vec<Arc<dyn KeyedFamily>> = (0..3)
        .map(|j| Arc::new(shoup_extend(table_base(3, 2, 40 + j), 4).unwrap()) as Arc<dyn KeyedFamily>)
        .collect();
    let concat = concat_families(members).unwrap();
    let mut rng = Rng::new(92, 0);
    let mut propagated = 0;
    for _ in 0..20 {
        let key = concat.sample_key(&mut rng);
        let (x0, x1) = birthday(&concat, &key, &mut rng);
        let all = concat.members().iter().enumerate().all(|(j, m)| {
            let mk = concat.member_key(&key, j).unwrap();
            m.eval(&mk, &x0).unwrap() == m.eval(&mk, &x1).unwrap()
        });
        propagated += all as usize;
    }
    ok &= propagated == 20;
    parts.push(format!("concatenation collisions reach every member {propagated}/20"));
    verdict("9", ok, &parts.join("; "));
}

/// Least-squares slope of `log2 len` against `log2 n`.
fn slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log2()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / k, points.iter().map(|p| p.1).sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(points).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn log2_big(v: &BigUint) -> f64 {
    let shift = v.bits().saturating_sub(53);
    (v >> shift).to_f64().unwrap().log2() + shift as f64
}

fn output_slope(make: fn(u64) -> iel_core::Result<PipelineConfig>) -> (f64, Duration) {
    let start = Instant::now();
    let points: Vec<(f64, f64)> = (4..=10)
        .map(|e| {
            let n = 1u64 << e;
            (n as f64, log2_big(&calc_params(&make(n).unwrap()).unwrap().out_len))
        })
        .collect();
    (slope(&points), start.elapsed())
}

#[test]
fn criterion_10_avg_max_output_exponent() {
    let (e, elapsed) = output_slope(PipelineConfig::avg_max_for_owf);
    let ok = (e - 7.0).abs() <= 0.2 && elapsed < Duration::from_secs(10);
    verdict("10 (avg-max)", ok, &format!("exponent {e:.3} vs 7 +/- 0.2, {elapsed:.1?}"));
}

#[test]
fn criterion_10_shannon_output_exponent() {
    let (e, elapsed) = output_slope(PipelineConfig::shannon_for_owf);
    let ok = (e - 22.0).abs() <= 0.5 && elapsed < Duration::from_secs(10);
    verdict("10 (shannon)", ok, &format!("exponent {e:.3} vs 22 +/- 0.5, {elapsed:.1?}"));
}

#[test]
fn criterion_11_isolation_exhaustive() {
    let mut rng = Rng::new(11, 0);
    let mut worst: Option<(BigRational, usize, usize)> = None;
    let mut cases = 0;
    let mut ok = true;
    for k in 0..=4usize {
        for size in (1usize << k)..=(2usize << k) {
            let random: BTreeSet<BitString> = {
                let mut s = BTreeSet::new();
                while s.len() < size {
                    s.insert(rng.bits(8));
                }
                s
            };
            let consecutive: BTreeSet<BitString> = (0..size as u64).map(|x| BitString::from_u64(x, 8)).collect();
            for set in [random, consecutive] {
                let r = vv_isolation_probability(&set, k, IsolationMode::Exhaustive).unwrap();
                let bound = ratio(1, 1u64 << (k + 3));
                ok &= r.bound == bound && r.min >= bound;
                cases += 1;
                let margin = &r.min / &bound;
                if worst.as_ref().map_or(true, |w| margin < w.0) {
                    worst = Some((margin, size, k));
                }
            }
        }
    }
    let (m, size, k) = worst.unwrap();
    verdict("11", ok, &format!("{cases} sets, tightest min/bound {:.3} at |S|={size}, k={k}", m.to_f64().unwrap()));
}

/// `m (m / delta)^beta` with `delta = a / b`, rounded up, in integers.
fn loop_oracle(m: u64, a: u64, b: u64, beta: u32) -> u64 {
    let num = BigUint::from(m).pow(beta + 1) * BigUint::from(b).pow(beta);
    let den = BigUint::from(a).pow(beta);
    ((num + &den - 1u32) / den).to_u64().unwrap()
}

#[test]
fn criterion_12_heuristic_is_one_sided() {
    let mut ok = true;
    for m in 1..=8u64 {
        for (a, b) in [(1u64, 1u64), (1, 2), (1, 4), (2, 3), (3, 8)] {
            for beta in 0..=3u32 {
                ok &= HeuristicParams::new(m, ratio(a, b), beta).unwrap().loops().unwrap() == loop_oracle(m, a, b, beta);
            }
        }
    }

    let coins = 4usize;
    let per_sampler = 25_000u64;
    let params = HeuristicParams::new(coins as u64, ratio(1, 1), 1).unwrap();
    let loops = params.loops().unwrap();
    ok &= loops == 16;
    let (mut trials, mut found, mut false_pos, mut exhausted) = (0u64, 0u64, 0u64, 0u64);
    for (j, sampler) in toy_samplers(coins, 120).into_iter().enumerate() {
        let (q, rel) = relation_over(sampler, 121 + j as u64);
        let oracles: Vec<Box<dyn QOracle>> = vec![
            Box::new(ExhaustiveSolver::new(q.clone())),
            Box::new(RandomGuess::new(&q)),
            Box::new(MismatchedWitness::new(q.clone())),
        ];
        let out_len = q.sampler().out_len();
        for t in 0..per_sampler {
            let mut rng = Rng::new(12 + j as u64, t);
            let y = if t % 2 == 0 { q.instance_of(rng.below(1 << coins)) } else { rng.bits(out_len) };
            let oracle = oracles[(t % 3) as usize].as_ref();
            let r = heuristic_b(&q, oracle, &y, &params, &mut rng).unwrap();
            trials += 1;
            match r.witness {
                Some(w) => {
                    found += 1;
                    false_pos += (w.len() != rel.input_len() || rel.apply(&w) != y) as u64;
                }
                None => {
                    exhausted += 1;
                    ok &= r.iterations == loops;
                }
            }
        }
    }
    ok &= false_pos == 0 && trials == 100_000;
    let detail = format!(
        "{trials} runs over 4 samplers x 3 oracles, {found} witnesses, {false_pos} false positives, {exhausted} runs used all {loops} loops"
    );
    verdict("12", ok, &detail);
}
