use iel_core::{BitString, FiniteFunction, Rng};
use iel_entropy::{
    flattening_deviation, flattening_deviation_mc, ratio, real_entropy_of_inverse, ClassHistogram, Distribution,
    LogSum,
};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn from_weights(ws: &[u64]) -> Distribution {
    Distribution::from_counts(ws.iter().enumerate().map(|(k, &w)| (BitString::from_u64(k as u64, 8), w)).collect())
        .unwrap()
}

proptest! {
    #[test]
    fn chain_and_flatness(ws in prop::collection::vec(1u64..20, 1..12)) {
        let d = from_weights(&ws);
        let r = d.report();
        prop_assert!(r.chain_holds());
        let flat = ws.iter().all(|&w| w == ws[0]);
        prop_assert_eq!(r.is_flat(), flat);
        prop_assert_eq!(r.min_entropy == r.shannon, flat);
        prop_assert_eq!(r.shannon == r.max_entropy, flat);
    }

    #[test]
    fn conditional_decomposition(ws in prop::collection::vec(1u64..9, 16)) {
        // X is 4 bits, Y its first two bits.
        let d = Distribution::from_counts(
            ws.iter().enumerate().map(|(k, &w)| (BitString::from_u64(k as u64, 4), w)).collect(),
        ).unwrap();
        let proj = |x: &BitString| x.prefix(2).unwrap();
        let cond = d.conditional_report(&proj).shannon;
        let joint = d.report().shannon; // (X, Y) is a function of X
        let y = d.map(&proj).report().shannon;
        prop_assert_eq!(cond.clone(), &joint - &y);
        prop_assert!((cond.to_f64() - (joint.to_f64() - y.to_f64())).abs() < 2f64.powi(-30));
    }

    #[test]
    fn inverse_entropy_matches_conditional_form(n in 1usize..9, m in 0usize..9, seed in any::<u64>()) {
        let f = FiniteFunction::random_function(n, m, &mut Rng::new(seed, 0)).unwrap();
        let exact = real_entropy_of_inverse(&f).unwrap();
        let uniform = Distribution::uniform((0..1u64 << n).map(|x| BitString::from_u64(x, n)).collect()).unwrap();
        let cond = uniform.conditional_report(&|x| f.eval(x).unwrap());
        prop_assert_eq!(&exact, &cond);
        prop_assert!(exact.chain_holds());
    }
}

#[test]
fn direct_product_profile_matches_brute_force() {
    let f = FiniteFunction::random_function(3, 2, &mut Rng::new(5, 5)).unwrap();
    let table = f.table().unwrap();
    let prod = FiniteFunction::from_table(6, 4, (0..64u64).map(|x| (table[(x >> 3) as usize] << 2) | table[(x & 7) as usize]).collect(), "f2")
        .unwrap();
    let brute = ClassHistogram::from_function(&prod).unwrap();
    let conv = ClassHistogram::from_function(&f).unwrap().power(2).unwrap();
    assert_eq!(brute, conv);
    let h = ClassHistogram::from_function(&f).unwrap().shannon();
    assert_eq!(conv.shannon(), h.scale(&ratio(2, 1)));
}

#[test]
fn smoothing_construction() {
    // sample entropies: 1 (mass 1/2), 3 (mass 1/4), 4 (mass 1/4)
    let d = Distribution::from_rationals(vec![
        (BitString::from_u64(0, 3), ratio(1, 2)),
        (BitString::from_u64(1, 3), ratio(1, 8)),
        (BitString::from_u64(2, 3), ratio(1, 8)),
        (BitString::from_u64(3, 3), ratio(1, 16)),
        (BitString::from_u64(4, 3), ratio(1, 16)),
        (BitString::from_u64(5, 3), ratio(1, 16)),
        (BitString::from_u64(6, 3), ratio(1, 16)),
    ])
    .unwrap();
    let k = 3;
    let eps = BigRational::from_integer(1.into()) - d.mass_with_sample_entropy_at_least(&LogSum::integer(k as i64));
    assert_eq!(eps, ratio(1, 2));
    let (smooth, moved) = d.smooth_to_min_entropy(k);
    assert!(LogSum::integer(k as i64).le(&smooth.report().min_entropy));
    assert_eq!(d.statistical_distance(&smooth), moved);
    assert!(moved <= eps);
    assert_eq!(moved, ratio(3, 8));
}

#[test]
fn flattening_quantile_matches_binomial_oracle() {
    // For {1/2, 1/4, 1/4} the deviation is |t/2 - K| with K ~ Bin(t, 1/2).
    let d = Distribution::from_rationals(vec![
        (BitString::from_u64(0, 2), ratio(1, 2)),
        (BitString::from_u64(1, 2), ratio(1, 4)),
        (BitString::from_u64(2, 2), ratio(1, 4)),
    ])
    .unwrap();
    let t = 10u64;
    let binom = |k: u64| (0..k).fold(1u64, |acc, i| acc * (t - i) / (i + 1));
    let mut oracle = None;
    for delta in 0..=5u64 {
        let inside: u64 = (0..=t).filter(|&k| (k as i64 - 5).unsigned_abs() <= delta).map(binom).sum();
        if inside as f64 / 1024.0 >= 0.99 {
            oracle = Some(delta);
            break;
        }
    }
    assert_eq!(oracle, Some(4));
    let r = flattening_deviation(&d, 10, &ratio(1, 100)).unwrap();
    assert_eq!(r.exact_quantile.unwrap(), LogSum::integer(4));

    let mc = flattening_deviation_mc(&d, 10, 0.01, 100_000, &mut Rng::new(1, 2)).unwrap();
    assert!((mc.quantile - 4.0).abs() <= 1.0);
}

#[test]
fn flattening_grows_like_square_root() {
    let d = Distribution::from_rationals(vec![
        (BitString::from_u64(0, 2), ratio(1, 2)),
        (BitString::from_u64(1, 2), ratio(1, 4)),
        (BitString::from_u64(2, 2), ratio(1, 4)),
    ])
    .unwrap();
    let pts: Vec<(f64, f64)> = [1usize, 2, 4, 8, 16, 32, 64]
        .iter()
        .map(|&t| {
            let r = flattening_deviation(&d, t, &ratio(1, 4)).unwrap();
            ((t as f64).ln(), r.quantile.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((0.4..=0.6).contains(&slope), "slope {slope}");
}

#[test]
fn report_json_uses_rationals() {
    let d = from_weights(&[2, 1, 1]);
    let v = d.report().to_json();
    assert_eq!(v["shannon"], "3/2");
    assert_eq!(v["min"], "1");
    assert_eq!(v["max"], "1*log2(3)");
    assert_eq!(v["histogram"][0][1], "1/2");
}

#[test]
fn empty_distribution_rejected() {
    assert!(Distribution::from_counts(vec![]).is_err());
    assert!(Distribution::from_rationals(vec![(BitString::new(), BigRational::zero())]).is_err());
}
