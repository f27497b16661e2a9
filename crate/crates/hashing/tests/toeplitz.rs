use iel_core::BitString;
use iel_hashing::{PairwiseFamily, PolyPairwise, ToeplitzFamily};

fn exact_pairwise(fam: &dyn PairwiseFamily) {
    let n = fam.in_len();
    let m = fam.out_len();
    let keys = 1u64 << fam.key_len();
    for x1 in 0..1u64 << n {
        for x2 in x1 + 1..1u64 << n {
            let (a, b) = (BitString::from_u64(x1, n), BitString::from_u64(x2, n));
            let mut joint = vec![0u64; 1 << (2 * m)];
            for k in 0..keys {
                let key = BitString::from_u64(k, fam.key_len());
                let ya = fam.eval(&key, &a).unwrap().to_u64().unwrap();
                let yb = fam.eval(&key, &b).unwrap().to_u64().unwrap();
                joint[((ya << m) | yb) as usize] += 1;
            }
            assert!(joint.iter().all(|&c| c << (2 * m) == keys), "{} on {x1},{x2}", fam.label());
        }
    }
}

#[test]
fn toeplitz_is_pairwise_independent() {
    for (n, m) in [(3, 2), (4, 3), (6, 2), (2, 1)] {
        exact_pairwise(&ToeplitzFamily::new(n, m));
    }
}

#[test]
fn poly_keys_round_trip() {
    let fam = PolyPairwise::new(5, 3).unwrap();
    assert_eq!(fam.key_len(), 16);
    let key = BitString::from_u64(0x0100, 16);
    // a = 1, b = 0 keeps the leading bits
    assert_eq!(fam.eval(&key, &BitString::from_u64(0b10110, 5)).unwrap(), BitString::from_u64(0b101, 3));
}
