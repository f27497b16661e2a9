use iel_core::{BitString, IelError, Result, Rng};

use crate::family::{HashFamilySpec, HashMember};

/// A keyed pairwise-independent family `{0,1}^in_len -> {0,1}^out_len`.
pub trait PairwiseFamily: Send + Sync {
    fn in_len(&self) -> usize;
    fn out_len(&self) -> usize;
    fn key_len(&self) -> usize;
    fn eval(&self, key: &BitString, x: &BitString) -> Result<BitString>;
    fn label(&self) -> String;

    fn sample_key(&self, rng: &mut Rng) -> BitString {
        rng.bits(self.key_len())
    }
}

/// Affine Toeplitz hashing `x -> Tx + b`; the key is the `in+out-1` diagonal bits of `T` then `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ToeplitzFamily {
    pub in_len: usize,
    pub out_len: usize,
}

impl ToeplitzFamily {
    pub fn new(in_len: usize, out_len: usize) -> Self {
        ToeplitzFamily { in_len, out_len }
    }
}

impl PairwiseFamily for ToeplitzFamily {
    fn in_len(&self) -> usize {
        self.in_len
    }

    fn out_len(&self) -> usize {
        self.out_len
    }

    fn key_len(&self) -> usize {
        if self.out_len == 0 {
            0
        } else {
            self.in_len + 2 * self.out_len - 1
        }
    }

    fn eval(&self, key: &BitString, x: &BitString) -> Result<BitString> {
        if key.len() != self.key_len() || x.len() != self.in_len {
            return Err(IelError::Domain(format!(
                "toeplitz {}->{} given key {} and input {}",
                self.in_len,
                self.out_len,
                key.len(),
                x.len()
            )));
        }
        let n = self.in_len;
        let diag = n + self.out_len - 1;
        // T[i][j] = r[i - j + n - 1], so row i against x equals r[i..i+n] against reversed x.
        let rev = x.reversed();
        let mut out = BitString::zeros(self.out_len);
        for i in 0..self.out_len {
            let dot = key.slice(i, i + n)?.and(&rev)?.count_ones() % 2 == 1;
            out.set(i, dot ^ key.get(diag + i));
        }
        Ok(out)
    }

    fn label(&self) -> String {
        format!("toeplitz{}to{}", self.in_len, self.out_len)
    }
}

/// The polynomial family with `t = 2`, keyed by its coefficient bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolyPairwise {
    pub spec: HashFamilySpec,
}

impl PolyPairwise {
    pub fn new(in_len: usize, out_len: usize) -> Result<Self> {
        Ok(PolyPairwise { spec: HashFamilySpec::new(2, in_len, out_len, false)? })
    }

    pub fn member(&self, key: &BitString) -> Result<HashMember> {
        let w = self.spec.width() as usize;
        if key.len() != 2 * w {
            return Err(IelError::Domain(format!("key of length {} for a {}-bit description", key.len(), 2 * w)));
        }
        HashMember::from_coeffs(self.spec, vec![key.slice(0, w)?.to_u128()?, key.slice(w, 2 * w)?.to_u128()?])
    }
}

impl PairwiseFamily for PolyPairwise {
    fn in_len(&self) -> usize {
        self.spec.in_len
    }

    fn out_len(&self) -> usize {
        self.spec.out_len
    }

    fn key_len(&self) -> usize {
        self.spec.description_len()
    }

    fn eval(&self, key: &BitString, x: &BitString) -> Result<BitString> {
        self.member(key)?.evaluate(x)
    }

    fn label(&self) -> String {
        format!("poly{}to{}w{}", self.spec.in_len, self.spec.out_len, self.spec.width())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use iel_core::bits;

    #[test]
    fn toeplitz_matches_explicit_matrix() {
        let fam = ToeplitzFamily::new(3, 2);
        // diagonals r0..r3 = 1,0,1,1 ; offset b = 01
        let key = bits("1011").concat(&bits("01"));
        // T = [[r2 r1 r0],[r3 r2 r1]] = [[1 0 1],[1 1 0]]
        let x = bits("110");
        // Tx = 10, plus b
        assert_eq!(fam.eval(&key, &x).unwrap(), bits("11"));
    }

    #[test]
    fn empty_output_has_empty_key() {
        let fam = ToeplitzFamily::new(5, 0);
        assert_eq!(fam.key_len(), 0);
        assert_eq!(fam.eval(&BitString::new(), &bits("10101")).unwrap(), BitString::new());
    }
}
