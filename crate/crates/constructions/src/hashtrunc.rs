use std::cell::RefCell;
use std::collections::BTreeSet;

use iel_core::{u16_bits, BitString, FiniteFunction, IelError, Result, Rng};
use iel_hashing::{HashFamilySpec, HashMember};
use num_rational::BigRational;

use crate::light::LightThreshold;

/// Largest `n` for the exhaustive sweeps.
pub const MAX_SWEEP_N: usize = 12;
/// Largest number of non-constant coefficient bits swept.
pub const MAX_SWEEP_BITS: usize = 24;

/// `F(x, g, i) = (g(f(x))_{1..i}, g, i)` over `{0,1}^n x G x [n]`.
#[derive(Clone, Debug)]
pub struct HashTruncConstruction {
    f: FiniteFunction,
    family: HashFamilySpec,
}

impl HashTruncConstruction {
    pub fn new(f: FiniteFunction, family: HashFamilySpec) -> Result<Self> {
        let n = f.input_len();
        if f.output_len() != n {
            return Err(IelError::Domain(format!("hashing needs a length-preserving f, got {n} -> {}", f.output_len())));
        }
        if n == 0 || n > u16::MAX as usize {
            return Err(IelError::Domain(format!("input length {n} out of range")));
        }
        if family.t < 3 {
            return Err(IelError::Config(format!("need a 3-wise family, got {}-wise", family.t)));
        }
        if family.in_len != n || family.out_len != n || family.variable_length {
            return Err(IelError::Config(format!(
                "family maps {} -> {} bits, construction needs {n} -> {n}",
                family.in_len, family.out_len
            )));
        }
        Ok(HashTruncConstruction { f, family })
    }

    /// Three-wise family over the smallest field holding `n` bits.
    pub fn new_default(f: FiniteFunction) -> Result<Self> {
        let n = f.input_len();
        let family = HashFamilySpec::new(3, n, n, false)?;
        Self::new(f, family)
    }

    pub fn f(&self) -> &FiniteFunction {
        &self.f
    }

    pub fn family(&self) -> &HashFamilySpec {
        &self.family
    }

    pub fn n(&self) -> usize {
        self.f.input_len()
    }

    fn check(&self, g: &HashMember, i: usize) -> Result<()> {
        if i == 0 || i > self.n() {
            return Err(IelError::Range(format!("index {i} outside [1, {}]", self.n())));
        }
        if g.spec() != &self.family {
            return Err(IelError::Domain("hash member from a different family".into()));
        }
        Ok(())
    }

    /// First output component `g(f(x))_{1..i}`.
    pub fn hashed_prefix(&self, x: &BitString, g: &HashMember, i: usize) -> Result<BitString> {
        self.check(g, i)?;
        g.evaluate(&self.f.eval(x)?)?.prefix(i)
    }

    pub fn eval(&self, x: &BitString, g: &HashMember, i: usize) -> Result<(BitString, HashMember, usize)> {
        Ok((self.hashed_prefix(x, g, i)?, g.clone(), i))
    }

    /// Bits in an encoded domain element: `x || HSH1 bytes || u16 i`.
    pub fn domain_len(&self) -> usize {
        self.n() + 80 + self.family.description_len() + 16
    }

    pub fn encode(&self, x: &BitString, g: &HashMember, i: usize) -> BitString {
        let bytes = g.to_bytes();
        let gb = BitString::from_bytes(&bytes, bytes.len() * 8).expect("whole bytes");
        BitString::concat_all([x, &gb, &u16_bits(i)])
    }

    pub fn decode(&self, z: &BitString) -> Result<(BitString, HashMember, usize)> {
        let n = self.n();
        if z.len() != self.domain_len() {
            return Err(IelError::Parse(format!("domain element of length {} (expected {})", z.len(), self.domain_len())));
        }
        let x = z.prefix(n)?;
        let gb = z.slice(n, z.len() - 16)?.to_bytes();
        let (g, used) = HashMember::from_bytes(&gb)?;
        if used != gb.len() {
            return Err(IelError::Parse("trailing bytes after hash member".into()));
        }
        let i = z.slice(z.len() - 16, z.len())?.to_u64()? as usize;
        self.check(&g, i)?;
        Ok((x, g, i))
    }

    /// Output encoding `prefix || member bits || u16 i`; the fixed-width tail
    /// determines `(g, i)`.
    pub fn encode_output(&self, prefix: &BitString, g: &HashMember, i: usize) -> BitString {
        BitString::concat_all([prefix, &g.to_bits(), &u16_bits(i)])
    }

    /// Encoded output of an encoded domain element.
    pub fn image(&self, z: &BitString) -> Result<BitString> {
        let (x, g, i) = self.decode(z)?;
        Ok(self.encode_output(&self.hashed_prefix(&x, &g, i)?, &g, i))
    }

    /// Uniform `(x, g, i)`, components independent.
    pub fn sample_domain(&self, rng: &mut Rng) -> (BitString, HashMember, usize) {
        let x = rng.bits(self.n());
        let g = self.family.sample(rng);
        let i = rng.index(self.n());
        (x, g, i)
    }

    /// All `x'` with `F(x', g, i) = F(x, g, i)`, in increasing order.
    pub fn siblings(&self, x: &BitString, g: &HashMember, i: usize) -> Result<Vec<BitString>> {
        self.check(g, i)?;
        let n = self.n();
        if n > MAX_SWEEP_N {
            return Err(IelError::Capacity(format!("sibling sweep over 2^{n} inputs")));
        }
        let outs = member_outputs(&self.family, g.coeffs(), n);
        let shift = n - i;
        let target = outs[self.f.eval_u64(x.to_u64()?) as usize] >> shift;
        Ok((0..1u64 << n)
            .filter(|&xp| outs[self.f.eval_u64(xp) as usize] >> shift == target)
            .map(|xp| BitString::from_u64(xp, n))
            .collect())
    }

    /// `L(x, g, i)` as encoded domain elements: same `(g, i)`, matching prefix,
    /// and `f(x')` in `tilde-L(f(x), i)`.
    pub fn l_set(&self, x: &BitString, g: &HashMember, i: usize, c: &BigRational) -> Result<BTreeSet<BitString>> {
        self.check(g, i)?;
        let th = LightThreshold::new(self.n(), i, c)?;
        let counts = self.f.preimage_counts()?;
        let y = self.f.eval(x)?;
        Ok(self
            .siblings(x, g, i)?
            .into_iter()
            .filter(|xp| {
                let yp = self.f.eval_u64(xp.to_u64().expect("n-bit input"));
                yp == y.to_u64().expect("n-bit output") || th.admits(counts[yp as usize])
            })
            .map(|xp| self.encode(&xp, g, i))
            .collect())
    }

    /// Members with zero constant term. Prefix-collision structure does not
    /// depend on the constant term (it XORs every output), so exact averages
    /// over the family equal averages over these.
    pub fn quotient_members(&self) -> Result<impl Iterator<Item = Vec<u128>> + '_> {
        let w = self.family.width() as usize;
        let bits = (self.family.t - 1) * w;
        if bits > MAX_SWEEP_BITS {
            return Err(IelError::Capacity(format!("sweep over 2^{bits} members")));
        }
        let t = self.family.t;
        let mask = self.family.field().mask();
        Ok((0..1u64 << bits).map(move |code| {
            let mut coeffs: Vec<u128> = (0..t - 1).map(|j| ((code as u128) >> (w * (t - 2 - j))) & mask).collect();
            coeffs.push(0);
            coeffs
        }))
    }

    /// Counts of the first component over all `(x, g)` for fixed `i`, by full
    /// enumeration of the family.
    pub fn first_component_counts(&self, i: usize) -> Result<Vec<u64>> {
        let n = self.n();
        if i == 0 || i > n {
            return Err(IelError::Range(format!("index {i} outside [1, {n}]")));
        }
        if n > MAX_SWEEP_N || self.family.description_len() > 32 {
            return Err(IelError::Capacity("family too large to enumerate".into()));
        }
        let counts = self.f.preimage_counts()?;
        let mut out = vec![0u64; 1 << i];
        // the constant term XORs the truncated output, so each quotient member
        // is evaluated once and shifted by every constant
        for coeffs in self.quotient_members()? {
            let outs = member_outputs(&self.family, &coeffs, n);
            for c in 0..1u128 << self.family.width() {
                let shift = self.family.truncate(c) as u64;
                for (y, &k) in counts.iter().enumerate() {
                    out[((outs[y] ^ shift) >> (n - i)) as usize] += k;
                }
            }
        }
        Ok(out)
    }
}

/// `hashtrunc_eval` as a free function.
pub fn hashtrunc_eval(
    c: &HashTruncConstruction,
    x: &BitString,
    g: &HashMember,
    i: usize,
) -> Result<(BitString, HashMember, usize)> {
    c.eval(x, g, i)
}

/// Multiplication table for small fields.
pub(crate) struct MulTable {
    w: usize,
    table: Vec<u16>,
}

impl MulTable {
    pub(crate) fn new(spec: &HashFamilySpec) -> Option<MulTable> {
        let w = spec.width() as usize;
        if w > 8 {
            return None;
        }
        let field = spec.field();
        let size = 1usize << w;
        let mut table = vec![0u16; size * size];
        for a in 0..size {
            for b in 0..size {
                table[(a << w) | b] = field.mul(a as u128, b as u128) as u16;
            }
        }
        Some(MulTable { w, table })
    }

    #[inline]
    fn mul(&self, a: u128, b: u128) -> u128 {
        self.table[((a as usize) << self.w) | b as usize] as u128
    }
}

/// Truncated outputs `g(y)` for every `y` in `{0,1}^n`, as integers.
pub fn member_outputs(spec: &HashFamilySpec, coeffs: &[u128], n: usize) -> Vec<u64> {
    struct Cache {
        spec: HashFamilySpec,
        n: usize,
        table: Option<MulTable>,
        inputs: Vec<u128>,
    }
    thread_local! {
        static CACHE: RefCell<Option<Cache>> = const { RefCell::new(None) };
    }
    CACHE.with(|cell| {
        let mut slot = cell.borrow_mut();
        if slot.as_ref().map(|c| c.spec != *spec || c.n != n).unwrap_or(true) {
            let inputs = (0..1u64 << n)
                .map(|y| spec.encode_input(&BitString::from_u64(y, n)).expect("n-bit input"))
                .collect();
            *slot = Some(Cache { spec: *spec, n, table: MulTable::new(spec), inputs });
        }
        let cache = slot.as_ref().unwrap();
        let field = spec.field();
        cache
            .inputs
            .iter()
            .map(|&v| {
                let mut acc = 0u128;
                for &c in coeffs {
                    acc = match &cache.table {
                        Some(t) => t.mul(acc, v),
                        None => field.mul(acc, v),
                    } ^ c;
                }
                spec.truncate(acc) as u64
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use iel_core::bits;

    fn small() -> HashTruncConstruction {
        let f = FiniteFunction::random_function(4, 4, &mut Rng::new(9, 1)).unwrap();
        HashTruncConstruction::new_default(f).unwrap()
    }

    #[test]
    fn prefix_has_length_i() {
        let c = small();
        let g = c.family().sample(&mut Rng::new(1, 1));
        for i in 1..=4 {
            let (p, g2, j) = c.eval(&bits("0110"), &g, i).unwrap();
            assert_eq!(p.len(), i);
            assert_eq!((g2, j), (g.clone(), i));
        }
        assert!(c.eval(&bits("0110"), &g, 0).is_err());
        assert!(c.eval(&bits("0110"), &g, 5).is_err());
    }

    #[test]
    fn zero_member_gives_zero_prefix() {
        let c = small();
        let g = HashMember::from_coeffs(*c.family(), vec![0; 3]).unwrap();
        for x in 0..16 {
            assert!(c.hashed_prefix(&BitString::from_u64(x, 4), &g, 3).unwrap().is_zero());
        }
    }

    #[test]
    fn encoding_round_trips() {
        let c = small();
        let mut rng = Rng::new(2, 2);
        for _ in 0..20 {
            let (x, g, i) = c.sample_domain(&mut rng);
            let z = c.encode(&x, &g, i);
            assert_eq!(z.len(), c.domain_len());
            assert_eq!(c.decode(&z).unwrap(), (x.clone(), g.clone(), i));
            let out = c.image(&z).unwrap();
            assert_eq!(out, c.encode_output(&c.hashed_prefix(&x, &g, i).unwrap(), &g, i));
        }
    }

    #[test]
    fn table_and_field_agree() {
        let c = small();
        let mut rng = Rng::new(4, 4);
        for _ in 0..10 {
            let g = c.family().sample(&mut rng);
            let outs = member_outputs(c.family(), g.coeffs(), 4);
            for y in 0..16u64 {
                let direct = g.evaluate(&BitString::from_u64(y, 4)).unwrap().to_u64().unwrap();
                assert_eq!(outs[y as usize], direct);
            }
        }
    }
}
