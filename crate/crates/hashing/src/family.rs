use iel_core::{BitString, IelError, Result, Rng};
use rand::RngCore;

use crate::field::Gf2w;

const HSH_MAGIC: &[u8; 4] = b"HSH1";
const FLAG_VARIABLE: u8 = 1;

/// Parameters of a polynomial t-wise independent family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HashFamilySpec {
    pub t: usize,
    pub in_len: usize,
    pub out_len: usize,
    pub variable_length: bool,
    field: Gf2w,
}

impl HashFamilySpec {
    /// Uses the smallest supported field holding both the encoded input and the output.
    pub fn new(t: usize, in_len: usize, out_len: usize, variable_length: bool) -> Result<Self> {
        let enc = in_len + variable_length as usize;
        let field = Gf2w::for_bits(enc.max(out_len).max(1))?;
        Self::build(t, in_len, out_len, variable_length, field)
    }

    /// Same as [`HashFamilySpec::new`] with an explicit, possibly larger, field width.
    pub fn with_width(t: usize, in_len: usize, out_len: usize, variable_length: bool, w: u32) -> Result<Self> {
        Self::build(t, in_len, out_len, variable_length, Gf2w::new(w)?)
    }

    fn build(t: usize, in_len: usize, out_len: usize, variable_length: bool, field: Gf2w) -> Result<Self> {
        if t < 2 {
            return Err(IelError::Config(format!("independence degree {t} < 2")));
        }
        if t > 255 || in_len > u16::MAX as usize || out_len > u16::MAX as usize {
            return Err(IelError::Config("family parameters exceed the descriptor format".into()));
        }
        let enc = in_len + variable_length as usize;
        let w = field.width() as usize;
        if enc > w || out_len > w {
            return Err(IelError::Config(format!("field width {w} cannot hold {enc}-bit inputs or {out_len}-bit outputs")));
        }
        Ok(HashFamilySpec { t, in_len, out_len, variable_length, field })
    }

    pub fn field(&self) -> Gf2w {
        self.field
    }

    pub fn width(&self) -> u32 {
        self.field.width()
    }

    /// Bits of randomness per member, `t * w`.
    pub fn description_len(&self) -> usize {
        self.t * self.width() as usize
    }

    /// Number of input bits after the length-marking encoding.
    pub fn encoded_in_len(&self) -> usize {
        self.in_len + self.variable_length as usize
    }

    /// Field element of an input: its encoding, left aligned in `w` bits.
    pub fn encode_input(&self, x: &BitString) -> Result<u128> {
        let ok = if self.variable_length { x.len() <= self.in_len } else { x.len() == self.in_len };
        if !ok {
            return Err(IelError::Domain(format!("input of length {} for family on {} bits", x.len(), self.in_len)));
        }
        let mut v = x.to_u128()?;
        let mut len = x.len();
        if self.variable_length {
            v = (v << 1) | 1;
            len += 1;
            v <<= self.in_len + 1 - len;
            len = self.in_len + 1;
        }
        Ok(if len == 0 { 0 } else { v << (self.width() as usize - len) })
    }

    /// Leading `out_len` bits of a field element, as an integer.
    #[inline]
    pub fn truncate(&self, v: u128) -> u128 {
        if self.out_len == 0 {
            0
        } else {
            v >> (self.width() as usize - self.out_len)
        }
    }

    pub fn random_element(&self, rng: &mut Rng) -> u128 {
        let v = ((rng.next_u64() as u128) << 64) | rng.next_u64() as u128;
        v & self.field.mask()
    }

    pub fn sample(&self, rng: &mut Rng) -> HashMember {
        let coeffs = (0..self.t).map(|_| self.random_element(rng)).collect();
        HashMember { spec: *self, coeffs }
    }

    /// Uniform member with `g(x) = y`.
    pub fn sample_constrained(&self, x: &BitString, y: &BitString, rng: &mut Rng) -> Result<HashMember> {
        self.sample_through(&[(x, y)], rng)
    }

    /// Uniform member with `g(x1) = y1` and `g(x2) = y2`.
    pub fn sample_two_point(
        &self,
        x1: &BitString,
        y1: &BitString,
        x2: &BitString,
        y2: &BitString,
        rng: &mut Rng,
    ) -> Result<HashMember> {
        if x1 == x2 {
            if y1 != y2 {
                return Err(IelError::Infeasible("one input constrained to two outputs".into()));
            }
            return self.sample_constrained(x1, y1, rng);
        }
        self.sample_through(&[(x1, y1), (x2, y2)], rng)
    }

    /// Uniform member whose output on `x` starts with `prefix`.
    pub fn sample_prefix(&self, x: &BitString, prefix: &BitString, rng: &mut Rng) -> Result<HashMember> {
        let y = self.complete_prefix(prefix, rng)?;
        self.sample_constrained(x, &y, rng)
    }

    /// Uniform member with `g(x1)` and `g(x2)` sharing their first `i` bits.
    pub fn sample_equal_prefix(&self, x1: &BitString, x2: &BitString, i: usize, rng: &mut Rng) -> Result<HashMember> {
        if i > self.out_len {
            return Err(IelError::Range(format!("prefix {i} longer than output {}", self.out_len)));
        }
        if x1 == x2 {
            return Ok(self.sample(rng));
        }
        let p = rng.bits(i);
        let y1 = self.complete_prefix(&p, rng)?;
        let y2 = self.complete_prefix(&p, rng)?;
        self.sample_two_point(x1, &y1, x2, &y2, rng)
    }

    fn complete_prefix(&self, prefix: &BitString, rng: &mut Rng) -> Result<BitString> {
        if prefix.len() > self.out_len {
            return Err(IelError::Range(format!("prefix {} longer than output {}", prefix.len(), self.out_len)));
        }
        Ok(prefix.concat(&rng.bits(self.out_len - prefix.len())))
    }

    fn sample_through(&self, constraints: &[(&BitString, &BitString)], rng: &mut Rng) -> Result<HashMember> {
        if constraints.len() > self.t {
            return Err(IelError::Infeasible(format!("{} constraints for a {}-wise family", constraints.len(), self.t)));
        }
        let w = self.width() as usize;
        let mut points = Vec::with_capacity(self.t);
        for (x, y) in constraints {
            if y.len() != self.out_len {
                return Err(IelError::Domain(format!("target of length {} for {}-bit outputs", y.len(), self.out_len)));
            }
            let free = rng.bits(w - self.out_len).to_u128()?;
            let hi = if self.out_len == 0 { 0 } else { y.to_u128()? << (w - self.out_len) };
            points.push((self.encode_input(x)?, hi | free));
        }
        let mut candidate = 0u128;
        while points.len() < self.t {
            if points.iter().all(|&(p, _)| p != candidate) {
                points.push((candidate, self.random_element(rng)));
            }
            candidate += 1;
        }
        let coeffs = self.field.interpolate(&points)?;
        Ok(HashMember { spec: *self, coeffs })
    }

    /// `log2` of the family size.
    pub fn log2_size(&self) -> usize {
        self.description_len()
    }

    /// Every member, in coefficient order; only for families of at most 2^32 members.
    pub fn members(&self) -> Result<impl Iterator<Item = HashMember> + '_> {
        let bits = self.description_len();
        if bits > 32 {
            return Err(IelError::Capacity(format!("family of 2^{bits} members is too large to enumerate")));
        }
        let w = self.width();
        let mask = self.field.mask();
        Ok((0..1u64 << bits).map(move |code| {
            let coeffs = (0..self.t)
                .map(|j| ((code as u128) >> (w as usize * (self.t - 1 - j))) & mask)
                .collect();
            HashMember { spec: *self, coeffs }
        }))
    }
}

/// One member: polynomial coefficients, leading first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HashMember {
    spec: HashFamilySpec,
    coeffs: Vec<u128>,
}

impl HashMember {
    pub fn from_coeffs(spec: HashFamilySpec, coeffs: Vec<u128>) -> Result<Self> {
        if coeffs.len() != spec.t {
            return Err(IelError::Domain(format!("{} coefficients for a {}-wise family", coeffs.len(), spec.t)));
        }
        if coeffs.iter().any(|&c| c & !spec.field.mask() != 0) {
            return Err(IelError::Domain("coefficient outside the field".into()));
        }
        Ok(HashMember { spec, coeffs })
    }

    pub fn spec(&self) -> &HashFamilySpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[u128] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Full field value at an encoded input.
    #[inline]
    pub fn eval_field(&self, v: u128) -> u128 {
        self.spec.field.horner(&self.coeffs, v)
    }

    /// Truncated output at an encoded input, as an integer.
    #[inline]
    pub fn eval_encoded(&self, v: u128) -> u128 {
        self.spec.truncate(self.eval_field(v))
    }

    pub fn evaluate(&self, x: &BitString) -> Result<BitString> {
        let v = self.eval_encoded(self.spec.encode_input(x)?);
        Ok(BitString::from_u128(v, self.spec.out_len))
    }

    pub fn description_len(&self) -> usize {
        self.spec.description_len()
    }

    /// Coefficients as a bit string of length `t * w`.
    pub fn to_bits(&self) -> BitString {
        let w = self.spec.width() as usize;
        BitString::concat_all(self.coeffs.iter().map(|&c| BitString::from_u128(c, w)).collect::<Vec<_>>().iter())
    }

    /// "HSH1", u8 t, u16 in_len, u16 out_len, u8 flags, then t big-endian field elements.
    /// Flags: bit 0 marks variable-length inputs, bits 4..7 hold `log2(w / 8)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let w = self.spec.width();
        let mut out = HSH_MAGIC.to_vec();
        out.push(self.spec.t as u8);
        out.extend((self.spec.in_len as u16).to_be_bytes());
        out.extend((self.spec.out_len as u16).to_be_bytes());
        let wcode = (w / 8).trailing_zeros() as u8;
        out.push((wcode << 4) | if self.spec.variable_length { FLAG_VARIABLE } else { 0 });
        let nbytes = w as usize / 8;
        for &c in &self.coeffs {
            out.extend_from_slice(&c.to_be_bytes()[16 - nbytes..]);
        }
        out
    }

    /// Inverse of [`HashMember::to_bytes`]; returns the member and bytes consumed.
    pub fn from_bytes(bytes: &[u8]) -> Result<(HashMember, usize)> {
        if bytes.len() < 10 || &bytes[..4] != HSH_MAGIC {
            return Err(IelError::Parse("missing HSH1 header".into()));
        }
        let t = bytes[4] as usize;
        let in_len = u16::from_be_bytes([bytes[5], bytes[6]]) as usize;
        let out_len = u16::from_be_bytes([bytes[7], bytes[8]]) as usize;
        let flags = bytes[9];
        if flags & 0x0E != 0 {
            return Err(IelError::Parse(format!("unknown flag bits {flags:#x}")));
        }
        let w = 8u32 << (flags >> 4);
        let spec = HashFamilySpec::with_width(t, in_len, out_len, flags & FLAG_VARIABLE != 0, w)
            .map_err(|e| IelError::Parse(e.to_string()))?;
        let nbytes = w as usize / 8;
        let need = 10 + t * nbytes;
        if bytes.len() < need {
            return Err(IelError::Parse("truncated coefficients".into()));
        }
        let coeffs = bytes[10..need]
            .chunks(nbytes)
            .map(|c| c.iter().fold(0u128, |acc, &b| (acc << 8) | b as u128))
            .collect();
        Ok((HashMember::from_coeffs(spec, coeffs)?, need))
    }
}
