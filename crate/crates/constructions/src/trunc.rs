use iel_core::{u16_bits, BitString, DomainFunction, FiniteFunction, IelError, Result};

/// `F(x, i) = f(x)_{1..i-1}` over `{0,1}^n x [n]`.
///
/// The output length is `i - 1`, so two inputs can only collide when they
/// carry the same index.
#[derive(Clone, Debug)]
pub struct TruncConstruction {
    f: FiniteFunction,
}

impl TruncConstruction {
    pub fn new(f: FiniteFunction) -> Result<Self> {
        if f.input_len() != f.output_len() {
            return Err(IelError::Domain(format!(
                "truncation needs a length-preserving f, got {} -> {}",
                f.input_len(),
                f.output_len()
            )));
        }
        if f.input_len() == 0 || f.input_len() > u16::MAX as usize {
            return Err(IelError::Domain(format!("input length {} out of range", f.input_len())));
        }
        Ok(TruncConstruction { f })
    }

    pub fn f(&self) -> &FiniteFunction {
        &self.f
    }

    pub fn n(&self) -> usize {
        self.f.input_len()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n() {
            return Err(IelError::Range(format!("index {i} outside [1, {}]", self.n())));
        }
        Ok(())
    }

    pub fn eval(&self, x: &BitString, i: usize) -> Result<BitString> {
        self.check_index(i)?;
        self.f.eval(x)?.prefix(i - 1)
    }

    /// Domain encoding `x || u16(i)`.
    pub fn encode(&self, x: &BitString, i: usize) -> BitString {
        x.concat(&u16_bits(i))
    }

    pub fn decode(&self, z: &BitString) -> Result<(BitString, usize)> {
        let n = self.n();
        if z.len() != n + 16 {
            return Err(IelError::Parse(format!("domain element of length {} (expected {})", z.len(), n + 16)));
        }
        let x = z.prefix(n)?;
        let i = z.slice(n, n + 16)?.to_u64()? as usize;
        self.check_index(i)?;
        Ok((x, i))
    }
}

/// `trunc_eval` as a free function.
pub fn trunc_eval(c: &TruncConstruction, x: &BitString, i: usize) -> Result<BitString> {
    c.eval(x, i)
}

impl DomainFunction for TruncConstruction {
    fn label(&self) -> String {
        format!("trunc({})", self.f.label())
    }

    fn domain_size(&self) -> u64 {
        (self.n() as u64) << self.n()
    }

    /// Index `(i - 1) * 2^n + x`.
    fn element(&self, idx: u64) -> BitString {
        let n = self.n();
        let x = idx & ((1u64 << n) - 1);
        let i = (idx >> n) as usize + 1;
        self.encode(&BitString::from_u64(x, n), i)
    }

    fn index_of(&self, z: &BitString) -> Option<u64> {
        let (x, i) = self.decode(z).ok()?;
        Some((((i - 1) as u64) << self.n()) | x.to_u64().ok()?)
    }

    fn image(&self, z: &BitString) -> BitString {
        let (x, i) = self.decode(z).expect("well-formed domain element");
        self.eval(&x, i).expect("decoded element is in range")
    }

    fn image_at(&self, idx: u64) -> BitString {
        let n = self.n();
        let x = idx & ((1u64 << n) - 1);
        let i = (idx >> n) as usize + 1;
        BitString::from_u64(self.f.eval_u64(x), n).prefix(i - 1).expect("i - 1 <= n")
    }
}
