use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::bits::BitString;
use crate::error::{IelError, Result};
use crate::rng::Rng;

/// Largest input length for which a truth table is materialized.
pub const MAX_TABLE_BITS: usize = 24;
/// Largest output length stored in a table entry.
pub const MAX_TABLE_OUTPUT_BITS: usize = 64;

const FFN_MAGIC: &[u8; 4] = b"FFN1";

/// A deterministic map between bit strings of fixed lengths.
pub trait BitFunction: Send + Sync {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    /// Caller guarantees `x.len() == self.input_len()`.
    fn apply(&self, x: &BitString) -> BitString;
    fn label(&self) -> String;
}

/// A function on an explicitly enumerable domain carrying the uniform measure.
///
/// Domain elements are encoded as bit strings; `element` and `index_of` are
/// inverse bijections between `0..domain_size()` and the encodings.
pub trait DomainFunction: Send + Sync {
    fn label(&self) -> String;
    fn domain_size(&self) -> u64;
    fn element(&self, idx: u64) -> BitString;
    fn index_of(&self, z: &BitString) -> Option<u64>;
    fn image(&self, z: &BitString) -> BitString;

    /// Image of the element with index `idx`.
    fn image_at(&self, idx: u64) -> BitString {
        self.image(&self.element(idx))
    }
}

type Evaluator = Arc<dyn Fn(&BitString) -> BitString + Send + Sync>;

#[derive(Clone)]
enum Backing {
    Table(Arc<Vec<u64>>),
    Eval(Evaluator),
}

/// Explicit function `{0,1}^n -> {0,1}^m`, table- or evaluator-backed.
#[derive(Clone)]
pub struct FiniteFunction {
    n: usize,
    m: usize,
    label: String,
    backing: Backing,
}

impl fmt::Debug for FiniteFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.backing {
            Backing::Table(_) => "table",
            Backing::Eval(_) => "evaluator",
        };
        write!(f, "FiniteFunction({}: {} -> {}, {kind})", self.label, self.n, self.m)
    }
}

fn check_table_shape(n: usize, m: usize) -> Result<()> {
    if n > MAX_TABLE_BITS {
        return Err(IelError::Capacity(format!("table input length {n} exceeds {MAX_TABLE_BITS}")));
    }
    if m > MAX_TABLE_OUTPUT_BITS {
        return Err(IelError::Capacity(format!("table output length {m} exceeds {MAX_TABLE_OUTPUT_BITS}")));
    }
    Ok(())
}

fn mask(m: usize) -> u64 {
    if m == 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

impl FiniteFunction {
    pub fn from_table(n: usize, m: usize, table: Vec<u64>, label: impl Into<String>) -> Result<Self> {
        check_table_shape(n, m)?;
        if table.len() != 1usize << n {
            return Err(IelError::Domain(format!("table has {} entries, expected 2^{n}", table.len())));
        }
        if table.iter().any(|&v| v & !mask(m) != 0) {
            return Err(IelError::Domain(format!("table entry wider than {m} bits")));
        }
        Ok(FiniteFunction { n, m, label: label.into(), backing: Backing::Table(Arc::new(table)) })
    }

    pub fn from_evaluator<F>(n: usize, m: usize, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&BitString) -> BitString + Send + Sync + 'static,
    {
        FiniteFunction { n, m, label: label.into(), backing: Backing::Eval(Arc::new(f)) }
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_table_shape(n, n)?;
        Self::from_table(n, n, (0..1u64 << n).collect(), format!("identity{n}"))
    }

    pub fn constant(n: usize, m: usize, value: u64) -> Result<Self> {
        check_table_shape(n, m)?;
        Self::from_table(n, m, vec![value & mask(m); 1 << n], format!("const{n}to{m}"))
    }

    pub fn random_function(n: usize, m: usize, rng: &mut Rng) -> Result<Self> {
        check_table_shape(n, m)?;
        let table = (0..1u64 << n).map(|_| rng.next_bits(m)).collect();
        Self::from_table(n, m, table, format!("rand{n}to{m}/s{}.{}", rng.seed(), rng.stream_id()))
    }

    pub fn random_permutation(n: usize, rng: &mut Rng) -> Result<Self> {
        check_table_shape(n, n)?;
        let mut table: Vec<u64> = (0..1u64 << n).collect();
        table.shuffle(rng);
        Self::from_table(n, n, table, format!("perm{n}/s{}.{}", rng.seed(), rng.stream_id()))
    }

    pub fn input_len(&self) -> usize {
        self.n
    }

    pub fn output_len(&self) -> usize {
        self.m
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn table(&self) -> Option<&[u64]> {
        match &self.backing {
            Backing::Table(t) => Some(t),
            Backing::Eval(_) => None,
        }
    }

    pub fn eval(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.n {
            return Err(IelError::Domain(format!("input of length {} for function on {} bits", x.len(), self.n)));
        }
        Ok(match &self.backing {
            Backing::Table(t) => BitString::from_u64(t[x.to_u64()? as usize], self.m),
            Backing::Eval(f) => {
                let y = f(x);
                debug_assert_eq!(y.len(), self.m, "evaluator returned wrong length");
                y
            }
        })
    }

    /// Evaluation on integer-coded inputs; requires `m <= 64`.
    pub fn eval_u64(&self, x: u64) -> u64 {
        match &self.backing {
            Backing::Table(t) => t[x as usize],
            Backing::Eval(f) => f(&BitString::from_u64(x, self.n)).to_u64().expect("output fits u64"),
        }
    }

    /// Materializes the table by a full sweep.
    pub fn tabulate(&self) -> Result<FiniteFunction> {
        check_table_shape(self.n, self.m)?;
        if self.table().is_some() {
            return Ok(self.clone());
        }
        let table = (0..1u64 << self.n).map(|x| self.eval_u64(x)).collect();
        Self::from_table(self.n, self.m, table, self.label.clone())
    }

    /// Full-sweep comparison of two functions with equal shapes.
    pub fn agrees_with(&self, other: &FiniteFunction) -> Result<bool> {
        if self.n != other.n || self.m != other.m {
            return Ok(false);
        }
        check_table_shape(self.n, self.m)?;
        Ok((0..1u64 << self.n).all(|x| self.eval_u64(x) == other.eval_u64(x)))
    }

    pub fn is_bijection(&self) -> Result<bool> {
        check_table_shape(self.n, self.m)?;
        if self.n != self.m {
            return Ok(false);
        }
        let mut seen = vec![false; 1 << self.n];
        for x in 0..1u64 << self.n {
            let y = self.eval_u64(x) as usize;
            if seen[y] {
                return Ok(false);
            }
            seen[y] = true;
        }
        Ok(true)
    }

    /// Inverse table of a permutation.
    pub fn inverse(&self) -> Result<FiniteFunction> {
        if !self.is_bijection()? {
            return Err(IelError::Domain(format!("{} is not a bijection", self.label)));
        }
        let mut inv = vec![0u64; 1 << self.n];
        for x in 0..1u64 << self.n {
            inv[self.eval_u64(x) as usize] = x;
        }
        Self::from_table(self.n, self.n, inv, format!("{}^-1", self.label))
    }

    /// `other` after `self`.
    pub fn then(&self, other: &FiniteFunction) -> Result<FiniteFunction> {
        if self.m != other.n {
            return Err(IelError::Domain("composition length mismatch".into()));
        }
        let table = (0..1u64 << self.n).map(|x| other.eval_u64(self.eval_u64(x))).collect();
        Self::from_table(self.n, other.m, table, format!("{}.{}", other.label, self.label))
    }

    /// Preimage counts indexed by output value (`m <= 24`).
    pub fn preimage_counts(&self) -> Result<Vec<u64>> {
        check_table_shape(self.n, self.m)?;
        if self.m > MAX_TABLE_BITS {
            return Err(IelError::Capacity(format!("output length {} too wide for a count array", self.m)));
        }
        let mut counts = vec![0u64; 1 << self.m];
        for x in 0..1u64 << self.n {
            counts[self.eval_u64(x) as usize] += 1;
        }
        Ok(counts)
    }

    /// Truth-table file bytes: "FFN1", u16 n, u16 m, then 2^n packed outputs.
    pub fn to_ffn_bytes(&self) -> Result<Vec<u8>> {
        check_table_shape(self.n, self.m)?;
        let width = self.m.div_ceil(8);
        let mut out = Vec::with_capacity(8 + (width << self.n));
        out.extend_from_slice(FFN_MAGIC);
        out.extend((self.n as u16).to_be_bytes());
        out.extend((self.m as u16).to_be_bytes());
        for x in 0..1u64 << self.n {
            out.extend(BitString::from_u64(self.eval_u64(x), self.m).to_bytes());
        }
        Ok(out)
    }

    pub fn from_ffn_bytes(bytes: &[u8], label: impl Into<String>) -> Result<FiniteFunction> {
        if bytes.len() < 8 || &bytes[..4] != FFN_MAGIC {
            return Err(IelError::Parse("missing FFN1 header".into()));
        }
        let n = u16::from_be_bytes([bytes[4], bytes[5]]) as usize;
        let m = u16::from_be_bytes([bytes[6], bytes[7]]) as usize;
        check_table_shape(n, m)?;
        let width = m.div_ceil(8);
        let body = &bytes[8..];
        if body.len() != width << n {
            return Err(IelError::Parse(format!("body has {} bytes, expected {}", body.len(), width << n)));
        }
        let mut table = Vec::with_capacity(1 << n);
        for chunk in body.chunks(width.max(1)).take(1 << n) {
            let chunk = if width == 0 { &[][..] } else { chunk };
            let v = BitString::from_bytes(chunk, m)?;
            table.push(v.to_u64()?);
        }
        if width == 0 {
            table = vec![0; 1 << n];
        }
        for (x, &y) in table.iter().enumerate() {
            if BitString::from_u64(y, m).to_bytes() != body[x * width..(x + 1) * width] {
                return Err(IelError::Parse("non-zero padding bits in table entry".into()));
            }
        }
        FiniteFunction::from_table(n, m, table, label)
    }

    pub fn write_ffn(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_ffn_bytes()?)?;
        Ok(())
    }

    pub fn read_ffn(path: &Path) -> Result<FiniteFunction> {
        let bytes = std::fs::read(path)?;
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        FiniteFunction::from_ffn_bytes(&bytes, label)
    }
}

impl BitFunction for FiniteFunction {
    fn input_len(&self) -> usize {
        self.n
    }

    fn output_len(&self) -> usize {
        self.m
    }

    fn apply(&self, x: &BitString) -> BitString {
        self.eval(x).expect("input length checked by caller")
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

impl DomainFunction for FiniteFunction {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn domain_size(&self) -> u64 {
        1u64 << self.n
    }

    fn element(&self, idx: u64) -> BitString {
        BitString::from_u64(idx, self.n)
    }

    fn index_of(&self, z: &BitString) -> Option<u64> {
        (z.len() == self.n).then(|| z.to_u64().ok()).flatten()
    }

    fn image(&self, z: &BitString) -> BitString {
        self.eval(z).expect("domain element")
    }

    fn image_at(&self, idx: u64) -> BitString {
        BitString::from_u64(self.eval_u64(idx), self.m)
    }
}

trait NextBits {
    fn next_bits(&mut self, m: usize) -> u64;
}

impl NextBits for Rng {
    fn next_bits(&mut self, m: usize) -> u64 {
        use rand::RngCore;
        self.next_u64() & mask(m)
    }
}

/// Partition of a finite domain into the preimage classes `F^-1(F(z))`.
#[derive(Clone, Debug)]
pub struct PreimageIndex {
    class_of: Vec<u32>,
    members: Vec<Vec<u64>>,
    outputs: Vec<BitString>,
    lookup: HashMap<BitString, u32>,
}

impl PreimageIndex {
    pub fn build(f: &dyn DomainFunction) -> Result<PreimageIndex> {
        let size = f.domain_size();
        if size > 1 << MAX_TABLE_BITS {
            return Err(IelError::Capacity(format!("domain of size {size} too large to index")));
        }
        let mut lookup: HashMap<BitString, u32> = HashMap::new();
        let mut class_of = Vec::with_capacity(size as usize);
        let mut members: Vec<Vec<u64>> = Vec::new();
        let mut outputs = Vec::new();
        for idx in 0..size {
            let y = f.image_at(idx);
            let next = members.len() as u32;
            let c = *lookup.entry(y.clone()).or_insert_with(|| {
                outputs.push(y);
                next
            });
            if c as usize == members.len() {
                members.push(Vec::new());
            }
            members[c as usize].push(idx);
            class_of.push(c);
        }
        Ok(PreimageIndex { class_of, members, outputs, lookup })
    }

    pub fn domain_size(&self) -> u64 {
        self.class_of.len() as u64
    }

    pub fn class_count(&self) -> usize {
        self.members.len()
    }

    pub fn class_of(&self, idx: u64) -> usize {
        self.class_of[idx as usize] as usize
    }

    /// Domain indices in the class of `idx`.
    pub fn siblings(&self, idx: u64) -> &[u64] {
        &self.members[self.class_of(idx)]
    }

    pub fn class_members(&self, class: usize) -> &[u64] {
        &self.members[class]
    }

    pub fn class_output(&self, class: usize) -> &BitString {
        &self.outputs[class]
    }

    pub fn class_for_output(&self, y: &BitString) -> Option<usize> {
        self.lookup.get(y).map(|&c| c as usize)
    }

    /// `|F^-1(F(z))|` for the element with index `idx`.
    pub fn class_size(&self, idx: u64) -> u64 {
        self.siblings(idx).len() as u64
    }

    /// Class size -> number of domain elements lying in classes of that size.
    pub fn size_histogram(&self) -> BTreeMap<u64, u64> {
        let mut h = BTreeMap::new();
        for m in &self.members {
            *h.entry(m.len() as u64).or_insert(0) += m.len() as u64;
        }
        h
    }
}
