use std::collections::BTreeMap;

use iel_core::{ceil_log2, BitFunction, BitString, FiniteFunction, IelError, Result};
use iel_entropy::LogSum;
use serde_json::{json, Value};

/// Longest coin string a toy sampler may use.
pub const MAX_COIN_BITS: usize = 20;

/// A sampler `D(1^n, .)` given by its table on `coin_len` coins.
#[derive(Clone, Debug)]
pub struct Sampler {
    name: String,
    n: u64,
    d: u32,
    table: FiniteFunction,
}

impl Sampler {
    /// `D = table` with security parameter `n` and exponent `d`; coins and
    /// outputs must fit in `n^d` bits.
    pub fn new(name: impl Into<String>, n: u64, d: u32, table: FiniteFunction) -> Result<Self> {
        let coins = table.input_len();
        if coins > MAX_COIN_BITS {
            return Err(IelError::Capacity(format!("{coins} coins, at most {MAX_COIN_BITS}")));
        }
        let bound = (n as u128).checked_pow(d).unwrap_or(u128::MAX);
        if coins as u128 > bound || table.output_len() > coins {
            return Err(IelError::Config(format!(
                "{coins} coins and {}-bit instances do not fit n^d = {n}^{d}",
                table.output_len()
            )));
        }
        Ok(Sampler { name: name.into(), n, d, table })
    }

    /// `D(x) = x`: the uniform distribution.
    pub fn identity(n: u64, d: u32, coins: usize) -> Result<Self> {
        Self::new("identity", n, d, FiniteFunction::identity(coins)?)
    }

    /// `D(x) = x_1..x_(coins - drop)`: every instance has `2^drop` preimages.
    pub fn truncation(n: u64, d: u32, coins: usize, drop: usize) -> Result<Self> {
        if drop > coins {
            return Err(IelError::Domain(format!("cannot drop {drop} of {coins} bits")));
        }
        let out = coins - drop;
        let table = (0..1u64 << coins).map(|x| x >> drop).collect();
        Self::new("truncation", n, d, FiniteFunction::from_table(coins, out, table, format!("trunc{drop}"))?)
    }

    /// Two instances, `0^len` with probability 3/4 and `1^len` with 1/4.
    pub fn planted_biased(n: u64, d: u32, coins: usize, len: usize) -> Result<Self> {
        if coins < 2 || len == 0 {
            return Err(IelError::Domain("planted sampler needs two coins and a nonempty instance".into()));
        }
        let ones = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        let cut = 3u64 << (coins - 2);
        let table = (0..1u64 << coins).map(|x| if x < cut { 0 } else { ones }).collect();
        Self::new("planted-biased", n, d, FiniteFunction::from_table(coins, len, table, "planted")?)
    }

    /// `D = f` on its coins.
    pub fn f_output(n: u64, d: u32, f: FiniteFunction) -> Result<Self> {
        Self::new(format!("f-output({})", f.label()), n, d, f)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn coin_len(&self) -> usize {
        self.table.input_len()
    }

    pub fn out_len(&self) -> usize {
        self.table.output_len()
    }

    pub fn table(&self) -> &FiniteFunction {
        &self.table
    }

    pub fn sample(&self, coins: &BitString) -> Result<BitString> {
        if coins.len() != self.coin_len() {
            return Err(IelError::Domain(format!("{} coins for a sampler on {}", coins.len(), self.coin_len())));
        }
        Ok(self.table.apply(coins))
    }

    pub fn sample_u64(&self, x: u64) -> u64 {
        self.table.eval_u64(x)
    }

    /// Number of coin strings mapping to each instance.
    pub fn counts(&self) -> BTreeMap<u64, u64> {
        let mut out = BTreeMap::new();
        for x in 0..1u64 << self.coin_len() {
            *out.entry(self.sample_u64(x)).or_insert(0) += 1;
        }
        out
    }

    /// `log2(1 / D(y))`, `None` outside the support.
    pub fn sample_entropy(&self, y: u64) -> Option<LogSum> {
        let c = *self.counts().get(&y)?;
        Some(LogSum::integer(self.coin_len() as i64) - LogSum::log2(c))
    }

    /// `floor(log2(1 / D(y)))` for an instance hit by `count` coin strings.
    pub fn entropy_floor(&self, count: u64) -> usize {
        self.coin_len() - ceil_log2(count) as usize
    }

    pub fn describe(&self) -> Value {
        json!({
            "name": self.name,
            "n": self.n,
            "d": self.d,
            "coins": self.coin_len(),
            "out": self.out_len(),
            "support": self.counts().len(),
        })
    }
}

/// A binary relation with a decidable membership test.
pub trait SearchRelation: Send + Sync {
    fn name(&self) -> String;
    fn witness_len(&self) -> usize;
    fn holds(&self, y: &BitString, w: &BitString) -> bool;
    /// Every witness of `y`, sorted; toy relations only.
    fn witnesses(&self, y: &BitString) -> Vec<BitString>;

    fn describe(&self) -> Value {
        json!({"name": self.name(), "witness": self.witness_len()})
    }
}

/// `R = {(f(w), w)}`.
#[derive(Clone, Debug)]
pub struct PreimageRelation {
    f: FiniteFunction,
    index: BTreeMap<u64, Vec<u64>>,
}

impl PreimageRelation {
    pub fn new(f: FiniteFunction) -> Self {
        let mut index: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for w in 0..1u64 << f.input_len() {
            index.entry(f.eval_u64(w)).or_default().push(w);
        }
        PreimageRelation { f, index }
    }

    pub fn function(&self) -> &FiniteFunction {
        &self.f
    }
}

impl SearchRelation for PreimageRelation {
    fn name(&self) -> String {
        format!("preimage({})", self.f.label())
    }

    fn witness_len(&self) -> usize {
        self.f.input_len()
    }

    fn holds(&self, y: &BitString, w: &BitString) -> bool {
        y.len() == self.f.output_len() && w.len() == self.f.input_len() && self.f.apply(w) == *y
    }

    fn witnesses(&self, y: &BitString) -> Vec<BitString> {
        if y.len() != self.f.output_len() {
            return Vec::new();
        }
        let n = self.f.input_len();
        y.to_u64()
            .ok()
            .and_then(|v| self.index.get(&v))
            .map(|ws| ws.iter().map(|&w| BitString::from_u64(w, n)).collect())
            .unwrap_or_default()
    }
}
