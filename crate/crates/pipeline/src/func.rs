use std::sync::Arc;

use iel_core::{BitFunction, BitString, FiniteFunction, IelError, Result, MAX_TABLE_BITS};
use iel_hashing::PairwiseFamily;
use rayon::prelude::*;
use serde_json::{json, Value};

/// Longest input or output the lazy pipeline functions accept.
pub const MAX_PIPELINE_BITS: usize = 1 << 40;

/// A pipeline stage that can describe itself.
pub trait Stage: BitFunction {
    fn describe(&self) -> Value;
}

/// A table- or evaluator-backed base function.
#[derive(Clone)]
pub struct Base(pub FiniteFunction);

impl BitFunction for Base {
    fn input_len(&self) -> usize {
        self.0.input_len()
    }

    fn output_len(&self) -> usize {
        self.0.output_len()
    }

    fn apply(&self, x: &BitString) -> BitString {
        self.0.apply(x)
    }

    fn label(&self) -> String {
        self.0.label().to_string()
    }
}

impl Stage for Base {
    fn describe(&self) -> Value {
        json!({"kind": "base", "label": self.0.label(), "in": self.input_len(), "out": self.output_len()})
    }
}

fn checked(len: usize, what: &str) -> Result<usize> {
    if len > MAX_PIPELINE_BITS {
        Err(IelError::Capacity(format!("{what} of {len} bits")))
    } else {
        Ok(len)
    }
}

/// `F_t(x_1..x_t) = (F(x_1), ..., F(x_t))`.
#[derive(Clone)]
pub struct DirectProduct {
    base: Arc<dyn Stage>,
    t: usize,
}

impl DirectProduct {
    pub fn base(&self) -> &Arc<dyn Stage> {
        &self.base
    }

    pub fn copies(&self) -> usize {
        self.t
    }
}

pub fn direct_product(base: Arc<dyn Stage>, t: usize) -> Result<DirectProduct> {
    if t == 0 {
        return Err(IelError::Domain("direct product of zero copies".into()));
    }
    for len in [base.input_len(), base.output_len()] {
        checked(len.checked_mul(t).ok_or_else(|| IelError::Capacity("product length overflows".into()))?, "product")?;
    }
    Ok(DirectProduct { base, t })
}

impl BitFunction for DirectProduct {
    fn input_len(&self) -> usize {
        self.base.input_len() * self.t
    }

    fn output_len(&self) -> usize {
        self.base.output_len() * self.t
    }

    fn apply(&self, x: &BitString) -> BitString {
        let n = self.base.input_len();
        let mut out = BitString::new();
        for i in 0..self.t {
            out.extend(&self.base.apply(&x.slice(i * n, (i + 1) * n).expect("block in range")));
        }
        out
    }

    fn label(&self) -> String {
        format!("({})^{}", self.base.label(), self.t)
    }
}

impl Stage for DirectProduct {
    fn describe(&self) -> Value {
        json!({"kind": "product", "t": self.t, "in": self.input_len(), "out": self.output_len(), "base": self.base.describe()})
    }
}

/// `F'(x, g) = (F(x), g, g(x))`; the input is `x || key(g)`.
#[derive(Clone)]
pub struct EntropyReduction {
    base: Arc<dyn Stage>,
    family: Arc<dyn PairwiseFamily>,
}

pub fn reduce_entropy(base: Arc<dyn Stage>, family: Arc<dyn PairwiseFamily>) -> Result<EntropyReduction> {
    if family.in_len() != base.input_len() {
        return Err(IelError::Domain(format!(
            "hash on {} bits for a function on {} bits",
            family.in_len(),
            base.input_len()
        )));
    }
    checked(base.input_len() + family.key_len(), "reduced input")?;
    checked(base.output_len() + family.key_len() + family.out_len(), "reduced output")?;
    Ok(EntropyReduction { base, family })
}

impl EntropyReduction {
    pub fn family(&self) -> &Arc<dyn PairwiseFamily> {
        &self.family
    }

    pub fn base(&self) -> &Arc<dyn Stage> {
        &self.base
    }

    /// Splits an input into `(x, key)`.
    pub fn split(&self, z: &BitString) -> (BitString, BitString) {
        let n = self.base.input_len();
        (z.slice(0, n).unwrap(), z.slice(n, z.len()).unwrap())
    }
}

impl BitFunction for EntropyReduction {
    fn input_len(&self) -> usize {
        self.base.input_len() + self.family.key_len()
    }

    fn output_len(&self) -> usize {
        self.base.output_len() + self.family.key_len() + self.family.out_len()
    }

    fn apply(&self, z: &BitString) -> BitString {
        let (x, key) = self.split(z);
        let gx = self.family.eval(&key, &x).expect("lengths fixed at construction");
        BitString::concat_all([&self.base.apply(&x), &key, &gx])
    }

    fn label(&self) -> String {
        format!("reduce-entropy[{}]({})", self.family.label(), self.base.label())
    }
}

impl Stage for EntropyReduction {
    fn describe(&self) -> Value {
        json!({
            "kind": "reduce-entropy",
            "hash": self.family.label(),
            "ell": self.family.out_len(),
            "hash_key": self.family.key_len(),
            "in": self.input_len(),
            "out": self.output_len(),
            "base": self.base.describe(),
        })
    }
}

/// `F'(x, g) = (g, g(F(x)))`; the input is `x || key(g)`.
#[derive(Clone)]
pub struct OutputReduction {
    base: Arc<dyn Stage>,
    family: Arc<dyn PairwiseFamily>,
}

pub fn reduce_output(base: Arc<dyn Stage>, family: Arc<dyn PairwiseFamily>) -> Result<OutputReduction> {
    if family.in_len() != base.output_len() {
        return Err(IelError::Domain(format!(
            "hash on {} bits for outputs of {} bits",
            family.in_len(),
            base.output_len()
        )));
    }
    checked(base.input_len() + family.key_len(), "reduced input")?;
    Ok(OutputReduction { base, family })
}

impl OutputReduction {
    pub fn family(&self) -> &Arc<dyn PairwiseFamily> {
        &self.family
    }

    pub fn base(&self) -> &Arc<dyn Stage> {
        &self.base
    }

    pub fn split(&self, z: &BitString) -> (BitString, BitString) {
        let n = self.base.input_len();
        (z.slice(0, n).unwrap(), z.slice(n, z.len()).unwrap())
    }
}

impl BitFunction for OutputReduction {
    fn input_len(&self) -> usize {
        self.base.input_len() + self.family.key_len()
    }

    fn output_len(&self) -> usize {
        self.family.key_len() + self.family.out_len()
    }

    fn apply(&self, z: &BitString) -> BitString {
        let (x, key) = self.split(z);
        let h = self.family.eval(&key, &self.base.apply(&x)).expect("lengths fixed at construction");
        key.concat(&h)
    }

    fn label(&self) -> String {
        format!("reduce-output[{}]({})", self.family.label(), self.base.label())
    }
}

impl Stage for OutputReduction {
    fn describe(&self) -> Value {
        json!({
            "kind": "reduce-output",
            "hash": self.family.label(),
            "hash_key": self.family.key_len(),
            "in": self.input_len(),
            "out": self.output_len(),
            "base": self.base.describe(),
        })
    }
}

/// Widens the input to `in_len` by copying the unused suffix to the output.
#[derive(Clone)]
pub struct Padded {
    inner: Arc<dyn Stage>,
    in_len: usize,
}

pub fn pad_input(inner: Arc<dyn Stage>, in_len: usize) -> Result<Padded> {
    if in_len < inner.input_len() {
        return Err(IelError::Domain(format!("cannot pad {} bits down to {in_len}", inner.input_len())));
    }
    Ok(Padded { inner, in_len: checked(in_len, "padded input")? })
}

impl BitFunction for Padded {
    fn input_len(&self) -> usize {
        self.in_len
    }

    fn output_len(&self) -> usize {
        self.inner.output_len() + self.in_len - self.inner.input_len()
    }

    fn apply(&self, x: &BitString) -> BitString {
        let n = self.inner.input_len();
        self.inner.apply(&x.slice(0, n).unwrap()).concat(&x.slice(n, self.in_len).unwrap())
    }

    fn label(&self) -> String {
        format!("pad{}({})", self.in_len, self.inner.label())
    }
}

impl Stage for Padded {
    fn describe(&self) -> Value {
        json!({"kind": "pad", "in": self.in_len, "out": self.output_len(), "inner": self.inner.describe()})
    }
}

/// Truth table of a stage with at most 24 input and 64 output bits.
pub fn tabulate(f: &dyn BitFunction) -> Result<FiniteFunction> {
    let (n, m) = (f.input_len(), f.output_len());
    if n > MAX_TABLE_BITS || m > 64 {
        return Err(IelError::Capacity(format!("cannot tabulate {n} -> {m} bits")));
    }
    let table: Vec<u64> = (0..1u64 << n)
        .into_par_iter()
        .map(|x| f.apply(&BitString::from_u64(x, n)).to_u64().expect("at most 64 bits"))
        .collect();
    FiniteFunction::from_table(n, m, table, f.label())
}
