use std::collections::BTreeMap;
use std::sync::Arc;

use iel_core::{u16_bits, BitString, IelError, Result, Rng};
use iel_entropy::{ratio, LogSum};
use iel_hashing::{HashFamilySpec, HashMember};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::sampler::{Sampler, SearchRelation};

/// Members of `family` whose encoded value at `v` starts with `i` zeros.
fn zero_prefix(g: &HashMember, v: u128, i: usize) -> bool {
    let out = g.spec().out_len;
    i == 0 || g.eval_encoded(v) >> (out - i) == 0
}

fn read_member(spec: &HashFamilySpec, bits: &BitString) -> Result<HashMember> {
    let w = spec.width() as usize;
    let coeffs = (0..spec.t)
        .map(|j| bits.slice(j * w, (j + 1) * w).and_then(|c| c.to_u128()))
        .collect::<Result<Vec<_>>>()?;
    HashMember::from_coeffs(*spec, coeffs).map_err(|e| IelError::Parse(e.to_string()))
}

/// A statement `(i, g)` of the hashed relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QStatement {
    pub i: usize,
    pub g: HashMember,
}

impl QStatement {
    /// A 16-bit `i`, then the coefficients of `g`.
    pub fn to_bits(&self) -> BitString {
        u16_bits(self.i).concat(&self.g.to_bits())
    }
}

/// `((i, g), (x, w))` is in `Q` iff `g(D(x))_1..i = 0^i` and `(D(x), w)` is in `R`.
pub struct RelationQ {
    sampler: Sampler,
    relation: Arc<dyn SearchRelation>,
    spec: HashFamilySpec,
    /// Instance, its field encoding and its first witness, per coin string.
    instance: Vec<u64>,
    encoded: Vec<u128>,
    witness: Vec<Option<BitString>>,
}

impl RelationQ {
    /// The hash family maps strings of at most `m` bits to `m` bits, `m` the coin length.
    pub fn new(sampler: Sampler, relation: Arc<dyn SearchRelation>) -> Result<Self> {
        let m = sampler.coin_len();
        let spec = HashFamilySpec::new(2, m, m, true)?;
        let out = sampler.out_len();
        let mut first: BTreeMap<u64, Option<BitString>> = BTreeMap::new();
        let mut instance = Vec::with_capacity(1 << m);
        let mut encoded = Vec::with_capacity(1 << m);
        let mut witness = Vec::with_capacity(1 << m);
        for x in 0..1u64 << m {
            let y = sampler.sample_u64(x);
            let yb = BitString::from_u64(y, out);
            instance.push(y);
            encoded.push(spec.encode_input(&yb)?);
            let w = first.entry(y).or_insert_with(|| relation.witnesses(&yb).into_iter().next()).clone();
            witness.push(w);
        }
        Ok(RelationQ { sampler, relation, spec, instance, encoded, witness })
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    pub fn relation(&self) -> &Arc<dyn SearchRelation> {
        &self.relation
    }

    pub fn spec(&self) -> &HashFamilySpec {
        &self.spec
    }

    /// Coin length, which is also the hash output length and the range of `i`.
    pub fn m(&self) -> usize {
        self.sampler.coin_len()
    }

    pub fn statement_len(&self) -> usize {
        16 + self.spec.description_len()
    }

    pub fn witness_len(&self) -> usize {
        self.m() + self.relation.witness_len()
    }

    pub fn instance_of(&self, x: u64) -> BitString {
        BitString::from_u64(self.instance[x as usize], self.sampler.out_len())
    }

    /// Field encoding of `y` for the prefix test.
    pub fn encode_instance(&self, y: &BitString) -> Result<u128> {
        self.spec.encode_input(y)
    }

    /// The smallest witness of `D(x)`, if any.
    pub fn canonical_witness(&self, x: u64) -> Option<&BitString> {
        self.witness[x as usize].as_ref()
    }

    pub fn statement(&self, i: usize, g: HashMember) -> Result<QStatement> {
        if i > self.m() {
            return Err(IelError::Range(format!("prefix {i} longer than {}", self.m())));
        }
        if *g.spec() != self.spec {
            return Err(IelError::Domain("hash member from another family".into()));
        }
        Ok(QStatement { i, g })
    }

    /// `i` uniform in `1..=m`, `g` uniform.
    pub fn random_statement(&self, rng: &mut Rng) -> QStatement {
        QStatement { i: rng.index(self.m()), g: self.spec.sample(rng) }
    }

    pub fn decode_statement(&self, bits: &BitString) -> Result<QStatement> {
        if bits.len() != self.statement_len() {
            return Err(IelError::Parse(format!("statement of {} bits, expected {}", bits.len(), self.statement_len())));
        }
        let i = bits.slice(0, 16)?.to_u64()? as usize;
        if i > self.m() {
            return Err(IelError::Parse(format!("prefix length {i} exceeds {}", self.m())));
        }
        Ok(QStatement { i, g: read_member(&self.spec, &bits.slice(16, bits.len())?)? })
    }

    /// `x || w`.
    pub fn decode_witness(&self, bits: &BitString) -> Result<(BitString, BitString)> {
        if bits.len() != self.witness_len() {
            return Err(IelError::Parse(format!("witness of {} bits, expected {}", bits.len(), self.witness_len())));
        }
        Ok((bits.slice(0, self.m())?, bits.slice(self.m(), bits.len())?))
    }

    /// Whether `g(y)` starts with `i` zeros.
    pub fn prefix_ok(&self, st: &QStatement, y: &BitString) -> Result<bool> {
        Ok(zero_prefix(&st.g, self.encode_instance(y)?, st.i))
    }

    pub fn holds(&self, st: &QStatement, x: &BitString, w: &BitString) -> bool {
        if x.len() != self.m() || st.i > self.m() || *st.g.spec() != self.spec {
            return false;
        }
        let xv = x.to_u64().unwrap();
        zero_prefix(&st.g, self.encoded[xv as usize], st.i) && self.relation.holds(&self.instance_of(xv), w)
    }

    /// `S(i, g)`: every `x` with some `w` making `((i, g), (x, w))` a member.
    pub fn solutions(&self, st: &QStatement) -> Vec<u64> {
        (0..1u64 << self.m())
            .filter(|&x| self.witness[x as usize].is_some() && zero_prefix(&st.g, self.encoded[x as usize], st.i))
            .collect()
    }

    /// For one `g`: the value `g(D(x))` of every coin string that has a witness.
    pub fn hashed(&self, g: &HashMember) -> Vec<Option<u128>> {
        (0..1usize << self.m())
            .map(|x| self.witness[x].as_ref().map(|_| g.eval_encoded(self.encoded[x])))
            .collect()
    }

    /// Every member of the family; only for small coin lengths.
    pub fn members(&self) -> Result<Vec<HashMember>> {
        Ok(self.spec.members()?.collect())
    }

    /// `E log2 |S(I, G)|` over `I` uniform in `1..=m` and `G` uniform, with `log 0 = -1`.
    pub fn real_avg_max_entropy(&self) -> Result<LogSum> {
        let m = self.m();
        let members = self.members()?;
        let hist = members
            .par_iter()
            .fold(BTreeMap::new, |mut acc: BTreeMap<u64, u64>, g| {
                let vals = self.hashed(g);
                for i in 1..=m {
                    let c = vals.iter().flatten().filter(|&&v| v >> (m - i) == 0).count() as u64;
                    *acc.entry(c).or_insert(0) += 1;
                }
                acc
            })
            .reduce(BTreeMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            });
        let total = (m * members.len()) as u64;
        Ok(hist.into_iter().map(|(c, w)| LogSum::log2_or_minus_one(c).scale(&ratio(w, total))).sum())
    }

    pub fn describe(&self) -> Value {
        json!({
            "relation": "Q",
            "sampler": self.sampler.describe(),
            "base": self.relation.describe(),
            "hash": {"t": self.spec.t, "in": self.spec.in_len, "out": self.spec.out_len, "width": self.spec.width()},
            "statement_bits": self.statement_len(),
            "witness_bits": self.witness_len(),
        })
    }
}

/// Bit-string form of the membership test; malformed encodings are parse errors.
pub fn q_membership(q: &RelationQ, statement: &BitString, witness: &BitString) -> Result<bool> {
    let st = q.decode_statement(statement)?;
    let (x, w) = q.decode_witness(witness)?;
    Ok(q.holds(&st, &x, &w))
}

/// A statement `(y, j, g)` of the doubly hashed relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VStatement {
    pub y: QStatement,
    pub j: usize,
    pub g: HashMember,
}

impl VStatement {
    /// A 16-bit `j`, the coefficients of `g`, then `y`.
    pub fn to_bits(&self) -> BitString {
        BitString::concat_all([&u16_bits(self.j), &self.g.to_bits(), &self.y.to_bits()])
    }
}

/// `((y, j, g), (x, w))` is in `V` iff `(y, (x, w))` is in `Q` and
/// `g(x)_1..j = 0^j`, projecting witnesses with `f(x, w) = x`.
pub struct RelationV {
    q: Arc<RelationQ>,
    spec: HashFamilySpec,
}

impl RelationV {
    /// `g` maps strings of at most `m` bits to `m + 2` bits.
    pub fn new(q: Arc<RelationQ>) -> Result<Self> {
        let m = q.m();
        let spec = HashFamilySpec::new(2, m, m + 2, true)?;
        Ok(RelationV { q, spec })
    }

    pub fn q(&self) -> &Arc<RelationQ> {
        &self.q
    }

    pub fn spec(&self) -> &HashFamilySpec {
        &self.spec
    }

    pub fn statement_len(&self) -> usize {
        16 + self.spec.description_len() + self.q.statement_len()
    }

    pub fn statement(&self, y: QStatement, j: usize, g: HashMember) -> Result<VStatement> {
        if j > self.q.m() + 2 {
            return Err(IelError::Range(format!("prefix {j} longer than {}", self.q.m() + 2)));
        }
        if *g.spec() != self.spec {
            return Err(IelError::Domain("hash member from another family".into()));
        }
        Ok(VStatement { y, j, g })
    }

    pub fn decode_statement(&self, bits: &BitString) -> Result<VStatement> {
        if bits.len() != self.statement_len() {
            return Err(IelError::Parse(format!("statement of {} bits, expected {}", bits.len(), self.statement_len())));
        }
        let j = bits.slice(0, 16)?.to_u64()? as usize;
        if j > self.q.m() + 2 {
            return Err(IelError::Parse(format!("prefix length {j} exceeds {}", self.q.m() + 2)));
        }
        let gl = self.spec.description_len();
        let g = read_member(&self.spec, &bits.slice(16, 16 + gl)?)?;
        let y = self.q.decode_statement(&bits.slice(16 + gl, bits.len())?)?;
        Ok(VStatement { y, j, g })
    }

    pub fn holds(&self, st: &VStatement, x: &BitString, w: &BitString) -> bool {
        if *st.g.spec() != self.spec || st.j > self.q.m() + 2 || !self.q.holds(&st.y, x, w) {
            return false;
        }
        match self.spec.encode_input(x) {
            Ok(v) => zero_prefix(&st.g, v, st.j),
            Err(_) => false,
        }
    }
}

pub fn v_membership(v: &RelationV, statement: &BitString, witness: &BitString) -> Result<bool> {
    let st = v.decode_statement(statement)?;
    let (x, w) = v.q().decode_witness(witness)?;
    Ok(v.holds(&st, &x, &w))
}
