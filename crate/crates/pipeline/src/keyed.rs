use std::sync::Arc;

use iel_core::{BitString, IelError, Result, Rng};
use serde_json::{json, Value};

use crate::func::Stage;

/// A keyed hash family `{F_y : {0,1}^in -> {0,1}^out}`.
pub trait KeyedFamily: Send + Sync {
    fn key_len(&self) -> usize;
    fn in_len(&self) -> usize;
    fn out_len(&self) -> usize;
    fn eval(&self, key: &BitString, x: &BitString) -> Result<BitString>;
    fn label(&self) -> String;
    fn describe(&self) -> Value;

    fn sample_key(&self, rng: &mut Rng) -> BitString {
        rng.bits(self.key_len())
    }

    fn shrinks(&self) -> bool {
        self.out_len() < self.in_len()
    }
}

fn check_lengths(fam: &dyn KeyedFamily, key: &BitString, x: &BitString) -> Result<()> {
    if key.len() != fam.key_len() || x.len() != fam.in_len() {
        return Err(IelError::Domain(format!(
            "{} takes a {}-bit key and {}-bit input, got {} and {}",
            fam.label(),
            fam.key_len(),
            fam.in_len(),
            key.len(),
            x.len()
        )));
    }
    Ok(())
}

/// `F'_y(x) = F(y xor x)`.
#[derive(Clone)]
pub struct RandomShift {
    f: Arc<dyn Stage>,
}

pub fn random_shift(f: Arc<dyn Stage>) -> RandomShift {
    RandomShift { f }
}

impl RandomShift {
    pub fn function(&self) -> &Arc<dyn Stage> {
        &self.f
    }

    /// A target collision `(x0, x1)` under key `y` as a collision of `F`.
    pub fn transport(&self, y: &BitString, x0: &BitString, x1: &BitString) -> Result<(BitString, BitString)> {
        Ok((y.xor(x0)?, y.xor(x1)?))
    }
}

impl KeyedFamily for RandomShift {
    fn key_len(&self) -> usize {
        self.f.input_len()
    }

    fn in_len(&self) -> usize {
        self.f.input_len()
    }

    fn out_len(&self) -> usize {
        self.f.output_len()
    }

    fn eval(&self, key: &BitString, x: &BitString) -> Result<BitString> {
        check_lengths(self, key, x)?;
        Ok(self.f.apply(&key.xor(x)?))
    }

    fn label(&self) -> String {
        format!("shift({})", self.f.label())
    }

    fn describe(&self) -> Value {
        json!({"kind": "shift", "key": self.key_len(), "in": self.in_len(), "out": self.out_len(), "function": self.f.describe()})
    }
}

/// 2-adic valuation of `i >= 1`.
pub fn nu(i: usize) -> usize {
    i.trailing_zeros() as usize
}

/// Masks needed for `blocks` blocks: `floor(log2 blocks) + 1`, or none.
pub fn mask_count(blocks: usize) -> usize {
    if blocks == 0 {
        0
    } else {
        (usize::BITS - blocks.leading_zeros()) as usize
    }
}

/// A colliding pair of base inputs at one chaining step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseCollision {
    /// Block index, from 1.
    pub block: usize,
    pub u0: BitString,
    pub u1: BitString,
}

/// Mask-chained extension of a base family `{0,1}^(L+b) -> {0,1}^L` to
/// inputs `h_0 || m_1 || ... || m_T` of `L + T b` bits. Block `i` hashes
/// `(h_{i-1} xor mu_{nu(i)}) || m_i`. The key is the base key then the masks.
#[derive(Clone)]
pub struct ShoupExtend {
    base: Arc<dyn KeyedFamily>,
    blocks: usize,
}

pub fn shoup_extend(base: Arc<dyn KeyedFamily>, blocks: usize) -> Result<ShoupExtend> {
    if base.in_len() <= base.out_len() {
        return Err(IelError::Domain(format!(
            "base {} does not shrink ({} -> {})",
            base.label(),
            base.in_len(),
            base.out_len()
        )));
    }
    let b = base.in_len() - base.out_len();
    blocks
        .checked_mul(b)
        .and_then(|v| v.checked_add(base.out_len()))
        .filter(|&v| v <= crate::func::MAX_PIPELINE_BITS)
        .ok_or_else(|| IelError::Capacity(format!("{blocks} blocks of {b} bits")))?;
    Ok(ShoupExtend { base, blocks })
}

impl ShoupExtend {
    pub fn base(&self) -> &Arc<dyn KeyedFamily> {
        &self.base
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn block_bits(&self) -> usize {
        self.base.in_len() - self.base.out_len()
    }

    pub fn masks(&self) -> usize {
        mask_count(self.blocks)
    }

    fn split_key(&self, key: &BitString) -> (BitString, Vec<BitString>) {
        let k = self.base.key_len();
        let l = self.base.out_len();
        let masks = (0..self.masks()).map(|j| key.slice(k + j * l, k + (j + 1) * l).unwrap()).collect();
        (key.slice(0, k).unwrap(), masks)
    }

    /// The base inputs fed at every step, in order.
    pub fn chain(&self, key: &BitString, x: &BitString) -> Result<(Vec<BitString>, BitString)> {
        check_lengths(self, key, x)?;
        let (bk, masks) = self.split_key(key);
        let l = self.base.out_len();
        let b = self.block_bits();
        let mut h = x.slice(0, l)?;
        let mut inputs = Vec::with_capacity(self.blocks);
        for i in 1..=self.blocks {
            let u = h.xor(&masks[nu(i)])?.concat(&x.slice(l + (i - 1) * b, l + i * b)?);
            h = self.base.eval(&bk, &u)?;
            inputs.push(u);
        }
        Ok((inputs, h))
    }

    /// From two distinct inputs with equal output, a base collision under the
    /// base key, verified by evaluation. `None` if the pair does not collide.
    pub fn base_collision(&self, key: &BitString, x0: &BitString, x1: &BitString) -> Result<Option<BaseCollision>> {
        if x0 == x1 {
            return Ok(None);
        }
        let (c0, h0) = self.chain(key, x0)?;
        let (c1, h1) = self.chain(key, x1)?;
        if h0 != h1 {
            return Ok(None);
        }
        let bk = key.slice(0, self.base.key_len())?;
        for i in (1..=self.blocks).rev() {
            if c0[i - 1] != c1[i - 1] {
                let (u0, u1) = (c0[i - 1].clone(), c1[i - 1].clone());
                if self.base.eval(&bk, &u0)? != self.base.eval(&bk, &u1)? {
                    return Err(IelError::Contract("chaining values diverged before the last block".into()));
                }
                return Ok(Some(BaseCollision { block: i, u0, u1 }));
            }
        }
        // equal base inputs everywhere force equal h_0 and blocks
        Err(IelError::Contract("distinct inputs with identical chains".into()))
    }
}

impl KeyedFamily for ShoupExtend {
    fn key_len(&self) -> usize {
        self.base.key_len() + self.masks() * self.base.out_len()
    }

    fn in_len(&self) -> usize {
        self.base.out_len() + self.blocks * self.block_bits()
    }

    fn out_len(&self) -> usize {
        self.base.out_len()
    }

    fn eval(&self, key: &BitString, x: &BitString) -> Result<BitString> {
        Ok(self.chain(key, x)?.1)
    }

    fn label(&self) -> String {
        format!("shoup{}({})", self.blocks, self.base.label())
    }

    fn describe(&self) -> Value {
        json!({
            "kind": "shoup",
            "blocks": self.blocks,
            "masks": self.masks(),
            "key": self.key_len(),
            "in": self.in_len(),
            "out": self.out_len(),
            "base": self.base.describe(),
        })
    }
}

/// All members evaluated on the same input, outputs concatenated in order.
#[derive(Clone)]
pub struct Concat {
    members: Vec<Arc<dyn KeyedFamily>>,
}

pub fn concat_families(members: Vec<Arc<dyn KeyedFamily>>) -> Result<Concat> {
    let first = members.first().ok_or_else(|| IelError::Domain("empty concatenation".into()))?;
    if members.iter().any(|m| m.in_len() != first.in_len()) {
        return Err(IelError::Domain("concatenated families need a common input length".into()));
    }
    Ok(Concat { members })
}

impl Concat {
    pub fn members(&self) -> &[Arc<dyn KeyedFamily>] {
        &self.members
    }

    /// Key of member `j` inside a concatenated key.
    pub fn member_key(&self, key: &BitString, j: usize) -> Result<BitString> {
        let start: usize = self.members[..j].iter().map(|m| m.key_len()).sum();
        key.slice(start, start + self.members[j].key_len())
    }

    /// Output of member `j` inside a concatenated output.
    pub fn member_output(&self, out: &BitString, j: usize) -> Result<BitString> {
        let start: usize = self.members[..j].iter().map(|m| m.out_len()).sum();
        out.slice(start, start + self.members[j].out_len())
    }
}

impl KeyedFamily for Concat {
    fn key_len(&self) -> usize {
        self.members.iter().map(|m| m.key_len()).sum()
    }

    fn in_len(&self) -> usize {
        self.members[0].in_len()
    }

    fn out_len(&self) -> usize {
        self.members.iter().map(|m| m.out_len()).sum()
    }

    fn eval(&self, key: &BitString, x: &BitString) -> Result<BitString> {
        check_lengths(self, key, x)?;
        let mut out = BitString::new();
        for j in 0..self.members.len() {
            out.extend(&self.members[j].eval(&self.member_key(key, j)?, x)?);
        }
        Ok(out)
    }

    fn label(&self) -> String {
        format!("concat{}", self.members.len())
    }

    fn describe(&self) -> Value {
        json!({
            "kind": "concat",
            "key": self.key_len(),
            "in": self.in_len(),
            "out": self.out_len(),
            "members": self.members.iter().map(|m| m.describe()).collect::<Vec<_>>(),
        })
    }
}

/// A keyed family given by a closure, for tests and planted instances.
pub struct KeyedFn<F> {
    pub key_len: usize,
    pub in_len: usize,
    pub out_len: usize,
    pub label: String,
    pub f: F,
}

impl<F> KeyedFamily for KeyedFn<F>
where
    F: Fn(&BitString, &BitString) -> BitString + Send + Sync,
{
    fn key_len(&self) -> usize {
        self.key_len
    }

    fn in_len(&self) -> usize {
        self.in_len
    }

    fn out_len(&self) -> usize {
        self.out_len
    }

    fn eval(&self, key: &BitString, x: &BitString) -> Result<BitString> {
        check_lengths(self, key, x)?;
        Ok((self.f)(key, x))
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn describe(&self) -> Value {
        json!({"kind": "closure", "label": self.label, "key": self.key_len, "in": self.in_len, "out": self.out_len})
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_schedule() {
        assert_eq!(mask_count(0), 0);
        assert_eq!(mask_count(1), 1);
        assert_eq!(mask_count(7), 3);
        assert_eq!(mask_count(8), 4);
        assert_eq!((1..=8).map(nu).collect::<Vec<_>>(), vec![0, 1, 0, 2, 0, 1, 0, 3]);
    }
}
