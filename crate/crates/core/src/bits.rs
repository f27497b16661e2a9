use std::fmt;
use std::str::FromStr;

use crate::error::{IelError, Result};

/// Length-explicit bit vector. Bit 0 is the first (most significant) written bit.
///
/// Bits are packed MSB-first into 64-bit words and unused trailing bits are
/// kept at zero, so derived equality and hashing are exact.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        BitString { len, words: vec![0; words_for(len)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = Self::zeros(len);
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        s.clear_tail();
        s
    }

    /// Low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut s = Self::zeros(len);
        if len > 0 {
            s.words[0] = if len == 64 { value } else { (value & ((1u64 << len) - 1)) << (64 - len) };
        }
        s
    }

    pub fn from_u128(value: u128, len: usize) -> Self {
        assert!(len <= 128, "from_u128 supports at most 128 bits");
        if len <= 64 {
            return Self::from_u64(value as u64, len);
        }
        let v = if len == 128 { value } else { value & ((1u128 << len) - 1) };
        let shifted = v << (128 - len);
        BitString { len, words: vec![(shifted >> 64) as u64, shifted as u64] }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (k, &b) in bits.iter().enumerate() {
            if b {
                s.set(k, true);
            }
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, k: usize) -> bool {
        assert!(k < self.len, "bit index {k} out of range for length {}", self.len);
        (self.words[k / 64] >> (63 - k % 64)) & 1 == 1
    }

    pub fn set(&mut self, k: usize, b: bool) {
        assert!(k < self.len, "bit index {k} out of range for length {}", self.len);
        let mask = 1u64 << (63 - k % 64);
        if b {
            self.words[k / 64] |= mask;
        } else {
            self.words[k / 64] &= !mask;
        }
    }

    pub fn push(&mut self, b: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        self.len += 1;
        if b {
            self.set(self.len - 1, true);
        }
    }

    /// Appends `other` in place.
    pub fn extend(&mut self, other: &BitString) {
        let shift = self.len % 64;
        if shift == 0 {
            self.words.extend_from_slice(&other.words);
        } else {
            for &w in &other.words {
                let last = self.words.len() - 1;
                self.words[last] |= w >> shift;
                self.words.push(w << (64 - shift));
            }
        }
        self.len += other.len;
        self.words.truncate(words_for(self.len));
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn concat_all<'a, I: IntoIterator<Item = &'a BitString>>(parts: I) -> BitString {
        let mut out = BitString::new();
        for p in parts {
            out.extend(p);
        }
        out
    }

    /// First `j` bits.
    pub fn prefix(&self, j: usize) -> Result<BitString> {
        if j > self.len {
            return Err(IelError::Range(format!("prefix length {j} exceeds string length {}", self.len)));
        }
        let mut out = BitString { len: j, words: self.words[..words_for(j)].to_vec() };
        out.clear_tail();
        Ok(out)
    }

    /// Bits `start..end` (half open).
    pub fn slice(&self, start: usize, end: usize) -> Result<BitString> {
        if start > end || end > self.len {
            return Err(IelError::Range(format!("slice {start}..{end} of length {}", self.len)));
        }
        let len = end - start;
        let mut out = BitString::zeros(len);
        let shift = start % 64;
        let base = start / 64;
        for i in 0..out.words.len() {
            let hi = self.words[base + i] << shift;
            let lo = if shift > 0 && base + i + 1 < self.words.len() {
                self.words[base + i + 1] >> (64 - shift)
            } else {
                0
            };
            out.words[i] = hi | lo;
        }
        out.clear_tail();
        Ok(out)
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len != other.len {
            return Err(IelError::Domain(format!("xor of lengths {} and {}", self.len, other.len)));
        }
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect();
        Ok(BitString { len: self.len, words })
    }

    pub fn and(&self, other: &BitString) -> Result<BitString> {
        if self.len != other.len {
            return Err(IelError::Domain(format!("and of lengths {} and {}", self.len, other.len)));
        }
        let words = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        Ok(BitString { len: self.len, words })
    }

    pub fn reversed(&self) -> BitString {
        let mut out = BitString::zeros(self.len);
        for k in 0..self.len {
            if self.get(k) {
                out.set(self.len - 1 - k, true);
            }
        }
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn to_u64(&self) -> Result<u64> {
        if self.len > 64 {
            return Err(IelError::Range(format!("{} bits do not fit in u64", self.len)));
        }
        if self.len == 0 {
            return Ok(0);
        }
        Ok(self.words[0] >> (64 - self.len))
    }

    pub fn to_u128(&self) -> Result<u128> {
        if self.len > 128 {
            return Err(IelError::Range(format!("{} bits do not fit in u128", self.len)));
        }
        if self.len <= 64 {
            return self.to_u64().map(u128::from);
        }
        let v = ((self.words[0] as u128) << 64) | self.words[1] as u128;
        Ok(v >> (128 - self.len))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |k| self.get(k))
    }

    /// Packed MSB-first bytes, `ceil(len/8)` of them, zero padded at the end.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(nbytes);
        for k in 0..nbytes {
            out.push((self.words[k / 8] >> (56 - 8 * (k % 8))) as u8);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<BitString> {
        if bytes.len() < len.div_ceil(8) {
            return Err(IelError::Parse(format!("{} bytes cannot hold {len} bits", bytes.len())));
        }
        let mut s = BitString::zeros(len);
        for (k, &b) in bytes.iter().take(len.div_ceil(8)).enumerate() {
            s.words[k / 8] |= (b as u64) << (56 - 8 * (k % 8));
        }
        s.clear_tail();
        Ok(s)
    }

    /// Binary encoding: u32 big-endian length, then packed bytes.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = (self.len as u32).to_be_bytes().to_vec();
        out.extend(self.to_bytes());
        out
    }

    /// Inverse of [`BitString::encode`]; returns the string and bytes consumed.
    pub fn decode(bytes: &[u8]) -> Result<(BitString, usize)> {
        if bytes.len() < 4 {
            return Err(IelError::Parse("truncated bit string header".into()));
        }
        let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        let body = len.div_ceil(8);
        if bytes.len() < 4 + body {
            return Err(IelError::Parse("truncated bit string body".into()));
        }
        Ok((BitString::from_bytes(&bytes[4..4 + body], len)?, 4 + body))
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= !(u64::MAX >> r);
        }
    }
}

impl FromStr for BitString {
    type Err = IelError;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = BitString::new();
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                other => return Err(IelError::Parse(format!("invalid bit character {other:?}"))),
            }
        }
        Ok(out)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 256 {
            write!(f, "BitString({self})")
        } else {
            write!(f, "BitString(len={})", self.len)
        }
    }
}

/// Shorthand for tests: `bits("1011")`.
pub fn bits(s: &str) -> BitString {
    s.parse().expect("valid bit literal")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_examples() {
        let s = bits("1011");
        assert_eq!(s.prefix(2).unwrap(), bits("10"));
        assert_eq!(s.prefix(0).unwrap(), BitString::new());
        assert_eq!(s.prefix(0).unwrap().len(), 0);
        assert_eq!(s.prefix(4).unwrap(), s);
        assert!(matches!(s.prefix(5), Err(IelError::Range(_))));
    }

    #[test]
    fn integer_round_trip() {
        let s = BitString::from_u64(0b1011, 4);
        assert_eq!(s.to_string(), "1011");
        assert_eq!(s.to_u64().unwrap(), 11);
        let wide = BitString::from_u128(u128::MAX - 5, 128);
        assert_eq!(wide.to_u128().unwrap(), u128::MAX - 5);
        assert_eq!(BitString::from_u64(u64::MAX, 64).count_ones(), 64);
    }

    #[test]
    fn extend_across_words() {
        let a = BitString::ones(70);
        let b = bits("0101");
        let c = a.concat(&b);
        assert_eq!(c.len(), 74);
        assert_eq!(c.slice(70, 74).unwrap(), b);
        assert_eq!(c.slice(0, 70).unwrap(), a);
    }

    #[test]
    fn empty_text_form() {
        assert_eq!("".parse::<BitString>().unwrap(), BitString::new());
        assert!("012".parse::<BitString>().is_err());
    }

    #[test]
    fn bytes_layout_is_msb_first() {
        assert_eq!(bits("1000000011").to_bytes(), vec![0x80, 0xC0]);
    }
}
