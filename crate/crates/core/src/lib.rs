//! Bit-exact strings, explicit finite functions and seeded randomness.
//!
//! Every other crate in the workspace manipulates these types.

pub mod bits;
pub mod error;
pub mod function;
pub mod rng;

pub use bits::{bits, BitString};
pub use error::{IelError, Result};
pub use function::{BitFunction, DomainFunction, FiniteFunction, PreimageIndex, MAX_TABLE_BITS};
pub use rng::Rng;

/// Prefix of `s` of length `j`.
pub fn prefix(s: &BitString, j: usize) -> Result<BitString> {
    s.prefix(j)
}

/// `ceil(log2(n))` for `n >= 1`, with `ceil_log2(1) = 0`.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1);
    64 - (n - 1).leading_zeros()
}

/// Fixed-width big-endian 16-bit field used in domain encodings.
pub fn u16_bits(v: usize) -> BitString {
    BitString::from_u64(v as u64, 16)
}
