//! Constructible t-wise independent hashing over GF(2^w).
//!
//! A member of the degree-`t` family is a polynomial of degree `t - 1`
//! evaluated at the (left aligned) input and truncated to its leading
//! `out_len` bits. Interpolation gives uniform sampling under point
//! constraints.

pub mod audit;
pub mod family;
pub mod field;
pub mod toeplitz;

pub use audit::{twise_audit, twise_audit_exhaustive, twise_audit_statistical, AuditMode, TwiseReport};
pub use family::{HashFamilySpec, HashMember};
pub use field::{Gf2w, WIDTHS};
pub use toeplitz::{PairwiseFamily, PolyPairwise, ToeplitzFamily};
