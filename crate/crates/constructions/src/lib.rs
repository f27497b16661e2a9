//! The two inaccessible-entropy constructions over a length-preserving `f`:
//! plain prefix truncation and hash-then-truncate, with the light-image sets
//! used to bound what a collision finder can reach.

pub mod hashtrunc;
pub mod light;
pub mod sweep;
pub mod trunc;

pub use hashtrunc::{hashtrunc_eval, member_outputs, HashTruncConstruction, MAX_SWEEP_BITS, MAX_SWEEP_N};
pub use light::{light_set, LightSet, LightThreshold};
pub use sweep::{inaccessible_gap, sibling_hit_bounds, GapReport, SiblingHitReport};
pub use trunc::{trunc_eval, TruncConstruction};
