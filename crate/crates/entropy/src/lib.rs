//! Exact entropy oracles.
//!
//! Probabilities that come from counting are kept as rationals and entropies
//! as exact sums of logarithms ([`LogSum`]), so identities between entropies
//! are checked with zero tolerance.

pub mod class;
pub mod distribution;
pub mod flatten;
pub mod logsum;

pub use class::{real_entropy_of_domain, real_entropy_of_inverse, shrink_lower_bound_check, ClassHistogram};
pub use distribution::{rational_string, Distribution, EntropyReport};
pub use flatten::{flattening_deviation, flattening_deviation_mc, FlatteningReport};
pub use logsum::{ratio, LogSum};
