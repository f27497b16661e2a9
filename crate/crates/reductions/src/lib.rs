//! Collision finders as executable adversaries, the inverters built from
//! them, and exact audits of how much entropy a finder can reach.
//!
//! A finder is a [`Strategy`] bound to a [`Target`] through
//! [`CollisionFinder`], which enforces the collision contract. Every shipped
//! strategy also states its exact output law, so audits run in rational
//! arithmetic without enumerating coins.

pub mod audit;
pub mod finder;
pub mod hashinv;
pub mod invert;
pub mod target;

pub use audit::{audit_max, audit_shannon, calibrate_lazy, pmax_set, shannon_to_pmax, AccessAudit, AuditMode};
pub use finder::{
    distance_from_uniform, law_entropy, normalize_law, sample_law, Canonical, CoinStrategy, CollisionFinder, Identity,
    Law, Lazy, Optimal, Sampling, Strategy, MAX_COIN_BITS,
};
pub use hashinv::{hashtrunc_inversion_exact, invert_hashtrunc, HashInversion, HashInversionExact};
pub use invert::{
    expected_optimal_calls, extend_one, invert_trunc, mean_epsilon, CoupledExtend, CouplingProfile, Extend, InvConfig,
    Inversion, MaximalCoupling,
};
pub use target::{function_target, trunc_target, HashTruncTarget, IndexedTarget, Target};
