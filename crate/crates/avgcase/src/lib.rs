//! Search problems over samplable distributions: the hashed relations `Q` and
//! `V`, Valiant-Vazirani isolation, the search heuristic built from an oracle
//! for `Q`, light-bucket sets and accessible average max-entropy measurement.

pub mod access;
pub mod heuristic;
pub mod relation;
pub mod sampler;
pub mod vv;

pub use access::{
    average_log_size, bucket_claims, build_bucket_sets, light_bucket_family, measure_avg_access,
    two_universal_picking, wilson_interval, AccessMeasurement, BucketClaims, BucketSets, PickingReport, SetFamily,
};
pub use heuristic::{
    bad_instances, heuristic_b, hit_probabilities, success_after, ExhaustiveSolver, HeuristicOutcome, HeuristicParams,
    IntLaw, MismatchedWitness, QOracle, RandomGuess,
};
pub use relation::{q_membership, v_membership, QStatement, RelationQ, RelationV, VStatement};
pub use sampler::{PreimageRelation, Sampler, SearchRelation, MAX_COIN_BITS};
pub use vv::{vv_isolation_probability, IsolationMode, IsolationReport};
