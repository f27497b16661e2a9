//! From a one-way function's inaccessible entropy to a universal one-way hash
//! family: the parameter calculator, the lazy stage functions, the keyed
//! families, the end-to-end builders and exact checks of the individual steps
//! on small functions.

pub mod build;
pub mod func;
pub mod keyed;
pub mod lemmas;
pub mod params;

pub use build::{build_uowhf_avgmax, build_uowhf_shannon, parse_descriptor, Uowhf};
pub use func::{
    direct_product, pad_input, reduce_entropy, reduce_output, tabulate, Base, DirectProduct, EntropyReduction,
    OutputReduction, Padded, Stage, MAX_PIPELINE_BITS,
};
pub use keyed::{
    concat_families, mask_count, nu, random_shift, shoup_extend, BaseCollision, Concat, KeyedFamily, KeyedFn,
    RandomShift, ShoupExtend,
};
pub use lemmas::{
    agreement_bound, agreement_count, binomial, entropy_reduction_check, gapamp_extras, output_reduction_check,
    product_function, set_product_tail, shift_game, within_hoeffding, AgreementReport, EntropyReductionReport,
    GapAmpReport, OutputReductionReport, ProductWrapper, SetProductReport, ShiftGameReport,
};
pub use params::{
    calc_params, ceil_sqrt, fit_exponent, least_t, output_exponent, pairwise_key_len, parse_rational, GridPoint,
    ParamSheet, PathKind, PipelineConfig,
};
