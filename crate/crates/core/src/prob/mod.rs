//! Finite-alphabet probability: distributions, kernels, empirical types,
//! typical sets, information measures and exact typical-set samplers.

mod dist;
mod sampling;
mod types;

pub use dist::{
    entropy, entropy_bits, mutual_information, mutual_information_table, Alphabet, ConditionalKernel, Distribution,
    JointDistribution, MASS_TOLERANCE,
};
pub use sampling::{
    sample_conditional_type, sample_uniform_typical, ConditionalTypeSampler, ConstrainedConditionalSampler,
    TypicalSampler, MAX_JOINT_TYPES,
};
pub(crate) use types::{compositions, count_compositions};
pub use types::{
    is_jointly_typical, is_typical, nominal_counts, EmpiricalType, LogFactorial, TypicalSetParams, TYPICALITY_SLACK,
};
