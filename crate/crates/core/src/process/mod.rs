//! Random processes on `T`: orthonormal systems, the recursive adversarial
//! construction, and Monte Carlo estimates of their suprema.

mod bounds;
mod bridge;
mod generator;
pub mod mc;
mod oracle;
mod sampler;
mod skeleton;

pub use bounds::{
    lower_bound_report, verify_chaining_bound, ChainingReport, LowerBoundReport, CHAINING_CONSTANT,
    LOWER_BOUND_CONSTANT, MC_SIGMAS,
};
pub use bridge::{bridge_increment_variance, bridge_leaf_sample, bridge_variance};
pub use generator::{simulate_sup_square, GeneratorKind, PartialSumProcess};
pub use mc::{MCEstimate, PathRng};
pub use oracle::{admissible_moment, second_moment_oracle};
pub use sampler::{AdversarialProcess, BridgeProcess, Lift, ProcessSampler};
pub use skeleton::{
    build_skeleton_variables, s_skeleton, Outcome, SkeletonCase, SkeletonLaw, SkeletonVariables,
};
