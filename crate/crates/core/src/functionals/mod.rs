//! Majorizing-measure functionals on a finite index set.

mod dyadic;
pub mod integral;
mod report;
mod rm;

pub use dyadic::{
    classify_good_indices, dyadic_bound, filtered_bound, filtered_bound_from, good_children,
    FilteredBound, GoodIndexTable, GoodLevel, L,
};
pub use integral::{
    dyadic_point_sum, point_integral, point_integral_gradient, strong_functional,
    strong_functional_at, weak_functional, StrongValue,
};
pub use report::{FunctionalReport, LevelRow, PointRow, SymbolicConstant};
pub use rm::{rademacher_menchov, RmRow, RmTable};
