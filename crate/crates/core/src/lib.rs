//! Majorizing measures and chaining bounds for orthogonal series.
//!
//! The index set of a series `Σ a_n φ_n` is the set of normalized partial
//! sums of `a_n^2`. This crate builds that set and its 4-adic partition,
//! evaluates the strong and weak majorizing-measure functionals together
//! with their dyadic majorants, optimizes measures on the simplex, and
//! checks the resulting bounds against Monte Carlo simulation.

mod error;
pub mod functionals;
pub mod opt;
pub mod par;
pub mod process;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
