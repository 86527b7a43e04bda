//! Monte Carlo checks of the chaining upper bound and the constructive
//! lower bound.

use serde::Serialize;

use super::generator::{GeneratorKind, PartialSumProcess};
use super::mc::{check_paths, estimate, estimate_many, MCEstimate};
use super::sampler::{AdversarialProcess, Lift, ProcessSampler};
use crate::error::{Error, Result};
use crate::functionals::{classify_good_indices, strong_functional};
use crate::series::{
    build_index_set, CoefficientSequence, DiscreteMeasure, IndexSet, PartitionTree,
};

/// `16 * 5^{5/2}`.
pub const CHAINING_CONSTANT: f64 = 16.0 * 55.90169943749474;

/// Constant of the constructive lower bound.
pub const LOWER_BOUND_CONSTANT: f64 = 64.0;

/// Number of standard errors allowed in Monte Carlo assertions.
pub const MC_SIGMAS: f64 = 3.0;

#[derive(Clone, Debug, Serialize)]
pub struct ChainingReport {
    pub generator: GeneratorKind,
    /// `null` when infinite.
    pub strong: f64,
    pub bound: f64,
    /// `E sup_{s,t} |X(s) - X(t)|^2`; absent when skipped.
    pub estimate: Option<MCEstimate>,
    pub margin: f64,
    pub skipped: bool,
    pub pass: bool,
}

/// Checks `E sup |X(s) - X(t)|^2 <= 16 * 5^{5/2} * strong(m)^2` for the
/// partial-sum process of `coeffs` driven by `gen`.
pub fn verify_chaining_bound(
    coeffs: &CoefficientSequence,
    m: &DiscreteMeasure,
    gen: GeneratorKind,
    paths: usize,
    seed: u64,
) -> Result<ChainingReport> {
    check_paths(paths)?;
    let set = build_index_set(coeffs)?;
    let strong = strong_functional(m, &set)?.value;
    if strong.is_infinite() {
        return Ok(ChainingReport {
            generator: gen,
            strong,
            bound: f64::INFINITY,
            estimate: None,
            margin: 0.0,
            skipped: true,
            pass: true,
        });
    }
    let bound = CHAINING_CONSTANT * strong * strong;
    let x = PartialSumProcess::new(coeffs, &set, gen);
    let n = coeffs.len();
    let est = estimate(
        paths,
        seed,
        || vec![0.0; n],
        |phi, rng| x.sup_increment_square(rng, phi),
    );
    let margin = MC_SIGMAS * est.std_error;
    Ok(ChainingReport {
        generator: gen,
        strong,
        bound,
        estimate: Some(est),
        margin,
        skipped: false,
        pass: est.mean <= bound + margin,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub base_depth: u32,
    /// `Σ_{k ≤ base_depth} 2^-k Σ_{i∈I(k)} μ(A^(k)_i)^{1/2}`.
    pub filtered_sum: f64,
    /// `E (sup_t (X(t) - X(0)))^2` for the lifted construction.
    pub estimate: MCEstimate,
    /// `64 sqrt(estimate) + 3 SE`.
    pub bound: f64,
    /// `E sup_t (X(t) - X(0))` and `E sup_t Y(t)` on the same paths.
    pub lifted_sup: MCEstimate,
    pub bridge_sup: MCEstimate,
    pub pass: bool,
    pub note: &'static str,
}

/// Builds the recursive construction down to `base_depth`, lifts it to
/// orthogonal increments and checks that it witnesses the filtered sum.
pub fn lower_bound_report(
    set: &IndexSet,
    m: &DiscreteMeasure,
    tree: &PartitionTree,
    base_depth: u32,
    paths: usize,
    seed: u64,
) -> Result<LowerBoundReport> {
    check_paths(paths)?;
    if tree.positions() != set.positions() {
        return Err(Error::Consistency(
            "partition tree was built over a different index set".into(),
        ));
    }
    let x = Lift::new(AdversarialProcess::new(set, tree, m, base_depth)?);
    let base_depth = x.inner().base_depth();
    let filtered_sum = classify_good_indices(m, tree)?.filtered_series(base_depth);
    let n = x.len();
    let est = estimate_many(
        paths,
        seed,
        3,
        || (vec![0.0; n], vec![0.0; n]),
        |(y, xs), rng, out| {
            x.sample_pair(rng, y, xs);
            let x0 = xs[0];
            let top = xs.iter().map(|v| v - x0).fold(f64::NEG_INFINITY, f64::max);
            // t = 0 is among the points, so `top >= 0`
            out[0] = top * top;
            out[1] = top;
            out[2] = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        },
    );
    let sup_sq = est[0];
    let bound = LOWER_BOUND_CONSTANT * sup_sq.mean.sqrt() + MC_SIGMAS * sup_sq.std_error;
    Ok(LowerBoundReport {
        base_depth,
        filtered_sum,
        estimate: sup_sq,
        bound,
        lifted_sup: est[1],
        bridge_sup: est[2],
        pass: filtered_sum <= bound,
        note:
            "constructive lower bound from one admissible process, not the supremum over processes",
    })
}
