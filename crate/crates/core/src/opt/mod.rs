//! Measure optimization on the probability simplex.
//!
//! `minimize_strong` runs entropic mirror descent on the convex map
//! `w ↦ sup_t ∫ w(B(t, r^2))^{-1/2} dr`. `maximize_weak` is a restarted
//! multiplicative reweighting heuristic for the weak functional; it has no
//! optimality certificate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::integral::{
    point_integral, point_integral_gradient, strong_on_weights, weak_on_weights,
};
use crate::par;
use crate::series::{dirichlet, DiscreteMeasure, IndexSet, Position};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerOptions {
    pub max_iters: usize,
    /// Stop once the best value improved by less than this relative amount
    /// over the last `window` iterations.
    pub tol: f64,
    /// Step size at iteration `k` is `eta0 / sqrt(k)`.
    pub eta0: f64,
    pub window: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            max_iters: 2000,
            tol: 1e-8,
            eta0: 1.0,
            window: 50,
            restarts: 8,
            seed: 0,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidOption(what.to_string()));
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad("tol must lie in (0, 1)");
        }
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return bad("eta0 must be positive");
        }
        if self.window == 0 {
            return bad("window must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizationResult {
    pub measure: DiscreteMeasure,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best value after each iteration, starting with the initial point.
    pub trace: Vec<f64>,
    pub heuristic: bool,
}

impl OptimizationResult {
    fn trivial(n: usize, heuristic: bool) -> Result<Self> {
        let mut w = vec![0.0; n];
        w[0] = 1.0;
        Ok(OptimizationResult {
            measure: DiscreteMeasure::new(w)?,
            value: 0.0,
            iterations: 0,
            converged: true,
            trace: vec![0.0],
            heuristic,
        })
    }
}

/// Scales `g` onto `[0, 1]`; `None` when it is constant.
fn unit_range(g: &[f64]) -> Option<Vec<f64>> {
    let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    (span > 0.0 && span.is_finite()).then(|| g.iter().map(|x| (x - lo) / span).collect())
}

fn reweight(w: &mut [f64], direction: &[f64], eta: f64) {
    for (wi, d) in w.iter_mut().zip(direction) {
        *wi *= (eta * d).exp();
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|wi| *wi /= total);
}

fn stalled(trace: &[f64], window: usize, tol: f64, improvement: impl Fn(f64, f64) -> f64) -> bool {
    let k = trace.len() - 1;
    if k < window {
        return false;
    }
    let (then, now) = (trace[k - window], trace[k]);
    improvement(then, now) <= tol * now.abs().max(f64::MIN_POSITIVE)
}

/// Mirror descent from the uniform measure; returns the best iterate.
pub fn minimize_strong(set: &IndexSet, opts: &OptimizerOptions) -> Result<OptimizationResult> {
    opts.validate()?;
    let n = set.len();
    if n == 1 {
        return OptimizationResult::trivial(n, false);
    }
    let pos = set.positions();
    let d = set.diameter();
    let mut w = vec![1.0 / n as f64; n];
    let mut best = strong_on_weights(pos, &w, d).value;
    let mut best_w = w.clone();
    let mut trace = vec![best];
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=opts.max_iters {
        iterations = k;
        let argmax = strong_on_weights(pos, &w, d).argmax;
        let g = point_integral_gradient(pos, &w, argmax, d);
        let Some(step) = unit_range(&g) else {
            converged = true;
            break;
        };
        // descend: the subgradient is nonpositive, so mass flows toward the
        // most negative coordinates
        let neg: Vec<f64> = step.iter().map(|s| -s).collect();
        reweight(&mut w, &neg, opts.eta0 / (k as f64).sqrt());
        let v = strong_on_weights(pos, &w, d).value;
        if v < best {
            best = v;
            best_w.copy_from_slice(&w);
        }
        trace.push(best);
        if stalled(&trace, opts.window, opts.tol, |then, now| then - now) {
            converged = true;
            break;
        }
    }
    log::debug!("minimize_strong: {iterations} iterations, value {best}");
    Ok(OptimizationResult {
        measure: DiscreteMeasure::new(best_w)?,
        value: best,
        iterations,
        converged,
        trace,
        heuristic: false,
    })
}

fn ascend_weak(
    pos: &[Position],
    d: f64,
    mut w: Vec<f64>,
    opts: &OptimizerOptions,
) -> OptimizationResult {
    let n = w.len();
    let mut best = weak_on_weights(pos, &w, d);
    let mut best_w = w.clone();
    let mut trace = vec![best];
    let mut converged = false;
    let mut iterations = 0;
    let mut c = vec![0.0; n];
    for k in 1..=opts.max_iters {
        iterations = k;
        for (t, ct) in c.iter_mut().enumerate() {
            *ct = point_integral(pos, &w, t, d);
        }
        let Some(step) = unit_range(&c) else {
            converged = true;
            break;
        };
        reweight(&mut w, &step, opts.eta0 / (k as f64).sqrt());
        let v = weak_on_weights(pos, &w, d);
        if v > best {
            best = v;
            best_w.copy_from_slice(&w);
        }
        trace.push(best);
        if stalled(&trace, opts.window, opts.tol, |then, now| now - then) {
            converged = true;
            break;
        }
    }
    OptimizationResult {
        measure: DiscreteMeasure::new(best_w).expect("iterates stay on the simplex"),
        value: best,
        iterations,
        converged,
        trace,
        heuristic: true,
    }
}

/// Restarted heuristic ascent of the weak functional. Restart 0 starts from
/// the uniform measure, restart `r > 0` from a Dirichlet draw on stream `r`.
/// The best restart wins, ties to the lowest index.
pub fn maximize_weak(set: &IndexSet, opts: &OptimizerOptions) -> Result<OptimizationResult> {
    opts.validate()?;
    let n = set.len();
    if n == 1 {
        return OptimizationResult::trivial(n, true);
    }
    let pos = set.positions();
    let d = set.diameter();
    let runs = par::map_indexed(opts.restarts, |r| {
        let start = if r == 0 {
            vec![1.0 / n as f64; n]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            dirichlet(n, &mut rng).weights().to_vec()
        };
        ascend_weak(pos, d, start, opts)
    });
    let mut best: Option<OptimizationResult> = None;
    for run in runs {
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    /// Upper estimate of `inf_m sup_t ∫ ...`.
    pub min_strong: f64,
    /// Lower estimate of `sup_m ∫_T ∫ ... dm`.
    pub max_weak: f64,
    /// `min_strong / max_weak`; absent when both vanish.
    pub ratio: Option<f64>,
    /// Weak value of the minimizing measure, and strong value of the
    /// maximizing one, for the per-measure inequality `weak <= strong`.
    pub weak_at_minimizer: f64,
    pub strong_at_maximizer: f64,
    pub weak_le_strong: bool,
    pub note: &'static str,
    pub minimizer: OptimizationResult,
    pub maximizer: OptimizationResult,
}

pub fn duality_gap_report(set: &IndexSet, opts: &OptimizerOptions) -> Result<DualityReport> {
    let minimizer = minimize_strong(set, opts)?;
    let maximizer = maximize_weak(set, opts)?;
    let pos = set.positions();
    let d = set.diameter();
    let weak_at_minimizer = weak_on_weights(pos, minimizer.measure.weights(), d);
    let strong_at_maximizer = strong_on_weights(pos, maximizer.measure.weights(), d).value;
    let weak_le_strong =
        weak_at_minimizer <= minimizer.value && maximizer.value <= strong_at_maximizer;
    let ratio = (maximizer.value > 0.0).then(|| minimizer.value / maximizer.value);
    Ok(DualityReport {
        min_strong: minimizer.value,
        max_weak: maximizer.value,
        ratio,
        weak_at_minimizer,
        strong_at_maximizer,
        weak_le_strong,
        note:
            "informational: the two values are estimated from opposite sides; max_weak is heuristic",
        minimizer,
        maximizer,
    })
}
