//! Exact evaluation of `∫_0^{√D} m(B(t, r^2))^{-1/2} dr`.
//!
//! As `r` grows the ball `B(t, r^2)` only changes when `r^2` crosses the
//! distance from `t` to another point, and it is always a contiguous run of
//! indices around `t`. The integrand is therefore a step function and the
//! integral is a finite sum over "shells".

use crate::error::Result;
use crate::series::{DiscreteMeasure, IndexSet, Position};

/// The ball around a center once every point at distance `<= dist` is in.
#[derive(Clone, Debug, PartialEq)]
pub struct Shell {
    pub dist_bits: u128,
    pub dist: f64,
    /// Inclusive index range of the ball.
    pub lo: usize,
    pub hi: usize,
    pub mass: f64,
}

/// All distinct balls around `center`, smallest first. Weights need not be
/// normalized.
pub fn shells(positions: &[Position], weights: &[f64], center: usize) -> Vec<Shell> {
    let n = positions.len();
    let c = positions[center].bits();
    let (mut lo, mut hi) = (center, center);
    let mut mass = weights[center];
    let mut out = Vec::with_capacity(n);
    out.push(Shell {
        dist_bits: 0,
        dist: 0.0,
        lo,
        hi,
        mass,
    });
    while lo > 0 || hi + 1 < n {
        let left = (lo > 0).then(|| c - positions[lo - 1].bits());
        let right = (hi + 1 < n).then(|| positions[hi + 1].bits() - c);
        let d = match (left, right) {
            (Some(l), Some(r)) => l.min(r),
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => unreachable!(),
        };
        if left == Some(d) {
            lo -= 1;
            mass += weights[lo];
        }
        if right == Some(d) {
            hi += 1;
            mass += weights[hi];
        }
        out.push(Shell {
            dist_bits: d,
            dist: Position::from_bits(d).distance(Position::ZERO),
            lo,
            hi,
            mass,
        });
    }
    out
}

/// A constant piece of the integrand: `len` units of `r` at ball `shell`.
#[derive(Clone, Debug)]
pub struct Segment {
    pub len: f64,
    pub lo: usize,
    pub hi: usize,
    pub mass: f64,
}

/// Pieces of `r ∈ [0, √D)` with their balls; empty pieces are dropped.
pub fn segments(
    positions: &[Position],
    weights: &[f64],
    center: usize,
    diameter: f64,
) -> Vec<Segment> {
    let sh = shells(positions, weights, center);
    let root_d = diameter.sqrt();
    let mut out = Vec::with_capacity(sh.len());
    for (j, s) in sh.iter().enumerate() {
        let upper = sh.get(j + 1).map_or(root_d, |next| next.dist.sqrt());
        let len = upper - s.dist.sqrt();
        if len > 0.0 {
            out.push(Segment {
                len,
                lo: s.lo,
                hi: s.hi,
                mass: s.mass,
            });
        }
    }
    out
}

/// The per-point integral on raw (possibly unnormalized) weights; `+∞` when
/// the center carries no mass and `D > 0`.
pub fn point_integral(
    positions: &[Position],
    weights: &[f64],
    center: usize,
    diameter: f64,
) -> f64 {
    segments(positions, weights, center, diameter)
        .iter()
        .map(|s| {
            if s.mass > 0.0 {
                s.len / s.mass.sqrt()
            } else {
                f64::INFINITY
            }
        })
        .sum()
}

/// Gradient of [`point_integral`] with respect to every raw weight.
///
/// Each piece contributes `-len / 2 * mass^{-3/2}` to the weights inside its
/// ball. Requires positive mass at the center.
pub fn point_integral_gradient(
    positions: &[Position],
    weights: &[f64],
    center: usize,
    diameter: f64,
) -> Vec<f64> {
    let n = positions.len();
    let mut diff = vec![0.0; n + 1];
    for s in segments(positions, weights, center, diameter) {
        let g = -0.5 * s.len * s.mass.powf(-1.5);
        diff[s.lo] += g;
        diff[s.hi + 1] -= g;
    }
    let mut acc = 0.0;
    diff[..n]
        .iter()
        .map(|d| {
            acc += d;
            acc
        })
        .collect()
}

/// Strong functional at a single point.
pub fn strong_functional_at(m: &DiscreteMeasure, set: &IndexSet, t: usize) -> Result<f64> {
    m.check_against(set)?;
    set.check_index(t)?;
    Ok(point_integral(
        set.positions(),
        m.weights(),
        t,
        set.diameter(),
    ))
}

/// Value and smallest maximizing index of the strong functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrongValue {
    pub value: f64,
    pub argmax: usize,
}

impl StrongValue {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// `sup_t ∫_0^{√D} m(B(t, r^2))^{-1/2} dr` over all points.
///
/// Any point without mass makes the supremum infinite; the first such point
/// is reported as the argmax.
pub fn strong_functional(m: &DiscreteMeasure, set: &IndexSet) -> Result<StrongValue> {
    m.check_against(set)?;
    Ok(strong_on_weights(
        set.positions(),
        m.weights(),
        set.diameter(),
    ))
}

pub(crate) fn strong_on_weights(
    positions: &[Position],
    weights: &[f64],
    diameter: f64,
) -> StrongValue {
    if set_is_trivial(positions) {
        return StrongValue {
            value: 0.0,
            argmax: 0,
        };
    }
    if let Some(t) = weights.iter().position(|&w| w <= 0.0) {
        return StrongValue {
            value: f64::INFINITY,
            argmax: t,
        };
    }
    let mut best = StrongValue {
        value: f64::NEG_INFINITY,
        argmax: 0,
    };
    for t in 0..positions.len() {
        let v = point_integral(positions, weights, t, diameter);
        if v > best.value {
            best = StrongValue {
                value: v,
                argmax: t,
            };
        }
    }
    best
}

fn set_is_trivial(positions: &[Position]) -> bool {
    positions.len() <= 1
}

/// `∫_T ∫_0^{√D} m(B(t, r^2))^{-1/2} dr m(dt)`; massless points contribute 0.
pub fn weak_functional(m: &DiscreteMeasure, set: &IndexSet) -> Result<f64> {
    m.check_against(set)?;
    Ok(weak_on_weights(
        set.positions(),
        m.weights(),
        set.diameter(),
    ))
}

pub(crate) fn weak_on_weights(positions: &[Position], weights: &[f64], diameter: f64) -> f64 {
    weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(t, &w)| w * point_integral(positions, weights, t, diameter))
        .sum()
}

/// `Σ_{k≥1} 2^-k m(B(t, 4^-k))^{-1/2}`, the per-point dyadic majorant of the
/// integral. Summed exactly: once `4^-k` is below the nearest-neighbour
/// distance the ball is `{t}` and the rest is a geometric tail.
pub fn dyadic_point_sum(m: &DiscreteMeasure, set: &IndexSet, t: usize) -> Result<f64> {
    m.check_against(set)?;
    set.check_index(t)?;
    let sh = shells(set.positions(), m.weights(), t);
    let w_t = sh[0].mass;
    if w_t <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let nearest = sh.get(1).map(|s| s.dist_bits);
    let mut sum = 0.0;
    let mut k = 1u32;
    loop {
        let radius = 1u128 << (128 - 2 * k);
        if nearest.is_none_or(|d| d > radius) {
            // 2^-k + 2^-(k+1) + ... = 2^-(k-1)
            return Ok(sum + 0.5f64.powi(k as i32 - 1) / w_t.sqrt());
        }
        let mass = sh
            .iter()
            .take_while(|s| s.dist_bits <= radius)
            .last()
            .map_or(w_t, |s| s.mass);
        sum += 0.5f64.powi(k as i32) / mass.sqrt();
        k += 1;
    }
}
