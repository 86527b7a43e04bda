//! Exact second moments of one level of the recursive construction.

use super::bridge::{bridge_increment_variance, bridge_variance};
use super::skeleton::{s_skeleton, SkeletonLaw};
use crate::error::{Error, Result};
use crate::series::cell_width;

/// `E |Y(s) - Y(t)|^2` for the level-`level` construction over one parent
/// cell whose children are bridges. `s` and `t` are offsets from the parent's
/// left end, in `[0, 4^{-(level-1)}]`; the right end belongs to child 3.
///
/// Enumerates every `(τ, Z)` outcome for the skeleton part and adds the
/// bridge moments of the selected child, which is independent and centered.
pub fn second_moment_oracle(law: &SkeletonLaw, level: u32, s: f64, t: f64) -> Result<f64> {
    if level == 0 {
        return Err(Error::Domain("the construction starts at level 1".into()));
    }
    let parent = cell_width(level - 1);
    for x in [s, t] {
        if !(0.0..=parent).contains(&x) {
            return Err(Error::Domain(format!(
                "{x} outside the parent cell [0, {parent}]"
            )));
        }
    }
    let h = cell_width(level);
    let locate = |x: f64| {
        let j = ((x / h) as usize).min(3);
        (j, x - j as f64 * h)
    };
    let (js, us) = locate(s);
    let (jt, ut) = locate(t);
    let (down, up) = (0.5f64.powi(level as i32), 2f64.powi(level as i32));
    let mut skeleton = 0.0;
    for o in law.outcomes() {
        let sk = s_skeleton(o.z);
        let at = |j: usize, u: f64| down * sk[j] + up * u * (sk[j + 1] - sk[j]);
        let d = at(js, us) - at(jt, ut);
        skeleton += o.prob * d * d;
    }
    // P(τ = j) times the child's variance scaled by P(τ = j)^{-1}.
    let active = |j: usize| law.probs[j] > 0.0;
    let leaf = if js == jt {
        if active(js) {
            bridge_increment_variance(level, us, ut)
        } else {
            0.0
        }
    } else {
        let vs = if active(js) {
            bridge_variance(level, us)
        } else {
            0.0
        };
        let vt = if active(jt) {
            bridge_variance(level, ut)
        } else {
            0.0
        };
        vs + vt
    };
    Ok(skeleton + leaf)
}

/// `|s - t| (1 - 4^{level-1} |s - t|)`.
pub fn admissible_moment(level: u32, s: f64, t: f64) -> f64 {
    let d = (s - t).abs();
    d * (1.0 - d / cell_width(level - 1))
}
