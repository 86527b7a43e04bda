//! Gaussian bridges pinned at the ends of a 4-adic cell.

use rand::Rng;
use rand_distr::StandardNormal;

use super::mc::PathRng;
use crate::series::cell_width;

/// Samples the bridge with `Cov(Y(s), Y(t)) = s∧t - 4^level s t` at the
/// sorted cell-local offsets `offsets`, adding `factor * Y` into `out`.
///
/// Points are visited left to right, each drawn from its exact conditional
/// law given the previous value and the pin at the right end, so no
/// covariance matrix is formed.
pub fn bridge_leaf_sample(
    level: u32,
    offsets: &[f64],
    factor: f64,
    rng: &mut PathRng,
    out: &mut [f64],
) {
    let h = cell_width(level);
    let (mut prev_s, mut prev_y) = (0.0, 0.0);
    for (s, o) in offsets.iter().zip(out.iter_mut()) {
        let s = s.clamp(prev_s, h);
        let rest = h - prev_s;
        let y = if rest > 0.0 {
            let mean = prev_y * (h - s) / rest;
            let var = (s - prev_s) * (h - s) / rest;
            mean + var.sqrt() * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        *o += factor * y;
        prev_s = s;
        prev_y = y;
    }
}

/// `E |Y(s) - Y(t)|^2 = |s - t| - 4^level |s - t|^2` inside one cell.
pub fn bridge_increment_variance(level: u32, s: f64, t: f64) -> f64 {
    let d = (s - t).abs();
    d - d * d / cell_width(level)
}

/// `Var Y(s) = s - 4^level s^2` at cell-local offset `s`.
pub fn bridge_variance(level: u32, s: f64) -> f64 {
    bridge_increment_variance(level, s, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::mc::estimate_many;

    #[test]
    fn pinned_left_end_is_zero() {
        let mut rng = crate::process::mc::path_rng(1, 0);
        let mut out = [0.0; 3];
        bridge_leaf_sample(2, &[0.0, 0.01, 0.03], 1.0, &mut rng, &mut out);
        assert_eq!(out[0], 0.0);
        assert_ne!(out[1], 0.0);
    }

    #[test]
    fn right_end_is_pinned() {
        let mut rng = crate::process::mc::path_rng(1, 0);
        let mut out = [0.0; 2];
        bridge_leaf_sample(1, &[0.1, 0.25], 1.0, &mut rng, &mut out);
        assert_eq!(out[1], 0.0);
    }

    #[test]
    fn covariance_matches() {
        let level = 1;
        let offs = [0.02, 0.1, 0.2];
        let est = estimate_many(
            100_000,
            4,
            6,
            || [0.0; 3],
            |buf, rng, out| {
                *buf = [0.0; 3];
                bridge_leaf_sample(level, &offs, 1.0, rng, buf);
                out[0] = buf[0] * buf[0];
                out[1] = buf[1] * buf[1];
                out[2] = buf[2] * buf[2];
                out[3] = (buf[0] - buf[1]).powi(2);
                out[4] = (buf[0] - buf[2]).powi(2);
                out[5] = (buf[1] - buf[2]).powi(2);
            },
        );
        let want = [
            bridge_variance(level, offs[0]),
            bridge_variance(level, offs[1]),
            bridge_variance(level, offs[2]),
            bridge_increment_variance(level, offs[0], offs[1]),
            bridge_increment_variance(level, offs[0], offs[2]),
            bridge_increment_variance(level, offs[1], offs[2]),
        ];
        for (e, w) in est.iter().zip(want) {
            assert!(e.within(w, 4.0), "{e:?} vs {w}");
        }
    }
}
