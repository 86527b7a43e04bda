//! Orthonormal systems and partial-sum processes built from them.

use std::f64::consts::{SQRT_2, TAU};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mc::{check_paths, estimate, MCEstimate, PathRng};
use crate::error::Result;
use crate::series::{CoefficientSequence, IndexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Gaussian,
    Rademacher,
    /// `φ_n(ω) = √2 cos(2π n ω)` with `ω` uniform on `[0, 1)`.
    Trig,
}

impl std::str::FromStr for GeneratorKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(GeneratorKind::Gaussian),
            "rademacher" => Ok(GeneratorKind::Rademacher),
            "trig" | "trigonometric" => Ok(GeneratorKind::Trig),
            other => Err(crate::Error::InvalidOption(format!(
                "unknown generator '{other}'"
            ))),
        }
    }
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 3] = [
        GeneratorKind::Gaussian,
        GeneratorKind::Rademacher,
        GeneratorKind::Trig,
    ];

    /// Writes `φ_1(ω), ..., φ_len(ω)` for one draw of `ω`.
    pub fn fill(self, rng: &mut PathRng, out: &mut [f64]) {
        match self {
            GeneratorKind::Gaussian => out.iter_mut().for_each(|x| *x = rng.sample(StandardNormal)),
            GeneratorKind::Rademacher => out
                .iter_mut()
                .for_each(|x| *x = if rng.random::<bool>() { 1.0 } else { -1.0 }),
            GeneratorKind::Trig => {
                let omega: f64 = rng.random();
                for (n, x) in out.iter_mut().enumerate() {
                    // reduce n ω mod 1 before scaling to keep the phase accurate
                    let phase = ((n + 1) as f64 * omega).fract();
                    *x = SQRT_2 * (TAU * phase).cos();
                }
            }
        }
    }
}

/// `E max_{1≤m≤N} (Σ_{n≤m} a_n φ_n)^2` with the raw coefficients.
pub fn simulate_sup_square(
    coeffs: &CoefficientSequence,
    gen: GeneratorKind,
    paths: usize,
    seed: u64,
) -> Result<MCEstimate> {
    check_paths(paths)?;
    let a = coeffs.values();
    Ok(estimate(
        paths,
        seed,
        || vec![0.0; a.len()],
        |phi, rng| {
            gen.fill(rng, phi);
            let mut s = 0.0;
            let mut best = 0.0f64;
            for (an, p) in a.iter().zip(phi.iter()) {
                s += an * p;
                best = best.max(s * s);
            }
            best
        },
    ))
}

/// `X(t_m) = √c Σ_{n≤m} a_n φ_n` on the points of `T`, so that
/// `E (X(s) - X(t))^2 = |s - t|`.
pub struct PartialSumProcess<'a> {
    coeffs: &'a CoefficientSequence,
    root_scale: f64,
    gen: GeneratorKind,
}

impl<'a> PartialSumProcess<'a> {
    pub fn new(coeffs: &'a CoefficientSequence, set: &IndexSet, gen: GeneratorKind) -> Self {
        PartialSumProcess {
            coeffs,
            root_scale: set.scale().sqrt(),
            gen,
        }
    }

    /// Fills `path` (length `N + 1`, starting with `X(0) = 0`) using `phi`
    /// as scratch of length `N`.
    pub fn sample(&self, rng: &mut PathRng, phi: &mut [f64], path: &mut [f64]) {
        self.gen.fill(rng, phi);
        path[0] = 0.0;
        let mut s = 0.0;
        for (m, (an, p)) in self.coeffs.values().iter().zip(phi.iter()).enumerate() {
            s += an * p;
            path[m + 1] = self.root_scale * s;
        }
    }

    /// `sup_{s,t} |X(s) - X(t)|^2` for one draw.
    pub fn sup_increment_square(&self, rng: &mut PathRng, phi: &mut [f64]) -> f64 {
        self.gen.fill(rng, phi);
        let (mut s, mut lo, mut hi) = (0.0f64, 0.0f64, 0.0f64);
        for (an, p) in self.coeffs.values().iter().zip(phi.iter()) {
            s += an * p;
            lo = lo.min(s);
            hi = hi.max(s);
        }
        let spread = self.root_scale * (hi - lo);
        spread * spread
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::mc::estimate_many;

    #[test]
    fn single_term_has_unit_second_moment() {
        let c = CoefficientSequence::explicit(vec![1.0]).unwrap();
        for g in GeneratorKind::ALL {
            let e = simulate_sup_square(&c, g, 20_000, 1).unwrap();
            assert!(e.within(1.0, 3.0), "{g:?}: {e:?}");
        }
    }

    #[test]
    fn rademacher_two_terms() {
        let c = CoefficientSequence::explicit(vec![0.5, 0.5]).unwrap();
        let e = simulate_sup_square(&c, GeneratorKind::Rademacher, 40_000, 2).unwrap();
        assert!(e.within(0.625, 3.0), "{e:?}");
    }

    #[test]
    fn too_few_paths() {
        let c = CoefficientSequence::explicit(vec![1.0]).unwrap();
        assert!(simulate_sup_square(&c, GeneratorKind::Gaussian, 99, 1).is_err());
    }

    #[test]
    fn trig_rows_are_orthonormal() {
        let n = 4;
        let est = estimate_many(
            50_000,
            9,
            n * n,
            || vec![0.0; n],
            |phi, rng, out| {
                GeneratorKind::Trig.fill(rng, phi);
                for i in 0..n {
                    for j in 0..n {
                        out[i * n + j] = phi[i] * phi[j];
                    }
                }
            },
        );
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!(
                    est[i * n + j].within(target, 4.0),
                    "({i},{j}) {:?}",
                    est[i * n + j]
                );
            }
        }
    }
}
