//! The four-step discrete bridge `S_0, ..., S_4` and the choice of the
//! variable `Z_n` that correlates it with the child selector `τ`.

use rand::{Rng, SeedableRng};
use serde::Serialize;

use super::mc::PathRng;
use crate::error::{Error, Result};

/// `S_j = Σ_{l<j} Z_l - (j/4) Σ_l Z_l`; `S_0 = S_4 = 0` exactly.
pub fn s_skeleton(z: [f64; 4]) -> [f64; 5] {
    let mut prefix = [0.0; 5];
    for j in 0..4 {
        prefix[j + 1] = prefix[j] + z[j];
    }
    let total = prefix[4];
    let mut s = [0.0; 5];
    for j in 1..4 {
        s[j] = prefix[j] - j as f64 / 4.0 * total;
    }
    s
}

/// Which `Z_n` is tied to `τ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SkeletonCase {
    /// `Z_3 = x 1{τ=0} + y 1{τ=2}`.
    Even,
    /// `Z_2 = x 1{τ=3} + y 1{τ=1}`.
    Odd,
    /// Every `Z_j` is a sign independent of `τ`.
    Free,
}

impl SkeletonCase {
    /// Index of the `τ`-measurable variable.
    pub fn n(self) -> Option<usize> {
        match self {
            SkeletonCase::Even => Some(3),
            SkeletonCase::Odd => Some(2),
            SkeletonCase::Free => None,
        }
    }

    /// The `τ` value on which `Z_n = x`, and the one on which `Z_n = y`.
    fn support(self) -> Option<(usize, usize)> {
        match self {
            SkeletonCase::Even => Some((0, 2)),
            SkeletonCase::Odd => Some((3, 1)),
            SkeletonCase::Free => None,
        }
    }
}

/// Law of `(τ, Z_0..Z_3)` for one parent cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkeletonLaw {
    /// `P(τ = j)`: child masses over the parent mass.
    pub probs: [f64; 4],
    pub case: SkeletonCase,
    pub x: f64,
    pub y: f64,
}

/// One draw from a [`SkeletonLaw`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkeletonVariables {
    pub z: [f64; 4],
    pub tau: usize,
    pub probs: [f64; 4],
    pub case: SkeletonCase,
    pub n: Option<usize>,
    pub x: f64,
    pub y: f64,
}

impl SkeletonLaw {
    /// Picks the case from the good children: the even pair first, then the
    /// odd pair. A case whose two-point law would put mass on an empty child
    /// falls back to [`SkeletonCase::Free`].
    pub fn new(child_masses: [f64; 4], good: [bool; 4]) -> Result<Self> {
        if child_masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidMeasure(format!(
                "child masses {child_masses:?}"
            )));
        }
        let parent: f64 = child_masses.iter().sum();
        if !(parent > 0.0) {
            return Err(Error::InvalidMeasure("parent cell has no mass".into()));
        }
        let probs = child_masses.map(|m| m / parent);
        let wanted = if good[0] || good[2] {
            SkeletonCase::Even
        } else if good[1] || good[3] {
            SkeletonCase::Odd
        } else {
            SkeletonCase::Free
        };
        Ok(SkeletonLaw::with_case(probs, wanted))
    }

    fn with_case(probs: [f64; 4], case: SkeletonCase) -> Self {
        let Some((xi, yi)) = case.support() else {
            return SkeletonLaw {
                probs,
                case,
                x: 0.0,
                y: 0.0,
            };
        };
        let (px, py) = (probs[xi], probs[yi]);
        if !(px > 0.0 && py > 0.0) {
            log::warn!("degenerate skeleton law {probs:?}; using independent signs");
            return SkeletonLaw {
                probs,
                case: SkeletonCase::Free,
                x: 0.0,
                y: 0.0,
            };
        }
        let x = (py / (px * (px + py))).sqrt();
        SkeletonLaw {
            probs,
            case,
            x,
            y: -x * px / py,
        }
    }

    /// `Z_n` given `τ`.
    pub fn z_n(&self, tau: usize) -> f64 {
        match self.case.support() {
            Some((xi, _)) if tau == xi => self.x,
            Some((_, yi)) if tau == yi => self.y,
            _ => 0.0,
        }
    }

    /// `(E Z_n, E Z_n^2)` summed exactly over the law of `τ`.
    pub fn z_n_moments(&self) -> (f64, f64) {
        (0..4).fold((0.0, 0.0), |(m1, m2), j| {
            let z = self.z_n(j);
            (m1 + self.probs[j] * z, m2 + self.probs[j] * z * z)
        })
    }

    /// `V_n = (1/4) sqrt(P_a P_b / (P_a + P_b))` over the tied pair; 0 when free.
    pub fn v_closed_form(&self) -> f64 {
        match self.case.support() {
            Some((a, b)) => {
                let (pa, pb) = (self.probs[a], self.probs[b]);
                0.25 * (pa * pb / (pa + pb)).sqrt()
            }
            None => 0.0,
        }
    }

    /// `V_n = Σ_j E S_j 1{τ=j} - (E (S_{j+1} - S_j) 1{τ=j})_-`, evaluated by
    /// enumerating the law.
    pub fn v_by_enumeration(&self) -> f64 {
        let mut level = [0.0; 4];
        let mut step = [0.0; 4];
        for o in self.outcomes() {
            let s = s_skeleton(o.z);
            level[o.tau] += o.prob * s[o.tau];
            step[o.tau] += o.prob * (s[o.tau + 1] - s[o.tau]);
        }
        (0..4).map(|j| level[j] - (-step[j]).max(0.0)).sum()
    }

    /// Every outcome of `(τ, Z)` with its probability; free `Z_j` are signs.
    pub fn outcomes(&self) -> Vec<Outcome> {
        let n = self.case.n();
        let free: Vec<usize> = (0..4).filter(|&l| Some(l) != n).collect();
        let sign_prob = 0.5f64.powi(free.len() as i32);
        let mut out = Vec::with_capacity(4 << free.len());
        for tau in 0..4 {
            if self.probs[tau] == 0.0 {
                continue;
            }
            for bits in 0..1u32 << free.len() {
                let mut z = [0.0; 4];
                for (b, &l) in free.iter().enumerate() {
                    z[l] = if bits >> b & 1 == 1 { 1.0 } else { -1.0 };
                }
                if let Some(n) = n {
                    z[n] = self.z_n(tau);
                }
                out.push(Outcome {
                    prob: self.probs[tau] * sign_prob,
                    tau,
                    z,
                });
            }
        }
        out
    }

    pub fn sample_tau(&self, rng: &mut PathRng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for j in 0..3 {
            acc += self.probs[j];
            if u < acc && self.probs[j] > 0.0 {
                return j;
            }
        }
        (0..4)
            .rev()
            .find(|&j| self.probs[j] > 0.0)
            .expect("some child has mass")
    }

    pub fn sample(&self, rng: &mut PathRng) -> SkeletonVariables {
        let tau = self.sample_tau(rng);
        let n = self.case.n();
        let mut z = [0.0; 4];
        for (l, zl) in z.iter_mut().enumerate() {
            *zl = if Some(l) == n {
                self.z_n(tau)
            } else if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            };
        }
        SkeletonVariables {
            z,
            tau,
            probs: self.probs,
            case: self.case,
            n,
            x: self.x,
            y: self.y,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub prob: f64,
    pub tau: usize,
    pub z: [f64; 4],
}

/// Samples one `(τ, Z)` for a parent with the given child masses; `good`
/// lists the good children (any of `0..4`).
pub fn build_skeleton_variables(
    child_masses: [f64; 4],
    good: &[usize],
    seed: u64,
) -> Result<SkeletonVariables> {
    let mut flags = [false; 4];
    for &j in good {
        if j >= 4 {
            return Err(Error::Domain(format!("child index {j} outside 0..4")));
        }
        flags[j] = true;
    }
    let law = SkeletonLaw::new(child_masses, flags)?;
    let mut rng = PathRng::seed_from_u64(seed);
    Ok(law.sample(&mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skeleton_examples() {
        assert_eq!(
            s_skeleton([1.0, -1.0, 1.0, -1.0]),
            [0.0, 1.0, 0.0, 1.0, 0.0]
        );
        assert_eq!(s_skeleton([1.0; 4]), [0.0; 5]);
    }

    #[test]
    fn sign_enumeration_reproduces_bridge_moments() {
        for l in 0..5 {
            for m in 0..5 {
                let mut acc = 0.0;
                for bits in 0..16u32 {
                    let z = std::array::from_fn(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 });
                    let s = s_skeleton(z);
                    acc += (s[l] - s[m]).powi(2) / 16.0;
                }
                let d = l.abs_diff(m) as f64;
                assert!((acc - d * (1.0 - d / 4.0)).abs() < 1e-12, "l={l} m={m}");
            }
        }
    }

    #[test]
    fn even_case_example() {
        let law = SkeletonLaw::new([0.4, 0.1, 0.4, 0.1], [true, false, false, false]).unwrap();
        assert_eq!(law.case, SkeletonCase::Even);
        assert!((law.x - 1.1180339887498947).abs() < 1e-15);
        assert!((law.y + 1.1180339887498947).abs() < 1e-15);
        let (m1, m2) = law.z_n_moments();
        assert!(m1.abs() < 1e-15 && (m2 - 1.0).abs() < 1e-15);
        assert!((law.v_closed_form() - 0.11180339887498948).abs() < 1e-15);
        assert!((law.v_by_enumeration() - law.v_closed_form()).abs() < 1e-15);
    }

    #[test]
    fn half_half_example() {
        let law = SkeletonLaw::new([0.5, 0.0, 0.5, 0.0], [false, false, true, false]).unwrap();
        assert_eq!((law.x, law.y), (1.0, -1.0));
        assert_eq!(law.v_closed_form(), 0.125);
        assert!((law.v_by_enumeration() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn odd_case_and_free_case() {
        let law = SkeletonLaw::new([0.1, 0.3, 0.1, 0.5], [false, true, false, false]).unwrap();
        assert_eq!(law.case, SkeletonCase::Odd);
        assert!((law.v_by_enumeration() - law.v_closed_form()).abs() < 1e-15);
        let free = SkeletonLaw::new([0.25; 4], [false; 4]).unwrap();
        assert_eq!(free.case, SkeletonCase::Free);
        assert_eq!(free.v_closed_form(), 0.0);
        assert!(free.v_by_enumeration().abs() < 1e-15);
    }

    #[test]
    fn degenerate_pair_falls_back() {
        let law = SkeletonLaw::new([0.0, 0.5, 0.5, 0.0], [false, false, true, false]).unwrap();
        assert_eq!(law.case, SkeletonCase::Free);
        assert!(SkeletonLaw::new([0.0; 4], [true; 4]).is_err());
    }

    #[test]
    fn sampled_variables_follow_the_law() {
        let v = build_skeleton_variables([0.4, 0.1, 0.4, 0.1], &[0, 2], 3).unwrap();
        assert_eq!(v.n, Some(3));
        let expected = match v.tau {
            0 => v.x,
            2 => v.y,
            _ => 0.0,
        };
        assert_eq!(v.z[3], expected);
        assert!(v.z[..3].iter().all(|z| z.abs() == 1.0));
        assert!(build_skeleton_variables([0.25; 4], &[4], 0).is_err());
    }
}
