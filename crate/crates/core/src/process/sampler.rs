//! Processes on `T` with prescribed increment second moments.

use std::ops::Range;

use rand::Rng;
use rand_distr::StandardNormal;

use super::bridge::bridge_leaf_sample;
use super::mc::PathRng;
use super::skeleton::{s_skeleton, SkeletonLaw};
use crate::error::Result;
use crate::functionals::classify_good_indices;
use crate::series::{DiscreteMeasure, IndexSet, PartitionTree};

pub trait ProcessSampler: Sync {
    /// Coordinates of the sampled points, increasing.
    fn points(&self) -> &[f64];

    /// Writes one path into `out` (length `points().len()`).
    fn sample_into(&self, rng: &mut PathRng, out: &mut [f64]);

    /// Declared `E |Y(s_i) - Y(s_j)|^2`.
    fn increment_moment(&self, i: usize, j: usize) -> f64;

    fn len(&self) -> usize {
        self.points().len()
    }

    fn is_empty(&self) -> bool {
        self.points().is_empty()
    }
}

/// A single bridge over `[0, 1)`: increment moments `|s-t|(1-|s-t|)`.
pub struct BridgeProcess {
    points: Vec<f64>,
    offsets: Vec<f64>,
}

impl BridgeProcess {
    pub fn new(set: &IndexSet) -> Self {
        let offsets = set
            .positions()
            .iter()
            .map(|p| p.offset_in_cell(0))
            .collect();
        BridgeProcess {
            points: set.points().to_vec(),
            offsets,
        }
    }
}

impl ProcessSampler for BridgeProcess {
    fn points(&self) -> &[f64] {
        &self.points
    }

    fn sample_into(&self, rng: &mut PathRng, out: &mut [f64]) {
        out.fill(0.0);
        bridge_leaf_sample(0, &self.offsets, 1.0, rng, out);
    }

    fn increment_moment(&self, i: usize, j: usize) -> f64 {
        level_zero_moment(self.points[i], self.points[j])
    }
}

fn level_zero_moment(s: f64, t: f64) -> f64 {
    let d = (s - t).abs();
    d * (1.0 - d)
}

/// `X(t) = Y(t) + t Z` with `Z` standard normal and independent of `Y`,
/// turning bridge moments `|s-t|(1-|s-t|)` into `|s-t|`.
pub struct Lift<S> {
    inner: S,
}

impl<S: ProcessSampler> Lift<S> {
    pub fn new(inner: S) -> Self {
        Lift { inner }
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    /// Draws `Y` into `y` and the lifted path into `x` from the same randomness.
    pub fn sample_pair(&self, rng: &mut PathRng, y: &mut [f64], x: &mut [f64]) {
        self.inner.sample_into(rng, y);
        let z: f64 = rng.sample(StandardNormal);
        for ((xi, yi), t) in x.iter_mut().zip(y.iter()).zip(self.inner.points()) {
            *xi = yi + t * z;
        }
    }
}

impl<S: ProcessSampler> ProcessSampler for Lift<S> {
    fn points(&self) -> &[f64] {
        self.inner.points()
    }

    fn sample_into(&self, rng: &mut PathRng, out: &mut [f64]) {
        self.inner.sample_into(rng, out);
        let z: f64 = rng.sample(StandardNormal);
        for (o, t) in out.iter_mut().zip(self.inner.points()) {
            *o += t * z;
        }
    }

    fn increment_moment(&self, i: usize, j: usize) -> f64 {
        let d = self.points()[i] - self.points()[j];
        self.inner.increment_moment(i, j) + d * d
    }
}

/// One nonempty cell visited by the recursion.
#[derive(Clone, Debug)]
struct CellPlan {
    index: u128,
    points: Range<usize>,
    /// `None` for leaves and for cells without mass.
    law: Option<SkeletonLaw>,
}

/// The recursive construction: at each level the parent carries the skeleton
/// interpolated linearly across its four children, one child is selected by
/// `τ` and carries a rescaled copy of the construction one level down, and
/// the cells at `base_depth` carry bridges.
pub struct AdversarialProcess {
    points: Vec<f64>,
    base_depth: u32,
    /// `plans[k]`: nonempty cells at level `k`, sorted by index.
    plans: Vec<Vec<CellPlan>>,
    /// `offsets[k][p]`: offset of point `p` inside its level-`k` cell.
    offsets: Vec<Vec<f64>>,
    /// `child[k][p]`: which child (0..4) of its level-`k-1` parent holds `p`.
    child: Vec<Vec<u8>>,
}

impl AdversarialProcess {
    pub fn new(
        set: &IndexSet,
        tree: &PartitionTree,
        m: &DiscreteMeasure,
        base_depth: u32,
    ) -> Result<Self> {
        m.check_against(set)?;
        let base_depth = if base_depth > tree.depth() {
            log::warn!(
                "base depth {base_depth} exceeds tree depth {}; clipped",
                tree.depth()
            );
            tree.depth()
        } else {
            base_depth
        };
        let table = classify_good_indices(m, tree)?;
        let mut plans = Vec::with_capacity(base_depth as usize + 1);
        for k in 0..=base_depth {
            let cells = tree.cells(k);
            let level: Vec<CellPlan> = cells
                .iter()
                .map(|c| {
                    let law = if k < base_depth && m.mass(c.points.clone()) > 0.0 {
                        let ranges = tree.children(k, c);
                        let masses = std::array::from_fn(|j| m.mass(ranges[j].clone()));
                        let good =
                            std::array::from_fn(|j| table.is_good(k + 1, 4 * c.index + j as u128));
                        Some(SkeletonLaw::new(masses, good)?)
                    } else {
                        None
                    };
                    Ok(CellPlan {
                        index: c.index,
                        points: c.points.clone(),
                        law,
                    })
                })
                .collect::<Result<_>>()?;
            plans.push(level);
        }
        let pos = set.positions();
        let offsets = (0..=base_depth)
            .map(|k| pos.iter().map(|p| p.offset_in_cell(k)).collect())
            .collect();
        let child = (0..=base_depth)
            .map(|k| {
                pos.iter()
                    .map(|p| {
                        if k == 0 {
                            0
                        } else {
                            (p.cell_index(k) & 3) as u8
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(AdversarialProcess {
            points: set.points().to_vec(),
            base_depth,
            plans,
            offsets,
            child,
        })
    }

    pub fn base_depth(&self) -> u32 {
        self.base_depth
    }
}

impl ProcessSampler for AdversarialProcess {
    fn points(&self) -> &[f64] {
        &self.points
    }

    fn sample_into(&self, rng: &mut PathRng, out: &mut [f64]) {
        out.fill(0.0);
        let mut at = 0usize;
        let mut factor = 1.0;
        for k in 1..=self.base_depth {
            let plan = &self.plans[k as usize - 1][at];
            let Some(law) = &plan.law else {
                return;
            };
            let v = law.sample(rng);
            let s = s_skeleton(v.z);
            let (down, up) = (0.5f64.powi(k as i32), 2f64.powi(k as i32));
            let (child, offs) = (&self.child[k as usize], &self.offsets[k as usize]);
            for p in plan.points.clone() {
                let j = child[p] as usize;
                out[p] += factor * (down * s[j] + up * offs[p] * (s[j + 1] - s[j]));
            }
            factor /= law.probs[v.tau].sqrt();
            let next = 4 * plan.index + v.tau as u128;
            at = self.plans[k as usize]
                .binary_search_by(|c| c.index.cmp(&next))
                .expect("τ only selects children with mass");
        }
        let leaf = &self.plans[self.base_depth as usize][at];
        let range = leaf.points.clone();
        bridge_leaf_sample(
            self.base_depth,
            &self.offsets[self.base_depth as usize][range.clone()],
            factor,
            rng,
            &mut out[range],
        );
    }

    fn increment_moment(&self, i: usize, j: usize) -> f64 {
        level_zero_moment(self.points[i], self.points[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::mc::estimate_many;
    use crate::series::{
        build_index_set, build_partition, make_measure, CoefficientSequence, Depth, MeasureKind,
    };

    fn grid16() -> (IndexSet, PartitionTree) {
        let t = build_index_set(&CoefficientSequence::explicit(vec![0.25; 15]).unwrap()).unwrap();
        let tree = build_partition(&t, Depth::Auto).unwrap();
        (t, tree)
    }

    fn check_moments<S: ProcessSampler>(p: &S, paths: usize, seed: u64) {
        let n = p.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let est = estimate_many(
            paths,
            seed,
            pairs.len(),
            || vec![0.0; n],
            |buf, rng, out| {
                p.sample_into(rng, buf);
                for (o, &(i, j)) in out.iter_mut().zip(&pairs) {
                    *o = (buf[i] - buf[j]).powi(2);
                }
            },
        );
        let misses = est
            .iter()
            .zip(&pairs)
            .filter(|(e, &(i, j))| !e.within(p.increment_moment(i, j), 4.0))
            .count();
        assert_eq!(misses, 0);
    }

    #[test]
    fn adversarial_endpoints_are_pinned() {
        let (t, tree) = grid16();
        let m = make_measure(&t, MeasureKind::Dirichlet { seed: 2 }).unwrap();
        let p = AdversarialProcess::new(&t, &tree, &m, 2).unwrap();
        let mut out = vec![1.0; t.len()];
        for i in 0..20 {
            p.sample_into(&mut crate::process::mc::path_rng(1, i), &mut out);
            assert_eq!(out[0], 0.0);
        }
    }

    #[test]
    fn adversarial_moments_one_level() {
        let (t, tree) = grid16();
        let m = make_measure(&t, MeasureKind::Dirichlet { seed: 5 }).unwrap();
        let p = AdversarialProcess::new(&t, &tree, &m, 1).unwrap();
        check_moments(&p, 40_000, 3);
    }

    #[test]
    fn lifted_moments_are_distances() {
        let (t, tree) = grid16();
        let u = make_measure(&t, MeasureKind::Uniform).unwrap();
        let x = Lift::new(AdversarialProcess::new(&t, &tree, &u, 2).unwrap());
        assert!((x.increment_moment(0, 5) - 5.0 / 16.0).abs() < 1e-15);
        check_moments(&x, 40_000, 4);
    }

    #[test]
    fn point_mass_follows_one_chain() {
        let (t, tree) = grid16();
        let p = make_measure(&t, MeasureKind::PointMass(5)).unwrap();
        let x = AdversarialProcess::new(&t, &tree, &p, 2).unwrap();
        let mut out = vec![0.0; t.len()];
        x.sample_into(&mut crate::process::mc::path_rng(0, 0), &mut out);
        assert!(out.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn depth_is_clipped() {
        let (t, tree) = grid16();
        let u = make_measure(&t, MeasureKind::Uniform).unwrap();
        assert_eq!(
            AdversarialProcess::new(&t, &tree, &u, 9)
                .unwrap()
                .base_depth(),
            tree.depth()
        );
    }
}
