//! Dyadic majorants: the full 4-adic sum and its good-index filtration.

use serde::Serialize;

use crate::error::Result;
use crate::series::{DiscreteMeasure, PartitionTree};

/// `2^{1/2} * 5/4`.
pub const L: f64 = std::f64::consts::SQRT_2 * 1.25;

/// `Σ_{k≥1} 2^-k Σ_i μ(A^(k)_i)^{1/2}`, with the singleton tail past the
/// separation depth summed in closed form.
pub fn dyadic_bound(m: &DiscreteMeasure, tree: &PartitionTree) -> Result<f64> {
    check(m, tree)?;
    let sep = tree.separation_depth();
    let mut sum = 0.0;
    for k in 1..=sep {
        sum += 0.5f64.powi(k as i32) * level_root_sum(m, tree, k);
    }
    let singles: f64 = m.weights().iter().map(|w| w.sqrt()).sum();
    Ok(sum + 0.5f64.powi(sep as i32) * singles)
}

fn level_root_sum(m: &DiscreteMeasure, tree: &PartitionTree, k: u32) -> f64 {
    tree.cells(k)
        .iter()
        .map(|c| m.mass(c.points.clone()).sqrt())
        .sum()
}

fn check(m: &DiscreteMeasure, tree: &PartitionTree) -> Result<()> {
    if m.len() == tree.positions().len() {
        Ok(())
    } else {
        Err(crate::Error::SizeMismatch {
            measure: m.len(),
            points: tree.positions().len(),
        })
    }
}

/// Which children `j` of a parent with child masses `p` are well balanced:
/// `parent/32 <= p_j <= (p_j + p_{j+2 mod 4})/2`, non-strict. A parent without
/// mass has no good children.
pub fn good_children(p: [f64; 4]) -> [bool; 4] {
    let parent = p[0] + p[1] + p[2] + p[3];
    if !(parent > 0.0) {
        return [false; 4];
    }
    let pair = [p[0] + p[2], p[1] + p[3]];
    std::array::from_fn(|j| parent / 32.0 <= p[j] && p[j] <= pair[j % 2] / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodLevel {
    pub level: u32,
    /// `Σ_i μ(A^(k)_i)^{1/2}` over all cells.
    pub full_sum: f64,
    /// The same sum restricted to `I(k)`.
    pub filtered_sum: f64,
    pub good: Vec<u128>,
}

/// `I(k)` and the per-level sums for `k = 1..=separation_depth + 1`; every
/// deeper level has `I(k) = ∅`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodIndexTable {
    pub levels: Vec<GoodLevel>,
}

impl GoodIndexTable {
    pub fn level(&self, k: u32) -> Option<&GoodLevel> {
        self.levels.get(k.checked_sub(1)? as usize)
    }

    pub fn is_good(&self, k: u32, index: u128) -> bool {
        self.level(k)
            .is_some_and(|l| l.good.binary_search(&index).is_ok())
    }

    /// `Σ_{k ≤ max_level} 2^-k Σ_{i ∈ I(k)} μ(A^(k)_i)^{1/2}`.
    pub fn filtered_series(&self, max_level: u32) -> f64 {
        self.levels
            .iter()
            .take_while(|l| l.level <= max_level)
            .map(|l| 0.5f64.powi(l.level as i32) * l.filtered_sum)
            .sum()
    }

    /// Full filtered series; finite because the table stops where `I(k)`
    /// becomes permanently empty.
    pub fn filtered_total(&self) -> f64 {
        self.filtered_series(u32::MAX)
    }

    /// Per-level table as CSV: `k,full_sum,filtered_sum,good_count`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| crate::Error::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "full_sum", "filtered_sum", "good_count"])
            .map_err(io)?;
        for l in &self.levels {
            w.write_record([
                l.level.to_string(),
                l.full_sum.to_string(),
                l.filtered_sum.to_string(),
                l.good.len().to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| crate::Error::Io(e.to_string()))
    }

    /// Deepest level with a nonempty `I(k)`, 0 if none.
    pub fn last_good_level(&self) -> u32 {
        self.levels
            .iter()
            .rev()
            .find(|l| !l.good.is_empty())
            .map_or(0, |l| l.level)
    }
}

pub fn classify_good_indices(m: &DiscreteMeasure, tree: &PartitionTree) -> Result<GoodIndexTable> {
    check(m, tree)?;
    let last = tree.separation_depth() + 1;
    let mut levels = Vec::with_capacity(last as usize);
    for k in 1..=last {
        let mut level = GoodLevel {
            level: k,
            full_sum: 0.0,
            filtered_sum: 0.0,
            good: Vec::new(),
        };
        for parent in tree.cells(k - 1).iter() {
            let ranges = tree.children(k - 1, parent);
            let masses: [f64; 4] = std::array::from_fn(|j| m.mass(ranges[j].clone()));
            let good = good_children(masses);
            for j in 0..4 {
                let root = masses[j].sqrt();
                level.full_sum += root;
                if good[j] {
                    level.filtered_sum += root;
                    level.good.push(4 * parent.index + j as u128);
                }
            }
        }
        levels.push(level);
    }
    Ok(GoodIndexTable { levels })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FilteredBound {
    pub filtered_sum: f64,
    pub bound: f64,
}

/// `(L + Σ_k 2^-k Σ_{i∈I(k)} μ(A^(k)_i)^{1/2}) / (1 - L/2)`.
pub fn filtered_bound(m: &DiscreteMeasure, tree: &PartitionTree) -> Result<FilteredBound> {
    let table = classify_good_indices(m, tree)?;
    Ok(filtered_bound_from(&table))
}

pub fn filtered_bound_from(table: &GoodIndexTable) -> FilteredBound {
    let filtered_sum = table.filtered_total();
    FilteredBound {
        filtered_sum,
        bound: (L + filtered_sum) / (1.0 - L / 2.0),
    }
}
