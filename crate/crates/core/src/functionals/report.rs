use std::io::Write;

use serde::Serialize;

use super::dyadic::{classify_good_indices, dyadic_bound, filtered_bound_from, GoodIndexTable, L};
use super::integral::{point_integral, strong_on_weights, weak_on_weights};
use super::rm::{rademacher_menchov, RmTable};
use crate::error::Result;
use crate::series::{CoefficientSequence, DiscreteMeasure, IndexSet, PartitionTree};

#[derive(Clone, Debug, Serialize)]
pub struct LevelRow {
    pub level: u32,
    pub full_sum: f64,
    pub filtered_sum: f64,
    pub good_count: usize,
    pub good: Vec<u128>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointRow {
    pub index: usize,
    pub point: f64,
    pub weight: f64,
    /// `null` when infinite.
    pub strong_at: f64,
    pub infinite: bool,
}

/// The constant of the final characterization, which contains a universal
/// supremum over processes and so is only reported symbolically.
#[derive(Clone, Debug, Serialize)]
pub struct SymbolicConstant {
    pub expression: &'static str,
    pub prefactor: f64,
    pub unknown: &'static str,
}

impl SymbolicConstant {
    fn new() -> Self {
        SymbolicConstant {
            expression: "K = (1/(1 - L/2)) * (L + 64 * sqrt(B))",
            prefactor: 1.0 / (1.0 - L / 2.0),
            unknown: "B = sup over orthogonal-increment X on T of E sup_t (X(t) - X(0))^2",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionalReport {
    /// `null` when infinite; see `infinite`.
    pub strong_value: f64,
    pub strong_argmax: usize,
    pub strong_argmax_point: f64,
    pub infinite: bool,
    pub weak_value: f64,
    pub dyadic_bound_value: f64,
    pub filtered_sum: f64,
    pub filtered_bound_value: f64,
    pub rm_value: Option<f64>,
    #[serde(rename = "L")]
    pub l: f64,
    pub separation_depth: u32,
    pub constant: SymbolicConstant,
    pub levels: Vec<LevelRow>,
    pub points: Vec<PointRow>,
    pub rm_table: Option<RmTable>,
    #[serde(skip)]
    table: GoodIndexTable,
}

impl FunctionalReport {
    pub fn compute(
        coeffs: Option<&CoefficientSequence>,
        set: &IndexSet,
        tree: &PartitionTree,
        m: &DiscreteMeasure,
    ) -> Result<Self> {
        m.check_against(set)?;
        let w = m.weights();
        let d = set.diameter();
        let strong = strong_on_weights(set.positions(), w, d);
        let table = classify_good_indices(m, tree)?;
        let fb = filtered_bound_from(&table);
        let rm = coeffs.map(rademacher_menchov);
        let points = (0..set.len())
            .map(|i| {
                let v = point_integral(set.positions(), w, i, d);
                PointRow {
                    index: i,
                    point: set.points()[i],
                    weight: w[i],
                    strong_at: v,
                    infinite: v.is_infinite(),
                }
            })
            .collect();
        let levels = table
            .levels
            .iter()
            .map(|l| LevelRow {
                level: l.level,
                full_sum: l.full_sum,
                filtered_sum: l.filtered_sum,
                good_count: l.good.len(),
                good: l.good.clone(),
            })
            .collect();
        Ok(FunctionalReport {
            strong_value: strong.value,
            strong_argmax: strong.argmax,
            strong_argmax_point: set.points()[strong.argmax],
            infinite: strong.is_infinite(),
            weak_value: weak_on_weights(set.positions(), w, d),
            dyadic_bound_value: dyadic_bound(m, tree)?,
            filtered_sum: fb.filtered_sum,
            filtered_bound_value: fb.bound,
            rm_value: rm.as_ref().map(|r| r.value),
            l: L,
            separation_depth: tree.separation_depth(),
            constant: SymbolicConstant::new(),
            levels,
            points,
            rm_table: rm,
            table,
        })
    }

    /// Per-level table as CSV: `k,full_sum,filtered_sum,good_count`.
    pub fn write_levels_csv<W: Write>(&self, out: W) -> Result<()> {
        self.table.write_csv(out)
    }
}
