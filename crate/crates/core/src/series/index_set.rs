use serde::Serialize;

use super::coeffs::CoefficientSequence;
use super::position::Position;
use crate::error::{Error, Result};

/// The finite set `T = {0} ∪ {c Σ_{n≤m} a_n^2}` inside `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSet {
    positions: Vec<Position>,
    points: Vec<f64>,
    scale: f64,
    raw_total: f64,
}

/// Builds `T` from the coefficients.
///
/// When `Σ a_n^2 < 1` the partial sums are used as they are (`c = 1`).
/// Otherwise everything is multiplied by `c = (1 - 2^-32) / Σ a_n^2` so the
/// largest point stays below 1. Sums are accumulated exactly in 128-bit
/// fixed point, which is what decides the branch.
pub fn build_index_set(coeffs: &CoefficientSequence) -> Result<IndexSet> {
    let squares = coeffs.squares();
    let raw_total = neumaier_sum(squares);
    let (scale, positions) = match accumulate(squares, 1.0)? {
        Some(p) => (1.0, p),
        None => {
            let scale = (1.0 - 2f64.powi(-32)) / raw_total;
            let p = accumulate(squares, scale)?.ok_or_else(|| {
                Error::Consistency(format!("scaled partial sums reach 1 (scale {scale})"))
            })?;
            (scale, p)
        }
    };
    IndexSet::from_parts(positions, scale, raw_total)
}

/// `Ok(None)` when the partial sums reach 1.
fn accumulate(squares: &[f64], scale: f64) -> Result<Option<Vec<Position>>> {
    let mut out = Vec::with_capacity(squares.len() + 1);
    let mut acc = Position::ZERO;
    out.push(acc);
    for (n, &a2) in squares.iter().enumerate() {
        let Some(step) = Position::from_f64(scale * a2) else {
            return Ok(None);
        };
        if step == Position::ZERO {
            return Err(Error::Consistency(format!(
                "a_{}^2 = {a2:e} is below the 2^-128 resolution; points {n} and {} coincide",
                n + 1,
                n + 1
            )));
        }
        match acc.checked_add(step) {
            Some(next) => acc = next,
            None => return Ok(None),
        }
        out.push(acc);
    }
    Ok(Some(out))
}

fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl IndexSet {
    /// Assembles a set from explicit positions, which must start at 0 and
    /// increase strictly.
    pub fn from_positions(positions: Vec<Position>) -> Result<Self> {
        let raw_total = positions.last().map_or(0.0, |p| p.to_f64());
        Self::from_parts(positions, 1.0, raw_total)
    }

    fn from_parts(positions: Vec<Position>, scale: f64, raw_total: f64) -> Result<Self> {
        if positions.first() != Some(&Position::ZERO) {
            return Err(Error::Consistency("T must start at 0".into()));
        }
        if let Some(w) = positions.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Consistency(format!(
                "points {w} and {} are not strictly increasing",
                w + 1
            )));
        }
        let points = positions.iter().map(|p| p.to_f64()).collect();
        Ok(IndexSet {
            positions,
            points,
            scale,
            raw_total,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    /// `f64` view of the points, rounded toward zero.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn position(&self, i: usize) -> Position {
        self.positions[i]
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn raw_total(&self) -> f64 {
        self.raw_total
    }

    /// `D(T) = t_N - t_0`.
    pub fn diameter(&self) -> f64 {
        self.positions[self.len() - 1].distance(self.positions[0])
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::NotInSet(format!("index {i} (|T| = {})", self.len())))
        }
    }

    /// Index of the point whose `f64` view equals `t`.
    pub fn locate(&self, t: f64) -> Result<usize> {
        let i = self.points.partition_point(|&p| p < t);
        if self.points.get(i) == Some(&t) {
            Ok(i)
        } else {
            Err(Error::NotInSet(format!("{t}")))
        }
    }

    pub fn export(&self) -> IndexSetExport {
        IndexSetExport {
            points: self.points.clone(),
            points_q128: self
                .positions
                .iter()
                .map(|p| format!("{:032x}", p.bits()))
                .collect(),
            scale: self.scale,
            raw_total: self.raw_total,
            diameter: self.diameter(),
        }
    }
}

/// JSON shape of an exported index set.
#[derive(Clone, Debug, Serialize)]
pub struct IndexSetExport {
    pub points: Vec<f64>,
    /// Exact points as hex numerators over `2^128`.
    pub points_q128: Vec<String>,
    pub scale: f64,
    pub raw_total: f64,
    pub diameter: f64,
}
