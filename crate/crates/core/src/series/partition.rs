use std::borrow::Cow;
use std::ops::Range;

use serde::Serialize;

use super::index_set::IndexSet;
use super::position::{cell_width, Position, MAX_LEVEL};
use crate::error::{Error, Result};

/// A nonempty cell `A^(k)_i = [i 4^-k, (i+1) 4^-k) ∩ T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub index: u128,
    /// Contiguous range of point indices in the cell.
    pub points: Range<usize>,
}

impl Cell {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Requested depth of a partition tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    /// Stop at the separation depth.
    Auto,
    Fixed(u32),
}

/// Nested 4-adic cells over `T`, levels `0..=depth`.
///
/// Levels are materialized down to `max(depth, separation_depth)`; deeper
/// levels are all singletons and are produced on demand by [`cells`].
///
/// [`cells`]: PartitionTree::cells
#[derive(Clone, Debug)]
pub struct PartitionTree {
    depth: u32,
    separation_depth: u32,
    positions: Vec<Position>,
    levels: Vec<Vec<Cell>>,
}

pub fn build_partition(set: &IndexSet, depth: Depth) -> Result<PartitionTree> {
    if set.is_empty() {
        return Err(Error::Consistency("empty index set".into()));
    }
    if let Depth::Fixed(d) = depth {
        if d > MAX_LEVEL {
            return Err(Error::InvalidOption(format!(
                "depth {d} exceeds {MAX_LEVEL}"
            )));
        }
    }
    let positions = set.positions().to_vec();
    let mut levels = vec![vec![Cell {
        index: 0,
        points: 0..positions.len(),
    }]];
    let mut separation_depth = None;
    let mut k = 0u32;
    loop {
        let current = &levels[k as usize];
        if separation_depth.is_none() && current.iter().all(|c| c.len() == 1) {
            separation_depth = Some(k);
        }
        let wanted = match depth {
            Depth::Auto => separation_depth.unwrap_or(u32::MAX),
            Depth::Fixed(d) => d.max(separation_depth.unwrap_or(u32::MAX)),
        };
        if k >= wanted {
            break;
        }
        if k == MAX_LEVEL {
            return Err(Error::Consistency(
                "points not separated at the deepest level".into(),
            ));
        }
        let next = refine(&positions, current, k + 1);
        levels.push(next);
        k += 1;
    }
    let separation_depth = separation_depth.expect("loop exits only once separated");
    let depth = match depth {
        Depth::Auto => separation_depth,
        Depth::Fixed(d) => d,
    };
    Ok(PartitionTree {
        depth,
        separation_depth,
        positions,
        levels,
    })
}

/// Splits every parent cell into its nonempty children at `level`.
fn refine(positions: &[Position], parents: &[Cell], level: u32) -> Vec<Cell> {
    let mut out = Vec::with_capacity(parents.len() * 2);
    for parent in parents {
        let slice = &positions[parent.points.clone()];
        let mut start = 0;
        for j in 0..4u128 {
            let child = 4 * parent.index + j;
            let end = if j == 3 {
                slice.len()
            } else {
                slice.partition_point(|p| p.cell_index(level) <= child)
            };
            if end > start {
                out.push(Cell {
                    index: child,
                    points: parent.points.start + start..parent.points.start + end,
                });
            }
            start = end;
        }
    }
    out
}

impl PartitionTree {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Smallest `k` at which every nonempty cell is a singleton.
    pub fn separation_depth(&self) -> u32 {
        self.separation_depth
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    /// Nonempty cells at `level`, ordered by index.
    pub fn cells(&self, level: u32) -> Cow<'_, [Cell]> {
        match self.levels.get(level as usize) {
            Some(cells) => Cow::Borrowed(cells),
            None => Cow::Owned(
                self.positions
                    .iter()
                    .enumerate()
                    .map(|(i, p)| Cell {
                        index: p.cell_index(level),
                        points: i..i + 1,
                    })
                    .collect(),
            ),
        }
    }

    /// Nonempty cell `index` at `level`, if any.
    pub fn cell(&self, level: u32, index: u128) -> Option<Cell> {
        let cells = self.cells(level);
        cells
            .binary_search_by(|c| c.index.cmp(&index))
            .ok()
            .map(|i| cells[i].clone())
    }

    /// Point ranges of the four children `4i + j` of a level-`level` cell,
    /// possibly empty.
    pub fn children(&self, level: u32, parent: &Cell) -> [Range<usize>; 4] {
        let child_level = level + 1;
        let slice = &self.positions[parent.points.clone()];
        let base = parent.points.start;
        let mut bounds = [0usize; 5];
        for j in 0..4u128 {
            bounds[j as usize + 1] = if j == 3 {
                slice.len()
            } else {
                slice.partition_point(|p| p.cell_index(child_level) <= 4 * parent.index + j)
            };
        }
        std::array::from_fn(|j| base + bounds[j]..base + bounds[j + 1])
    }

    pub fn export(&self) -> PartitionExport {
        let levels = (0..=self.depth)
            .map(|k| LevelExport {
                level: k,
                cells: self
                    .cells(k)
                    .iter()
                    .map(|c| CellExport {
                        index: c.index,
                        left: c.index as f64 * cell_width(k),
                        right: (c.index + 1) as f64 * cell_width(k),
                        first_point: c.points.start,
                        end_point: c.points.end,
                    })
                    .collect(),
            })
            .collect();
        PartitionExport {
            depth: self.depth,
            separation_depth: self.separation_depth,
            levels,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionExport {
    pub depth: u32,
    pub separation_depth: u32,
    pub levels: Vec<LevelExport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelExport {
    pub level: u32,
    pub cells: Vec<CellExport>,
}

/// One nonempty cell; its points are `first_point..end_point`.
#[derive(Clone, Debug, Serialize)]
pub struct CellExport {
    pub index: u128,
    pub left: f64,
    pub right: f64,
    pub first_point: usize,
    pub end_point: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(points: &[f64]) -> IndexSet {
        IndexSet::from_positions(
            points
                .iter()
                .map(|&p| Position::from_f64(p).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_points_depth_one() {
        let tree = build_partition(&set(&[0.0, 0.25]), Depth::Fixed(1)).unwrap();
        assert_eq!(tree.separation_depth(), 1);
        let cells = tree.cells(1);
        assert_eq!(cells.len(), 2);
        assert_eq!(
            cells[0],
            Cell {
                index: 0,
                points: 0..1
            }
        );
        assert_eq!(
            cells[1],
            Cell {
                index: 1,
                points: 1..2
            }
        );
        assert!(tree.cell(1, 2).is_none() && tree.cell(1, 3).is_none());
        let root = tree.cell(0, 0).unwrap();
        assert_eq!(tree.children(0, &root), [0..1, 1..2, 2..2, 2..2]);
    }

    #[test]
    fn singleton_set() {
        let tree = build_partition(&set(&[0.0]), Depth::Fixed(5)).unwrap();
        assert_eq!(tree.separation_depth(), 0);
        for k in 0..=5 {
            assert_eq!(
                tree.cells(k).as_ref(),
                &[Cell {
                    index: 0,
                    points: 0..1
                }]
            );
        }
        let auto = build_partition(&set(&[0.0]), Depth::Auto).unwrap();
        assert_eq!(auto.depth(), 0);
    }

    #[test]
    fn grid_level_one() {
        let tree = build_partition(&set(&[0.0, 0.25, 0.5, 0.75]), Depth::Fixed(1)).unwrap();
        let idx: Vec<u128> = tree.cells(1).iter().map(|c| c.index).collect();
        assert_eq!(idx, vec![0, 1, 2, 3]);
        assert!(tree.cells(1).iter().all(|c| c.len() == 1));
        assert_eq!(tree.separation_depth(), 1);
    }

    #[test]
    fn auto_depth_is_separation_depth() {
        let tree = build_partition(&set(&[0.0, 0.01, 0.02, 0.5]), Depth::Auto).unwrap();
        assert_eq!(tree.depth(), tree.separation_depth());
        assert!(tree.cells(tree.depth()).iter().all(|c| c.len() == 1));
        assert!(tree.cells(tree.depth() - 1).iter().any(|c| c.len() > 1));
        // on-demand levels past the stored ones
        let deep = tree.cells(tree.depth() + 3);
        assert_eq!(deep.len(), 4);
        assert!(deep.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn shallow_fixed_depth_still_knows_separation() {
        let tree = build_partition(&set(&[0.0, 0.01, 0.02, 0.5]), Depth::Fixed(1)).unwrap();
        assert_eq!(tree.depth(), 1);
        assert!(tree.separation_depth() > 1);
        assert_eq!(tree.export().levels.len(), 2);
    }
}
