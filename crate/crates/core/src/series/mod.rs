//! The index set `T`, its 4-adic partition and probability measures on it.

mod coeffs;
mod index_set;
mod measure;
mod partition;
pub mod position;

pub use coeffs::{CoefficientSequence, CoefficientSpec, Family, TailMass};
pub use index_set::{build_index_set, IndexSet, IndexSetExport};
pub use measure::{ball_mass, dirichlet, make_measure, DiscreteMeasure, MeasureKind};
pub use partition::{
    build_partition, Cell, CellExport, Depth, LevelExport, PartitionExport, PartitionTree,
};
pub use position::{cell_width, Position, MAX_LEVEL};
