//! Sparse and dense kernels used by the GCN, plus adjacency construction.

mod adjacency;
mod dense;
pub mod io;
mod sparse;

pub use adjacency::{
    build_adjacency, normalize, relation_stats, self_looped_symmetric, NormalizedAdjacency,
    RelationStat, RelationStats, DEFAULT_WEIGHT_FLOOR,
};
pub use dense::DenseMatrix;
pub use sparse::SparseMatrix;
