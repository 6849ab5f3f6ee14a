//! Cross-lingual entity alignment between two knowledge graphs.
//!
//! Each graph is embedded by three independent two-layer GCN channels that
//! share weights across the two graphs:
//!
//! - a structure channel over trainable entity vectors,
//! - an attribute channel over multi-hot attribute features,
//! - a subgraph channel over entity/line incidence in the first-order
//!   subgraph network (the line graph of the relation skeleton).
//!
//! Entities are aligned by a weighted sum of per-channel L1 distances.
//!
//! The runnable programs under `examples/` walk through each stage:
//! `synthetic_dataset`, `line_graph`, `adjacency`, `gradient_check`,
//! `train_and_align`, `seed_sweep` and `load_dbp15k`.

pub mod align;
pub mod error;
pub mod gcn;
pub mod kg;
pub mod matrix;
pub mod pipeline;
pub mod sgn;
pub mod train;

pub use error::{Error, Result};
