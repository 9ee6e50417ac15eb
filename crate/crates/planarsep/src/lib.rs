//! Planar cycle separators and DFS trees, computed by algorithms whose every
//! communication step runs through a synchronous message-passing simulator
//! with per-edge bit budgets, and whose every combinatorial claim is checked
//! against independent sequential oracles.
//!
//! The crate is organized around nine pieces:
//!
//! * [`graph`] — rotation-system planar graphs, face tracing, partitions;
//! * [`gen`] — deterministic instance generators;
//! * [`engine`] — the synchronous executor with round/message/bit accounting;
//! * [`primitives`] — part-wise aggregation, tree sums, and related folds;
//! * [`tree`] — per-part rooted spanning trees and tree subroutines;
//! * [`face`] — fundamental edges and faces, weights, augmentations;
//! * [`separator`] — the phased cycle-separator algorithm and its witnesses;
//! * [`dfs`] — DFS-tree construction by separate-and-join;
//! * [`oracle`] — sequential ground truth used by the test suites.

pub mod engine;
pub mod face;
pub mod gen;
pub mod graph;
pub mod oracle;
pub mod primitives;
pub mod tree;

pub use engine::{ExecutionReport, Meter, Mode, Schedule, SimConfig};
pub use face::FundamentalEdge;
pub use gen::Kind;
pub use graph::{NodeId, Partition, PlanarGraph};
pub use tree::RootedForest;
