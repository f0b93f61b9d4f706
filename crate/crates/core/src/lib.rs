//! Mergeable trees: heap-ordered forests whose root paths can be merged.

pub mod dynmerge;
pub mod forest;
pub mod harness;
pub mod implicit;
pub mod key;
pub mod linkcut;
pub mod naive;
pub mod rankmerge;
pub mod reeb;

pub use dynmerge::DynMergeForest;
pub use forest::{ceil_lg, floor_lg, Capability, ForestError, MergeableForest, OpCounters, Operation, Result};
pub use implicit::{ImplicitForest, RootMode};
pub use key::{Bounded, Key, NodeRef};
pub use linkcut::DynForest;
pub use naive::NaiveForest;
pub use rankmerge::{RankForest, RankStats};
pub use reeb::{PairType, Pairing, ReebGraph};
