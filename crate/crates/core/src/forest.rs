//! The mergeable-forest operation contract shared by every backend.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::key::{Key, NodeRef};

/// Operations a backend is able to answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capability {
    pub supports_cut: bool,
    pub supports_parent: bool,
}

impl Capability {
    pub const FULL: Capability = Capability {
        supports_cut: true,
        supports_parent: true,
    };
    pub const NO_CUT: Capability = Capability {
        supports_cut: false,
        supports_parent: true,
    };
    pub const IMPLICIT: Capability = Capability {
        supports_cut: false,
        supports_parent: false,
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operation {
    Cut,
    Parent,
}

impl std::fmt::Display for Operation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Operation::Cut => "cut",
            Operation::Parent => "parent",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ForestError {
    #[error("invalid or deleted node handle {0}")]
    InvalidHandle(NodeRef),
    #[error("backend `{backend}` does not support `{op}`")]
    Unsupported {
        backend: &'static str,
        op: Operation,
    },
    #[error("node {0} is not a leaf")]
    NotLeaf(NodeRef),
    #[error("link({0}, {1}): first node must be a root of another tree")]
    BadLink(NodeRef, NodeRef),
    #[error("topmost({0}, ..): root path is not heap ordered above the threshold")]
    NotHeapOrdered(NodeRef),
}

pub type Result<T> = std::result::Result<T, ForestError>;

/// Monotone operation counters used to check the amortized bounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    /// Nodes whose parent value differs after an operation from before it.
    pub parent_changes: u64,
    pub merges: u64,
    /// Merges that changed at least one parent.
    pub structural_merges: u64,
    pub merge_steps: u64,
    pub topmost_queries: u64,
    /// Sum over topmost queries of `ceil(lg |segment|)`.
    pub topmost_cost: u64,
    pub solid_insertions: u64,
    pub solid_deletions: u64,
    /// Total rank increase, summed over all nodes.
    pub rank_increases: u64,
    /// Sum over merges of the node count of the shorter merge path.
    pub shorter_path_nodes: u64,
}

impl OpCounters {
    /// Counter-wise difference `self - earlier`.
    pub fn since(&self, earlier: &OpCounters) -> OpCounters {
        OpCounters {
            parent_changes: self.parent_changes - earlier.parent_changes,
            merges: self.merges - earlier.merges,
            structural_merges: self.structural_merges - earlier.structural_merges,
            merge_steps: self.merge_steps - earlier.merge_steps,
            topmost_queries: self.topmost_queries - earlier.topmost_queries,
            topmost_cost: self.topmost_cost - earlier.topmost_cost,
            solid_insertions: self.solid_insertions - earlier.solid_insertions,
            solid_deletions: self.solid_deletions - earlier.solid_deletions,
            rank_increases: self.rank_increases - earlier.rank_increases,
            shorter_path_nodes: self.shorter_path_nodes - earlier.shorter_path_nodes,
        }
    }
}

/// A forest of heap-ordered trees supporting path merging.
///
/// Every query takes `&mut self` because self-adjusting backends restructure
/// on reads. Backends without a capability return
/// [`ForestError::Unsupported`] instead of approximating the answer.
pub trait MergeableForest: Send {
    fn name(&self) -> &'static str;
    fn capability(&self) -> Capability;

    /// Adds a one-node tree. Inserts are not counted.
    fn insert(&mut self, label: f64) -> NodeRef;

    /// Merges the root paths of `v` and `w` in key order.
    fn merge(&mut self, v: NodeRef, w: NodeRef) -> Result<()>;

    fn root(&mut self, v: NodeRef) -> Result<NodeRef>;

    /// Nearest common ancestor, `None` when `v` and `w` are in different trees.
    fn nca(&mut self, v: NodeRef, w: NodeRef) -> Result<Option<NodeRef>>;

    fn parent(&mut self, v: NodeRef) -> Result<Option<NodeRef>>;

    /// Detaches `v` from its parent; a no-op on roots.
    fn cut(&mut self, v: NodeRef) -> Result<()>;

    /// Removes a leaf from all future consideration.
    fn delete(&mut self, v: NodeRef) -> Result<()>;

    fn key(&self, v: NodeRef) -> Result<Key>;

    fn is_live(&self, v: NodeRef) -> bool;

    /// Number of handles issued so far, live or deleted.
    fn handle_count(&self) -> usize;

    fn counters(&self) -> &OpCounters;
}

/// `ceil(lg n)` for `n >= 1`, zero for `n <= 1`.
pub fn ceil_lg(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros() as u64
    }
}

/// `floor(lg n)` for `n >= 1`.
pub fn floor_lg(n: u64) -> u32 {
    debug_assert!(n >= 1);
    63 - n.leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lg_helpers() {
        assert_eq!(ceil_lg(0), 0);
        assert_eq!(ceil_lg(1), 0);
        assert_eq!(ceil_lg(2), 1);
        assert_eq!(ceil_lg(3), 2);
        assert_eq!(ceil_lg(4), 2);
        assert_eq!(ceil_lg(5), 3);
        assert_eq!(floor_lg(1), 0);
        assert_eq!(floor_lg(7), 2);
        assert_eq!(floor_lg(8), 3);
    }

    #[test]
    fn counters_difference() {
        let a = OpCounters {
            merges: 3,
            parent_changes: 5,
            ..Default::default()
        };
        let b = OpCounters {
            merges: 7,
            parent_changes: 9,
            ..Default::default()
        };
        let d = b.since(&a);
        assert_eq!(d.merges, 4);
        assert_eq!(d.parent_changes, 4);
    }
}
