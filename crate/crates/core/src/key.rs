//! Node identity and ordering.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Handle of a node inside one forest.
///
/// Handles are dense insertion indices: the `i`-th insert of a forest returns
/// `NodeRef(i)`. A handle is never reused, so a node that is deleted and
/// inserted again comes back under a fresh handle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeRef(pub usize);

impl NodeRef {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Totally ordered node key: the application label, ties broken by the
/// insertion id.
///
/// Labels are compared with [`f64::total_cmp`], so even NaN labels get a
/// position in the order. No two nodes of one forest share an id, hence no two
/// keys compare equal.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Key {
    pub label: f64,
    pub id: u64,
}

impl Key {
    pub fn new(label: f64, id: u64) -> Self {
        Key { label, id }
    }
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.label
            .total_cmp(&other.label)
            .then(self.id.cmp(&other.id))
    }
}

/// A key or the bottom sentinel. `Bottom` (null) is below every key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bounded {
    Bottom,
    Key(Key),
}

impl From<Option<Key>> for Bounded {
    fn from(k: Option<Key>) -> Self {
        k.map_or(Bounded::Bottom, Bounded::Key)
    }
}
