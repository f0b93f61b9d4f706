//! Reference forest: explicit parent pointers, paths walked on demand.
//!
//! Every other backend is checked against this one, so it favours being
//! obviously correct over being fast. A merge collects both root paths, sorts
//! their union by key and relinks the sorted sequence into a single path.

use crate::forest::{Capability, ForestError, MergeableForest, OpCounters, Result};
use crate::key::{Key, NodeRef};

#[derive(Clone, Debug, Default)]
pub struct NaiveForest {
    keys: Vec<Key>,
    parent: Vec<Option<usize>>,
    live: Vec<bool>,
    live_children: Vec<u32>,
    participant: Vec<bool>,
    counters: OpCounters,
    stamp: Vec<u32>,
    epoch: u32,
}

impl NaiveForest {
    pub fn new() -> Self {
        Self::default()
    }

    fn check(&self, v: NodeRef) -> Result<usize> {
        match self.live.get(v.0) {
            Some(true) => Ok(v.0),
            _ => Err(ForestError::InvalidHandle(v)),
        }
    }

    /// Nodes from `v` up to and including its root.
    pub fn root_path(&self, v: NodeRef) -> Result<Vec<NodeRef>> {
        let mut cur = Some(self.check(v)?);
        let mut out = Vec::new();
        while let Some(x) = cur {
            out.push(NodeRef(x));
            cur = self.parent[x];
        }
        Ok(out)
    }

    /// Parent of every handle; `None` for roots and deleted nodes.
    pub fn parent_map(&self) -> Vec<Option<NodeRef>> {
        (0..self.keys.len())
            .map(|i| {
                if self.live[i] {
                    self.parent[i].map(NodeRef)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Number of nodes that have been in a tree taking part in a merge.
    pub fn participants(&self) -> usize {
        self.participant.iter().filter(|&&p| p).count()
    }

    pub fn live_count(&self) -> usize {
        self.live.iter().filter(|&&l| l).count()
    }

    pub fn is_leaf(&self, v: NodeRef) -> bool {
        self.check(v).is_ok() && self.live_children[v.0] == 0
    }

    /// Number of trees among live nodes.
    pub fn tree_count(&self) -> usize {
        (0..self.keys.len())
            .filter(|&i| self.live[i] && self.parent[i].is_none())
            .count()
    }

    fn next_epoch(&mut self) -> u32 {
        if self.stamp.len() < self.keys.len() {
            self.stamp.resize(self.keys.len(), 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    fn nca_index(&mut self, v: usize, w: usize) -> Option<usize> {
        let epoch = self.next_epoch();
        let mut cur = Some(v);
        while let Some(x) = cur {
            self.stamp[x] = epoch;
            cur = self.parent[x];
        }
        let mut cur = Some(w);
        while let Some(x) = cur {
            if self.stamp[x] == epoch {
                return Some(x);
            }
            cur = self.parent[x];
        }
        None
    }

    fn depth_to(&self, mut v: usize, stop: Option<usize>) -> u64 {
        let mut n = 0;
        while Some(v) != stop {
            n += 1;
            match self.parent[v] {
                Some(p) => v = p,
                None => break,
            }
        }
        n
    }

    fn set_parent(&mut self, x: usize, p: Option<usize>) {
        if let Some(old) = self.parent[x] {
            self.live_children[old] -= 1;
        }
        if let Some(new) = p {
            self.live_children[new] += 1;
            self.participant[new] = true;
            self.participant[x] = true;
        }
        self.parent[x] = p;
    }
}

impl MergeableForest for NaiveForest {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn capability(&self) -> Capability {
        Capability::FULL
    }

    fn insert(&mut self, label: f64) -> NodeRef {
        let id = self.keys.len();
        self.keys.push(Key::new(label, id as u64));
        self.parent.push(None);
        self.live.push(true);
        self.live_children.push(0);
        self.participant.push(false);
        NodeRef(id)
    }

    fn merge(&mut self, v: NodeRef, w: NodeRef) -> Result<()> {
        let v = self.check(v)?;
        let w = self.check(w)?;
        self.counters.merges += 1;
        self.participant[v] = true;
        self.participant[w] = true;

        let u = self.nca_index(v, w);
        let shorter = self.depth_to(v, u).min(self.depth_to(w, u)) + u.is_some() as u64;
        self.counters.shorter_path_nodes += shorter;
        if u == Some(v) || u == Some(w) {
            return Ok(());
        }

        let epoch = self.next_epoch();
        let mut set = Vec::new();
        for start in [v, w] {
            let mut cur = Some(start);
            while let Some(x) = cur {
                if self.stamp[x] == epoch {
                    break;
                }
                self.stamp[x] = epoch;
                set.push(x);
                cur = self.parent[x];
            }
        }
        set.sort_by(|&a, &b| self.keys[a].cmp(&self.keys[b]));

        let mut changed = 0;
        for i in 0..set.len() {
            let new_parent = if i == 0 { None } else { Some(set[i - 1]) };
            if self.parent[set[i]] != new_parent {
                self.set_parent(set[i], new_parent);
                changed += 1;
            }
        }
        self.counters.parent_changes += changed;
        if changed > 0 {
            self.counters.structural_merges += 1;
        }
        Ok(())
    }

    fn root(&mut self, v: NodeRef) -> Result<NodeRef> {
        let mut x = self.check(v)?;
        while let Some(p) = self.parent[x] {
            x = p;
        }
        Ok(NodeRef(x))
    }

    fn nca(&mut self, v: NodeRef, w: NodeRef) -> Result<Option<NodeRef>> {
        let v = self.check(v)?;
        let w = self.check(w)?;
        Ok(self.nca_index(v, w).map(NodeRef))
    }

    fn parent(&mut self, v: NodeRef) -> Result<Option<NodeRef>> {
        let v = self.check(v)?;
        Ok(self.parent[v].map(NodeRef))
    }

    fn cut(&mut self, v: NodeRef) -> Result<()> {
        let v = self.check(v)?;
        if self.parent[v].is_some() {
            self.set_parent(v, None);
            self.counters.parent_changes += 1;
        }
        Ok(())
    }

    fn delete(&mut self, v: NodeRef) -> Result<()> {
        let x = self.check(v)?;
        if self.live_children[x] != 0 {
            return Err(ForestError::NotLeaf(v));
        }
        if let Some(p) = self.parent[x] {
            self.live_children[p] -= 1;
        }
        self.parent[x] = None;
        self.live[x] = false;
        Ok(())
    }

    fn key(&self, v: NodeRef) -> Result<Key> {
        let x = self.check(v)?;
        Ok(self.keys[x])
    }

    fn is_live(&self, v: NodeRef) -> bool {
        self.check(v).is_ok()
    }

    fn handle_count(&self) -> usize {
        self.keys.len()
    }

    fn counters(&self) -> &OpCounters {
        &self.counters
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_forest() -> (NaiveForest, Vec<NodeRef>) {
        // keys 1..=5 at handles 0..=4; arcs 3->1, 5->3, 4->2
        let mut f = NaiveForest::new();
        let n: Vec<_> = (1..=5).map(|k| f.insert(k as f64)).collect();
        f.merge(n[2], n[0]).unwrap();
        f.merge(n[4], n[2]).unwrap();
        f.merge(n[3], n[1]).unwrap();
        (f, n)
    }

    #[test]
    fn insert_makes_singleton_root() {
        let mut f = NaiveForest::new();
        let x = f.insert(5.0);
        assert_eq!(f.parent(x).unwrap(), None);
        assert_eq!(f.root(x).unwrap(), x);
        assert_eq!(f.nca(x, x).unwrap(), Some(x));
    }

    #[test]
    fn equal_labels_get_distinct_keys() {
        let mut f = NaiveForest::new();
        let a = f.insert(1.0);
        let b = f.insert(1.0);
        assert_ne!(a, b);
        assert!(f.key(a).unwrap() < f.key(b).unwrap());
    }

    #[test]
    fn many_inserts_leave_counters_untouched() {
        let mut f = NaiveForest::new();
        for i in 0..1000 {
            let x = f.insert(i as f64);
            assert_eq!(f.root(x).unwrap(), x);
        }
        assert_eq!(*f.counters(), OpCounters::default());
        assert_eq!(f.tree_count(), 1000);
    }

    #[test]
    fn merge_interleaves_two_chains() {
        let (mut f, n) = chain_forest();
        f.merge(n[4], n[3]).unwrap();
        for i in 1..5 {
            assert_eq!(f.parent(n[i]).unwrap(), Some(n[i - 1]));
        }
        assert_eq!(f.parent(n[0]).unwrap(), None);
        assert_eq!(f.nca(n[4], n[3]).unwrap(), Some(n[3]));
        assert_eq!(f.nca(n[1], n[4]).unwrap(), Some(n[1]));
    }

    #[test]
    fn self_merge_is_noop() {
        let (mut f, n) = chain_forest();
        let before = f.parent_map();
        f.merge(n[4], n[4]).unwrap();
        assert_eq!(f.parent_map(), before);
    }

    #[test]
    fn singletons_have_no_nca() {
        let mut f = NaiveForest::new();
        let a = f.insert(0.0);
        let b = f.insert(1.0);
        assert_eq!(f.nca(a, b).unwrap(), None);
    }

    #[test]
    fn cut_root_is_noop_and_uncounted() {
        let (mut f, n) = chain_forest();
        let before = f.counters().parent_changes;
        f.cut(n[0]).unwrap();
        assert_eq!(f.counters().parent_changes, before);
    }

    #[test]
    fn cut_splits_chain() {
        let mut f = NaiveForest::new();
        let n: Vec<_> = (3..=5).map(|k| f.insert(k as f64)).collect();
        f.merge(n[2], n[1]).unwrap();
        f.merge(n[1], n[0]).unwrap();
        f.cut(n[1]).unwrap();
        assert_eq!(f.root(n[2]).unwrap(), n[1]);
        assert_eq!(f.root(n[0]).unwrap(), n[0]);
        assert_eq!(f.tree_count(), 2);
    }

    #[test]
    fn delete_rules() {
        let (mut f, n) = chain_forest();
        assert_eq!(f.delete(n[2]), Err(ForestError::NotLeaf(n[2])));
        f.delete(n[4]).unwrap();
        assert_eq!(f.root(n[4]), Err(ForestError::InvalidHandle(n[4])));
        // n[2] lost its only child
        f.delete(n[2]).unwrap();
        let again = f.insert(5.0);
        assert_ne!(again, n[4]);
        assert_eq!(f.key(again).unwrap().id, 5);
    }

    #[test]
    fn participants_counted() {
        let (f, _) = chain_forest();
        assert_eq!(f.participants(), 5);
    }
}
