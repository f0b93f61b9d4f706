//! Mergeable trees stored one-to-one as dynamic trees.
//!
//! A merge walks down the two merge paths with `topmost` queries, moving one
//! path segment at a time by a link and a cut. Parents are mirrored in a plain
//! array so `parent` is a constant-time read.

use crate::forest::{Capability, ForestError, MergeableForest, OpCounters, Result};
use crate::key::{Key, NodeRef};
use crate::linkcut::DynForest;

#[derive(Clone, Debug, Default)]
pub struct DynMergeForest {
    engine: DynForest,
    parent: Vec<Option<usize>>,
    live: Vec<bool>,
    live_children: Vec<u32>,
    counters: OpCounters,
    touched: Vec<(usize, Option<usize>)>,
}

impl DynMergeForest {
    pub fn new() -> Self {
        Self::default()
    }

    fn check(&self, v: NodeRef) -> Result<usize> {
        match self.live.get(v.0) {
            Some(true) => Ok(v.0),
            _ => Err(ForestError::InvalidHandle(v)),
        }
    }

    fn key_of(&self, v: usize) -> Key {
        self.engine.key(v)
    }

    fn remember(&mut self, x: usize) {
        if !self.touched.iter().any(|&(y, _)| y == x) {
            self.touched.push((x, self.parent[x]));
        }
    }

    fn do_link(&mut self, x: usize, p: usize) -> Result<()> {
        self.remember(x);
        self.engine.link(x, p)?;
        self.parent[x] = Some(p);
        self.live_children[p] += 1;
        Ok(())
    }

    fn do_cut(&mut self, x: usize) {
        if let Some(p) = self.parent[x] {
            self.remember(x);
            self.engine.cut(x);
            self.parent[x] = None;
            self.live_children[p] -= 1;
        }
    }

    /// Number of nodes on the path from `v` up to, but excluding, `stop`.
    fn path_len(&mut self, v: usize, stop: Option<usize>) -> u64 {
        let d = self.engine.depth(v);
        let s = stop.map_or(0, |s| self.engine.depth(s));
        (d - s) as u64
    }

    fn run_merge(&mut self, v: usize, w: usize) -> Result<()> {
        let u = self.engine.nca(v, w);
        let shorter = self.path_len(v, u).min(self.path_len(w, u)) + u.is_some() as u64;
        self.counters.shorter_path_nodes += shorter;
        if u == Some(v) || u == Some(w) {
            return Ok(());
        }
        let (mut v, mut w) = (v, w);
        let (mut x, mut y) = match u {
            Some(u) => {
                let k = self.key_of(u);
                (self.engine.topmost(v, k)?, self.engine.topmost(w, k)?)
            }
            None => (self.engine.root(v), self.engine.root(w)),
        };
        if self.key_of(x) < self.key_of(y) {
            std::mem::swap(&mut x, &mut y);
            std::mem::swap(&mut v, &mut w);
        }
        if u.is_some() {
            self.do_cut(x);
        }
        while self.key_of(x) < self.key_of(w) {
            self.counters.merge_steps += 1;
            self.counters.topmost_queries += 1;
            let t = self.engine.topmost(w, self.key_of(x))?;
            let pt = self.parent[t].expect("topmost below the merge start has a parent");
            self.do_link(x, pt)?;
            self.do_cut(t);
            y = x;
            x = t;
            std::mem::swap(&mut v, &mut w);
        }
        debug_assert!(self.key_of(y) < self.key_of(x));
        self.do_link(x, w)
    }

    /// Checks the engine against the parent mirror and heap order.
    pub fn audit(&mut self) -> std::result::Result<(), String> {
        self.engine.audit()?;
        let parents = self.engine.parents();
        for (x, p) in parents.into_iter().enumerate() {
            if p != self.parent[x] {
                return Err(format!("mirror parent of {x} is {:?}, engine says {p:?}", self.parent[x]));
            }
            if let Some(p) = p {
                if self.key_of(p) >= self.key_of(x) {
                    return Err(format!("heap order violated on arc {x} -> {p}"));
                }
            }
        }
        Ok(())
    }
}

impl MergeableForest for DynMergeForest {
    fn name(&self) -> &'static str {
        "dyn"
    }

    fn capability(&self) -> Capability {
        Capability::FULL
    }

    fn insert(&mut self, label: f64) -> NodeRef {
        let id = self.engine.len();
        self.engine.add_node(Key::new(label, id as u64));
        self.parent.push(None);
        self.live.push(true);
        self.live_children.push(0);
        NodeRef(id)
    }

    fn merge(&mut self, v: NodeRef, w: NodeRef) -> Result<()> {
        let v = self.check(v)?;
        let w = self.check(w)?;
        self.counters.merges += 1;
        self.touched.clear();
        let out = self.run_merge(v, w);
        let changed = self
            .touched
            .iter()
            .filter(|&&(x, old)| self.parent[x] != old)
            .count() as u64;
        self.counters.parent_changes += changed;
        if changed > 0 {
            self.counters.structural_merges += 1;
        }
        out
    }

    fn root(&mut self, v: NodeRef) -> Result<NodeRef> {
        let v = self.check(v)?;
        Ok(NodeRef(self.engine.root(v)))
    }

    fn nca(&mut self, v: NodeRef, w: NodeRef) -> Result<Option<NodeRef>> {
        let v = self.check(v)?;
        let w = self.check(w)?;
        Ok(self.engine.nca(v, w).map(NodeRef))
    }

    fn parent(&mut self, v: NodeRef) -> Result<Option<NodeRef>> {
        let v = self.check(v)?;
        Ok(self.parent[v].map(NodeRef))
    }

    fn cut(&mut self, v: NodeRef) -> Result<()> {
        let v = self.check(v)?;
        if self.parent[v].is_some() {
            self.do_cut(v);
            self.counters.parent_changes += 1;
        }
        Ok(())
    }

    fn delete(&mut self, v: NodeRef) -> Result<()> {
        let x = self.check(v)?;
        if self.live_children[x] != 0 {
            return Err(ForestError::NotLeaf(v));
        }
        self.do_cut(x);
        self.live[x] = false;
        Ok(())
    }

    fn key(&self, v: NodeRef) -> Result<Key> {
        let x = self.check(v)?;
        Ok(self.key_of(x))
    }

    fn is_live(&self, v: NodeRef) -> bool {
        self.check(v).is_ok()
    }

    fn handle_count(&self) -> usize {
        self.engine.len()
    }

    fn counters(&self) -> &OpCounters {
        &self.counters
    }
}
