//! Mergeable trees kept only up to equivalence.
//!
//! The engine holds a tree on the same nodes in which the minimum of every
//! path between two nodes equals their nearest common ancestor in the real
//! tree. Merges become an evert plus one link, or an evert, one cut and one
//! link. The real parent of a node is not available, so `parent` and `cut`
//! are rejected.
//!
//! Engine adjacency is mirrored explicitly so a deleted leaf can be spliced
//! out: its neighbours all have smaller keys, and reattaching them to the
//! largest of them keeps every remaining path minimum intact.

use std::collections::BTreeSet;

use crate::forest::{Capability, ForestError, MergeableForest, OpCounters, Operation, Result};
use crate::key::{Key, NodeRef};
use crate::linkcut::DynForest;

const DEAD: u32 = u32::MAX;
const REBUILD_MIN: usize = 16;

/// How `root` and the same-tree test inside `merge` are answered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RootMode {
    /// Tree-level minimum maintained inside the engine.
    #[default]
    TreeMin,
    /// Separate disjoint sets carrying the minimum of each set.
    DisjointSet,
}

#[derive(Clone, Debug, Default)]
struct MinSets {
    up: Vec<u32>,
    size: Vec<u32>,
    min: Vec<u32>,
}

impl MinSets {
    fn push(&mut self) {
        let i = self.up.len() as u32;
        self.up.push(i);
        self.size.push(1);
        self.min.push(i);
    }

    fn find(&mut self, mut x: u32) -> u32 {
        let mut r = x;
        while self.up[r as usize] != r {
            r = self.up[r as usize];
        }
        while self.up[x as usize] != r {
            let next = self.up[x as usize];
            self.up[x as usize] = r;
            x = next;
        }
        r
    }

    fn union(&mut self, a: u32, b: u32, keys: impl Fn(u32) -> Key) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.up[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
        let (ma, mb) = (self.min[a as usize], self.min[b as usize]);
        self.min[a as usize] = if keys(mb) < keys(ma) { mb } else { ma };
    }
}

#[derive(Clone, Debug)]
pub struct ImplicitForest {
    mode: RootMode,
    engine: DynForest,
    /// Engine slot of every handle, `DEAD` once deleted.
    slot: Vec<u32>,
    /// Handle of every engine slot.
    handle: Vec<usize>,
    keys: Vec<Key>,
    adj: Vec<BTreeSet<u32>>,
    sets: MinSets,
    live: usize,
    counters: OpCounters,
}

impl Default for ImplicitForest {
    fn default() -> Self {
        Self::new()
    }
}

impl ImplicitForest {
    pub fn new() -> Self {
        Self::with_mode(RootMode::TreeMin)
    }

    pub fn with_mode(mode: RootMode) -> Self {
        ImplicitForest {
            mode,
            engine: DynForest::new(),
            slot: Vec::new(),
            handle: Vec::new(),
            keys: Vec::new(),
            adj: Vec::new(),
            sets: MinSets::default(),
            live: 0,
            counters: OpCounters::default(),
        }
    }

    pub fn mode(&self) -> RootMode {
        self.mode
    }

    fn check(&self, v: NodeRef) -> Result<usize> {
        match self.slot.get(v.0) {
            Some(&s) if s != DEAD => Ok(s as usize),
            _ => Err(ForestError::InvalidHandle(v)),
        }
    }

    fn skey(&self, s: usize) -> Key {
        self.engine.key(s)
    }

    fn root_slot(&mut self, s: usize) -> usize {
        match self.mode {
            RootMode::TreeMin => self.engine.treemin(s),
            RootMode::DisjointSet => {
                let r = self.sets.find(s as u32);
                self.sets.min[r as usize] as usize
            }
        }
    }

    fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        self.engine.link(a, b)?;
        self.adj[a].insert(b as u32);
        self.adj[b].insert(a as u32);
        Ok(())
    }

    /// Cuts `a` from its engine parent.
    fn remove_edge_above(&mut self, a: usize) {
        if let Some(p) = self.engine.parent(a) {
            self.engine.cut(a);
            self.adj[a].remove(&(p as u32));
            self.adj[p].remove(&(a as u32));
        }
    }

    fn union_sets(&mut self, a: usize, b: usize) {
        if self.mode == RootMode::DisjointSet {
            let engine = &self.engine;
            self.sets.union(a as u32, b as u32, |x| engine.key(x as usize));
        }
    }

    /// Rebuilds the engine over live nodes only, keeping its edge set.
    fn rebuild(&mut self) {
        let mut engine = DynForest::with_capacity(self.live);
        let mut handle = Vec::with_capacity(self.live);
        let mut remap = vec![DEAD; self.handle.len()];
        for (s, &h) in self.handle.iter().enumerate() {
            if self.slot[h] == s as u32 {
                remap[s] = engine.add_node(self.keys[h]) as u32;
                handle.push(h);
            }
        }
        let mut adj = vec![BTreeSet::new(); handle.len()];
        let mut sets = MinSets::default();
        for _ in 0..handle.len() {
            sets.push();
        }
        for (s, nbrs) in self.adj.iter().enumerate() {
            for &t in nbrs {
                if (s as u32) < t {
                    let (a, b) = (remap[s] as usize, remap[t as usize] as usize);
                    engine.evert(a);
                    engine.link(a, b).expect("engine edges form a forest");
                    adj[a].insert(b as u32);
                    adj[b].insert(a as u32);
                    if self.mode == RootMode::DisjointSet {
                        sets.union(a as u32, b as u32, |x| engine.key(x as usize));
                    }
                }
            }
        }
        for (s, &h) in handle.iter().enumerate() {
            self.slot[h] = s as u32;
        }
        self.engine = engine;
        self.handle = handle;
        self.adj = adj;
        self.sets = sets;
    }

    /// Number of engine slots, live or not; drops back after a rebuild.
    pub fn engine_size(&self) -> usize {
        self.engine.len()
    }

    /// Engine edges as handle pairs, each with the smaller handle first.
    pub fn engine_edges(&self) -> Vec<(NodeRef, NodeRef)> {
        let mut out = Vec::new();
        for (s, nbrs) in self.adj.iter().enumerate() {
            for &t in nbrs {
                let (a, b) = (self.handle[s], self.handle[t as usize]);
                if a < b {
                    out.push((NodeRef(a), NodeRef(b)));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Minimum over the engine path between `v` and `w`, found by walking the
    /// mirrored adjacency rather than by querying the engine.
    pub fn engine_path_min(&self, v: NodeRef, w: NodeRef) -> Result<Option<NodeRef>> {
        let (sv, sw) = (self.check(v)?, self.check(w)?);
        let mut from = vec![DEAD; self.adj.len()];
        from[sv] = sv as u32;
        let mut stack = vec![sv];
        while let Some(x) = stack.pop() {
            for &y in &self.adj[x] {
                if from[y as usize] == DEAD {
                    from[y as usize] = x as u32;
                    stack.push(y as usize);
                }
            }
        }
        if from[sw] == DEAD {
            return Ok(None);
        }
        let mut best = sw;
        let mut x = sw;
        while x != sv {
            x = from[x] as usize;
            if self.skey(x) < self.skey(best) {
                best = x;
            }
        }
        Ok(Some(NodeRef(self.handle[best])))
    }

    /// Tree minimum as reported by the engine aggregate.
    pub fn engine_treemin(&mut self, v: NodeRef) -> Result<NodeRef> {
        let s = self.check(v)?;
        Ok(NodeRef(self.handle[self.engine.treemin(s)]))
    }

    /// Recovers the real parent of every live node.
    ///
    /// Nodes are added in decreasing key order; when `x` is added, every
    /// neighbouring component formed so far is a child subtree of `x`, and
    /// the smallest node of that component is a child of `x`.
    pub fn materialize_parents(&self) -> Vec<Option<NodeRef>> {
        let n = self.handle.len();
        let mut order: Vec<usize> = (0..n).filter(|&s| self.slot[self.handle[s]] == s as u32).collect();
        order.sort_by_key(|&s| std::cmp::Reverse(self.skey(s)));
        let mut sets = MinSets::default();
        for _ in 0..n {
            sets.push();
        }
        let mut added = vec![false; n];
        let mut parent = vec![None; self.keys.len()];
        for &x in &order {
            added[x] = true;
            for &y in &self.adj[x] {
                if !added[y as usize] {
                    continue;
                }
                let r = sets.find(y);
                let top = sets.min[r as usize] as usize;
                parent[self.handle[top]] = Some(NodeRef(self.handle[x]));
                let engine = &self.engine;
                sets.union(x as u32, y, |z| engine.key(z as usize));
            }
        }
        parent
    }

    /// Checks engine aggregates, adjacency mirror, heap-free edge count and
    /// disjoint-set minima.
    pub fn audit(&mut self) -> std::result::Result<(), String> {
        self.engine.audit()?;
        let mut from_engine: Vec<(usize, usize)> = self.engine.edges();
        from_engine.sort_unstable();
        let mut mirrored = Vec::new();
        for (s, nbrs) in self.adj.iter().enumerate() {
            for &t in nbrs {
                if (s as u32) < t {
                    mirrored.push((s, t as usize));
                }
            }
        }
        mirrored.sort_unstable();
        if from_engine != mirrored {
            return Err("engine edges differ from adjacency mirror".into());
        }
        let live_slots: Vec<usize> = (0..self.handle.len())
            .filter(|&s| self.slot[self.handle[s]] == s as u32)
            .collect();
        if live_slots.len() != self.live {
            return Err("live count is stale".into());
        }
        if mirrored.len() + self.tree_count_engine(&live_slots) != self.live {
            return Err("edge count does not match live nodes minus trees".into());
        }
        if self.mode == RootMode::DisjointSet {
            for &s in &live_slots {
                let want = self.engine.treemin(s);
                let r = self.sets.find(s as u32);
                if self.sets.min[r as usize] as usize != want {
                    return Err(format!("set minimum of slot {s} is stale"));
                }
            }
        }
        Ok(())
    }

    fn tree_count_engine(&mut self, live_slots: &[usize]) -> usize {
        let mut roots: Vec<usize> = live_slots.iter().map(|&s| self.engine.root(s)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }
}

impl MergeableForest for ImplicitForest {
    fn name(&self) -> &'static str {
        "implicit"
    }

    fn capability(&self) -> Capability {
        Capability::IMPLICIT
    }

    fn insert(&mut self, label: f64) -> NodeRef {
        let h = self.keys.len();
        let key = Key::new(label, h as u64);
        self.keys.push(key);
        let s = self.engine.add_node(key);
        self.slot.push(s as u32);
        self.handle.push(h);
        self.adj.push(BTreeSet::new());
        self.sets.push();
        self.live += 1;
        NodeRef(h)
    }

    fn merge(&mut self, v: NodeRef, w: NodeRef) -> Result<()> {
        let sv = self.check(v)?;
        let sw = self.check(w)?;
        self.counters.merges += 1;
        if sv == sw {
            return Ok(());
        }
        if self.root_slot(sv) != self.root_slot(sw) {
            self.engine.evert(sv);
            self.add_edge(sv, sw)?;
            self.union_sets(sv, sw);
            self.counters.structural_merges += 1;
            return Ok(());
        }
        self.engine.evert(sv);
        let u = self.engine.pathmin(sw);
        if u != sv && u != sw {
            self.remove_edge_above(u);
            self.add_edge(sv, sw)?;
            self.counters.structural_merges += 1;
        }
        Ok(())
    }

    fn root(&mut self, v: NodeRef) -> Result<NodeRef> {
        let s = self.check(v)?;
        let r = self.root_slot(s);
        Ok(NodeRef(self.handle[r]))
    }

    fn nca(&mut self, v: NodeRef, w: NodeRef) -> Result<Option<NodeRef>> {
        let sv = self.check(v)?;
        let sw = self.check(w)?;
        if self.root_slot(sv) != self.root_slot(sw) {
            return Ok(None);
        }
        self.engine.evert(sv);
        Ok(Some(NodeRef(self.handle[self.engine.pathmin(sw)])))
    }

    fn parent(&mut self, v: NodeRef) -> Result<Option<NodeRef>> {
        self.check(v)?;
        Err(ForestError::Unsupported {
            backend: "implicit",
            op: Operation::Parent,
        })
    }

    fn cut(&mut self, v: NodeRef) -> Result<()> {
        self.check(v)?;
        Err(ForestError::Unsupported {
            backend: "implicit",
            op: Operation::Cut,
        })
    }

    fn delete(&mut self, v: NodeRef) -> Result<()> {
        let s = self.check(v)?;
        let key = self.skey(s);
        // A node is a leaf exactly when every engine neighbour is smaller.
        if self.adj[s].iter().any(|&t| self.skey(t as usize) > key) {
            return Err(ForestError::NotLeaf(v));
        }
        let nbrs: Vec<usize> = self.adj[s].iter().map(|&t| t as usize).collect();
        if let Some(&top) = nbrs.iter().max_by_key(|&&t| self.skey(t)) {
            self.engine.evert(s);
            for &t in &nbrs {
                self.remove_edge_above(t);
            }
            for &t in &nbrs {
                if t != top {
                    self.add_edge(t, top)?;
                }
            }
        }
        self.slot[v.0] = DEAD;
        self.live -= 1;
        if self.handle.len() >= REBUILD_MIN && 2 * self.live <= self.handle.len() {
            self.rebuild();
        }
        Ok(())
    }

    fn key(&self, v: NodeRef) -> Result<Key> {
        self.check(v)?;
        Ok(self.keys[v.0])
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
