//! Mergeable trees without cuts, partitioned into solid paths by rank.
//!
//! The rank of a node is `floor(lg size)`; an arc is solid when both ends
//! have equal rank. Only path tops store their size; every node stores its
//! dashed size `d` (one plus the sizes of its dashed children), so the size of
//! any node follows from its top's size minus the `d` values above it on the
//! path. Each path is kept as a treap (see [`treap`]) whose root doubles as
//! the path header.
//!
//! After any parent change the partition is repaired by recomputing ranks
//! along the segments whose sizes grew, top-down, stopping at the first node
//! whose rank is unchanged, then splitting arcs that became dashed and
//! joining arcs that became solid.

mod treap;

use serde::{Deserialize, Serialize};

use crate::forest::{ceil_lg, floor_lg, Capability, ForestError, MergeableForest, OpCounters, Operation, Result};
use crate::key::{Key, NodeRef};
use treap::{PathSeqs, NIL};

const REBUILD_MIN: usize = 16;

/// Diagnostics specific to this backend.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankStats {
    /// Parent changes of a solid child.
    pub case1: u64,
    /// Parent changes of a dashed child or a root.
    pub case2: u64,
    /// Largest number of arcs changing type in one dashed-child repair.
    pub case2_max_flips: u64,
    /// Dashed-child repairs that changed more than three arcs.
    pub case2_flip_violations: u64,
    /// Path climbs needed during merge steps to relocate the exit point
    /// of the `w` path from the solid path of `y`.
    pub resync_jumps: u64,
    pub rebuilds: u64,
    pub max_root_steps: u64,
    pub max_nca_steps: u64,
}

#[derive(Clone, Debug, Default)]
pub struct RankForest {
    // per slot
    key: Vec<Key>,
    parent: Vec<usize>,
    solid: Vec<usize>,
    top_size: Vec<i64>,
    live_children: Vec<u32>,
    handle: Vec<usize>,
    seq: PathSeqs,
    // per handle
    slot: Vec<usize>,
    live: Vec<bool>,
    live_count: usize,
    counters: OpCounters,
    stats: RankStats,
    touched: Vec<(usize, usize)>,
}

struct Traversal {
    nca: Option<usize>,
    from_v: Vec<usize>,
    from_w: Vec<usize>,
}

/// A node whose rank changed during a repair.
struct Dirty {
    node: usize,
    old: u32,
    new: u32,
}

fn rank_of(size: i64) -> u32 {
    floor_lg(size as u64)
}

impl RankForest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> &RankStats {
        &self.stats
    }

    /// Number of slots in the structure, deleted leaves included.
    pub fn structure_size(&self) -> usize {
        self.key.len()
    }

    fn check(&self, v: NodeRef) -> Result<usize> {
        match self.live.get(v.0) {
            Some(true) => Ok(self.slot[v.0]),
            _ => Err(ForestError::InvalidHandle(v)),
        }
    }

    fn node(&self, s: usize) -> NodeRef {
        NodeRef(self.handle[s])
    }

    #[inline]
    fn header(&self, a: usize) -> usize {
        self.seq.root(a)
    }

    #[inline]
    fn top(&self, a: usize) -> usize {
        self.seq.first(self.seq.root(a))
    }

    #[inline]
    fn is_top(&self, a: usize) -> bool {
        let p = self.parent[a];
        p == NIL || self.solid[p] != a
    }

    fn size(&self, a: usize) -> i64 {
        self.top_size[self.top(a)] - self.seq.prefix_before(a)
    }

    fn rank(&self, a: usize) -> u32 {
        rank_of(self.size(a))
    }

    fn set_parent_raw(&mut self, x: usize, z: usize) {
        let old = self.parent[x];
        if !self.touched.iter().any(|&(y, _)| y == x) {
            self.touched.push((x, old));
        }
        if old != NIL && self.live[self.handle[x]] {
            self.live_children[old] -= 1;
        }
        self.parent[x] = z;
        if z != NIL && self.live[self.handle[x]] {
            self.live_children[z] += 1;
        }
    }

    /// Makes `z` the parent of `x` and restores the rank partition.
    ///
    /// `z` must not be a descendant of `x`, and every node whose size grows
    /// must lie on the path from `z` up to (excluding) the old parent of `x`,
    /// which holds for the sibling moves done by merging.
    fn relink(&mut self, x: usize, z: usize) {
        let q = self.parent[x];
        let solid_child = q != NIL && self.solid[q] == x;
        let delta = self.size(x);

        if solid_child {
            self.stats.case1 += 1;
            self.seq.split_before(x);
            self.solid[q] = NIL;
            self.top_size[x] = delta;
        } else {
            self.stats.case2 += 1;
            if q != NIL {
                self.seq.add_d(q, -delta);
            }
        }
        self.set_parent_raw(x, z);
        self.seq.add_d(z, delta);

        // Push the size increase up through whole segments.
        let q_header = if q == NIL { NIL } else { self.header(q) };
        let mut segments = Vec::new();
        let mut c = z;
        loop {
            let h = self.header(c);
            if h == q_header {
                break;
            }
            let top = self.seq.first(h);
            segments.push((top, c));
            self.top_size[top] += delta;
            let ph = self.parent[top];
            if ph == NIL {
                break;
            }
            self.seq.add_d(ph, delta);
            if ph == q {
                break;
            }
            c = ph;
        }

        // Ranks along each segment change on a prefix starting at the top.
        let mut dirty: Vec<Dirty> = Vec::new();
        for &(top, entry) in &segments {
            let mut size = self.top_size[top];
            let old = rank_of(size - delta);
            let mut a = top;
            loop {
                let new = rank_of(size);
                if new == old {
                    break;
                }
                dirty.push(Dirty { node: a, old, new });
                if a == entry || self.solid[a] == NIL {
                    break;
                }
                size -= self.seq.d(a);
                a = self.solid[a];
            }
        }
        for dn in &dirty {
            debug_assert!(dn.new > dn.old, "rank decreased without cuts");
            self.counters.rank_increases += (dn.new - dn.old) as u64;
        }
        self.counters.solid_insertions += dirty.len() as u64;
        self.counters.solid_deletions += dirty.len() as u64;

        // Arcs whose type may differ, identified by their child end.
        let mut arcs = vec![x];
        for dn in &dirty {
            let a = dn.node;
            if self.parent[a] != NIL {
                arcs.push(a);
            }
            if self.solid[a] != NIL {
                arcs.push(self.solid[a]);
            }
        }
        arcs.sort_unstable();
        arcs.dedup();
        let new_rank = |this: &Self, a: usize| -> u32 {
            dirty
                .iter()
                .find(|dn| dn.node == a)
                .map_or_else(|| this.rank(a), |dn| dn.new)
        };
        let mut to_split = Vec::new();
        let mut to_join = Vec::new();
        for &c in &arcs {
            let p = self.parent[c];
            let want = new_rank(self, c) == new_rank(self, p);
            let is = self.solid[p] == c;
            if want && !is {
                to_join.push(c);
            } else if is && !want {
                to_split.push(c);
            }
        }
        if !solid_child {
            let flips = (to_split.len() + to_join.len()) as u64;
            self.stats.case2_max_flips = self.stats.case2_max_flips.max(flips);
            if flips > 3 {
                self.stats.case2_flip_violations += 1;
            }
        }
        for &c in &to_split {
            let p = self.parent[c];
            let s = self.size(c);
            self.seq.split_before(c);
            self.solid[p] = NIL;
            self.top_size[c] = s;
            self.seq.add_d(p, s);
        }
        for &c in &to_join {
            let p = self.parent[c];
            debug_assert_eq!(self.solid[p], NIL);
            debug_assert!(self.is_top(c));
            let s = self.top_size[c];
            self.seq.add_d(p, -s);
            let (hp, hc) = (self.header(p), self.header(c));
            self.seq.join(hp, hc);
            self.solid[p] = c;
        }
    }

    fn step(&self, a: usize) -> usize {
        if self.is_top(a) {
            self.parent[a]
        } else {
            self.top(a)
        }
    }

    /// Root of `v` and the number of traversal steps taken.
    pub fn root_steps(&mut self, v: NodeRef) -> Result<(NodeRef, u64)> {
        let mut c = self.check(v)?;
        let mut steps = 0;
        loop {
            let next = self.step(c);
            if next == NIL {
                break;
            }
            c = next;
            steps += 1;
        }
        self.stats.max_root_steps = self.stats.max_root_steps.max(steps);
        Ok((self.node(c), steps))
    }

    /// Walks up from `v` and `w` one path at a time, always advancing the
    /// side whose current path top is larger, until both sides reach a
    /// common path.
    fn traverse(&mut self, v: usize, w: usize) -> (Traversal, u64) {
        let mut from_v = vec![v];
        let mut from_w = vec![w];
        let mut steps = 0u64;
        let nca = loop {
            let (a, b) = (*from_v.last().unwrap(), *from_w.last().unwrap());
            let (ha, hb) = (self.header(a), self.header(b));
            if ha == hb {
                break Some(if self.key[a] < self.key[b] { a } else { b });
            }
            let (ta, tb) = (self.seq.first(ha), self.seq.first(hb));
            let side = if self.key[ta] > self.key[tb] { &mut from_v } else { &mut from_w };
            let cur = *side.last().unwrap();
            let top = if cur == ta || cur == tb { cur } else { self.seq.first(self.header(cur)) };
            if top != cur {
                side.push(top);
                steps += 1;
            }
            let p = self.parent[top];
            if p == NIL {
                // The larger top is a root, so the other side lies in another tree.
                break None;
            }
            side.push(p);
            steps += 1;
        };
        self.stats.max_nca_steps = self.stats.max_nca_steps.max(steps);
        (Traversal { nca, from_v, from_w }, steps)
    }

    /// Nearest common ancestor and the number of traversal steps taken.
    pub fn nca_steps(&mut self, v: NodeRef, w: NodeRef) -> Result<(Option<NodeRef>, u64)> {
        let v = self.check(v)?;
        let w = self.check(w)?;
        let (t, steps) = self.traverse(v, w);
        Ok((t.nca.map(|u| self.node(u)), steps))
    }

    /// Number of nodes on the path from `v` up to, excluding, `stop`
    /// (to the root inclusive when `stop` is `NIL`).
    fn path_len(&self, v: usize, stop: usize) -> u64 {
        let stop_header = if stop == NIL { NIL } else { self.header(stop) };
        let mut c = v;
        let mut total = 0u64;
        loop {
            let h = self.header(c);
            if h == stop_header {
                total += (self.seq.pos(c) - self.seq.pos(stop)) as u64;
                return total;
            }
            total += self.seq.pos(c) as u64 + 1;
            let p = self.parent[self.seq.first(h)];
            if p == NIL {
                return total;
            }
            c = p;
        }
    }

    /// Child of `u` on the traversed path, from the last node reached before `u`.
    fn child_toward(&self, u: usize, visited: &[usize]) -> usize {
        let last = *visited.last().unwrap();
        let s = if last == u { visited[visited.len() - 2] } else { last };
        if self.header(s) != self.header(u) {
            self.top(s)
        } else {
            self.solid[u]
        }
    }

    /// Topmost node on the solid path of `y` greater than `x`, charging the
    /// query cost.
    fn topmost_solid(&mut self, y: usize, x: usize) -> usize {
        let t = self.seq.first_greater(self.header(y), &self.key, self.key[x]);
        self.counters.topmost_queries += 1;
        if t != NIL && t != y {
            let p = self.parent[t];
            let len = self.seq.pos(p) - self.seq.pos(y) + 1;
            self.counters.topmost_cost += ceil_lg(len as u64);
        }
        t
    }

    /// The deepest ancestor of `w` on the solid path of `y`, and its child
    /// towards `w`.
    ///
    /// `recorded` holds the traversal's nodes from `w` upwards that are not
    /// above `y`. Path repairs made earlier in the merge can regroup the
    /// nodes between recorded entries, so the answer is confirmed by
    /// climbing whole paths from the deepest recorded node known to be below
    /// the exit point; every climb is counted in `resync_jumps`.
    fn exit_point(&mut self, y: usize, recorded: &[usize]) -> (usize, usize) {
        let hy = self.header(y);
        let mut i = recorded.len();
        while i > 0 && self.header(recorded[i - 1]) == hy {
            i -= 1;
        }
        if i == 0 {
            return (recorded[0], NIL);
        }
        let mut c = recorded[i - 1];
        let mut below = NIL;
        while self.header(c) != hy {
            let top = self.top(c);
            below = top;
            c = self.parent[top];
            self.stats.resync_jumps += 1;
        }
        (c, below)
    }

    fn run_merge(&mut self, v: usize, w: usize) {
        let (trav, _) = self.traverse(v, w);
        let u = trav.nca;
        let un = u.unwrap_or(NIL);
        let shorter = self.path_len(v, un).min(self.path_len(w, un)) + u.is_some() as u64;
        self.counters.shorter_path_nodes += shorter;
        if u == Some(v) || u == Some(w) {
            return;
        }
        let Traversal { from_v, from_w, .. } = trav;
        let (mut x, mut y) = match u {
            Some(u) => (self.child_toward(u, &from_v), self.child_toward(u, &from_w)),
            None => {
                let rv = self.root_steps(self.node(v)).unwrap().0;
                let rw = self.root_steps(self.node(w)).unwrap().0;
                (self.slot[rv.0], self.slot[rw.0])
            }
        };
        let (mut v, mut w) = (v, w);
        let (mut vis_v, mut vis_w) = (from_v, from_w);
        if self.key[x] < self.key[y] {
            std::mem::swap(&mut x, &mut y);
            std::mem::swap(&mut v, &mut w);
            std::mem::swap(&mut vis_v, &mut vis_w);
        }
        let mut cur_v = vis_v.len();
        let mut cur_w = vis_w.len();
        while self.key[x] < self.key[w] {
            self.counters.merge_steps += 1;
            while cur_w > 0 && self.key[vis_w[cur_w - 1]] < self.key[y] {
                cur_w -= 1;
            }
            let (s, below) = self.exit_point(y, &vis_w[..cur_w]);
            let t = if self.key[x] < self.key[s] {
                self.topmost_solid(y, x)
            } else {
                below
            };
            let z = self.parent[t];
            self.relink(x, z);
            y = t;
            if self.key[x] < self.key[y] {
                std::mem::swap(&mut x, &mut y);
                std::mem::swap(&mut v, &mut w);
                std::mem::swap(&mut vis_v, &mut vis_w);
                std::mem::swap(&mut cur_v, &mut cur_w);
            }
        }
        self.relink(x, w);
    }

    /// Rebuilds the structure from the live nodes' parent map.
    fn rebuild(&mut self) {
        self.stats.rebuilds += 1;
        let live_slots: Vec<usize> = (0..self.key.len()).filter(|&s| self.live[self.handle[s]]).collect();
        let mut remap = vec![NIL; self.key.len()];
        for (i, &s) in live_slots.iter().enumerate() {
            remap[s] = i;
        }
        let key: Vec<Key> = live_slots.iter().map(|&s| self.key[s]).collect();
        let parent: Vec<usize> = live_slots
            .iter()
            .map(|&s| if self.parent[s] == NIL { NIL } else { remap[self.parent[s]] })
            .collect();
        let handle: Vec<usize> = live_slots.iter().map(|&s| self.handle[s]).collect();
        for (i, &h) in handle.iter().enumerate() {
            self.slot[h] = i;
        }
        self.build(key, parent, handle);
    }

    fn build(&mut self, key: Vec<Key>, parent: Vec<usize>, handle: Vec<usize>) {
        let n = key.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| key[b].cmp(&key[a]));
        let mut size = vec![1i64; n];
        for &a in &order {
            if parent[a] != NIL {
                size[parent[a]] += size[a];
            }
        }
        let mut solid = vec![NIL; n];
        let mut d = vec![1i64; n];
        let mut live_children = vec![0u32; n];
        for a in 0..n {
            let p = parent[a];
            if p == NIL {
                continue;
            }
            live_children[p] += 1;
            if rank_of(size[a]) == rank_of(size[p]) {
                solid[p] = a;
            } else {
                d[p] += size[a];
            }
        }
        let mut seq = PathSeqs::with_capacity(n);
        for &dv in &d {
            seq.push(dv);
        }
        let mut top_size = vec![0i64; n];
        for a in 0..n {
            let p = parent[a];
            if p != NIL && solid[p] == a {
                continue;
            }
            top_size[a] = size[a];
            let mut root = a;
            let mut c = solid[a];
            while c != NIL {
                root = seq.join(root, c);
                c = solid[c];
            }
        }
        self.key = key;
        self.parent = parent;
        self.solid = solid;
        self.top_size = top_size;
        self.live_children = live_children;
        self.handle = handle;
        self.seq = seq;
    }

    /// Parent of every handle; `None` for roots and deleted nodes.
    pub fn parent_map(&self) -> Vec<Option<NodeRef>> {
        (0..self.slot.len())
            .map(|h| {
                if !self.live[h] {
                    return None;
                }
                let p = self.parent[self.slot[h]];
                (p != NIL).then(|| self.node(p))
            })
            .collect()
    }

    /// Recomputes sizes, ranks, dashed sizes, top sizes and path membership
    /// from the parent pointers alone and compares them with the stored
    /// partition.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let n = self.key.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.key[b].cmp(&self.key[a]));
        let mut size = vec![1i64; n];
        for &a in &order {
            let p = self.parent[a];
            if p != NIL {
                if self.key[p] >= self.key[a] {
                    return Err(format!("heap order violated on arc {a} -> {p}"));
                }
                size[p] += size[a];
            }
        }
        let mut d = vec![1i64; n];
        let mut solid_count = vec![0u32; n];
        for a in 0..n {
            let p = self.parent[a];
            if p == NIL {
                continue;
            }
            let solid = rank_of(size[a]) == rank_of(size[p]);
            if solid != (self.solid[p] == a) {
                return Err(format!("arc {a} -> {p} has the wrong type"));
            }
            if solid {
                solid_count[p] += 1;
            } else {
                d[p] += size[a];
            }
        }
        for a in 0..n {
            if solid_count[a] > 1 {
                return Err(format!("node {a} has {} solid children", solid_count[a]));
            }
            let sc = self.solid[a];
            if sc != NIL && self.parent[sc] != a {
                return Err(format!("solid child pointer of {a} is dangling"));
            }
            if d[a] != self.seq.d(a) {
                return Err(format!("dashed size of {a}: {} != {}", self.seq.d(a), d[a]));
            }
        }
        for a in 0..n {
            if !self.is_top(a) {
                continue;
            }
            if self.top_size[a] != size[a] {
                return Err(format!("top size of {a}: {} != {}", self.top_size[a], size[a]));
            }
            let h = self.header(a);
            self.seq.audit_tree(h)?;
            let mut path = vec![a];
            while self.solid[*path.last().unwrap()] != NIL {
                path.push(self.solid[*path.last().unwrap()]);
            }
            if self.seq.in_order(h) != path {
                return Err(format!("path sequence of top {a} is out of order"));
            }
            for (i, &b) in path.iter().enumerate() {
                if i > 0 && size[b] != size[path[i - 1]] - d[path[i - 1]] {
                    return Err(format!("size equation fails at {b}"));
                }
                if self.size(b) != size[b] {
                    return Err(format!("derived size of {b} is stale"));
                }
            }
        }
        for a in 0..n {
            let p = self.parent[a];
            let live_kids = (0..n)
                .filter(|&c| self.parent[c] == a && self.live[self.handle[c]])
                .count();
            if p == NIL && live_kids == 0 {
                continue;
            }
            if live_kids as u32 != self.live_children[a] {
                return Err(format!("live child count of {a} is stale"));
            }
        }
        Ok(())
    }
}

impl MergeableForest for RankForest {
    fn name(&self) -> &'static str {
        "rank"
    }

    fn capability(&self) -> Capability {
        Capability::NO_CUT
    }

    fn insert(&mut self, label: f64) -> NodeRef {
        let h = self.slot.len();
        let s = self.key.len();
        self.key.push(Key::new(label, h as u64));
        self.parent.push(NIL);
        self.solid.push(NIL);
        self.top_size.push(1);
        self.live_children.push(0);
        self.handle.push(h);
        self.seq.push(1);
        self.slot.push(s);
        self.live.push(true);
        self.live_count += 1;
        NodeRef(h)
    }

    fn merge(&mut self, v: NodeRef, w: NodeRef) -> Result<()> {
        let v = self.check(v)?;
        let w = self.check(w)?;
        self.counters.merges += 1;
        self.touched.clear();
        self.run_merge(v, w);
        let changed = self
            .touched
            .iter()
            .filter(|&&(x, old)| self.parent[x] != old)
            .count() as u64;
        self.counters.parent_changes += changed;
        if changed > 0 {
            self.counters.structural_merges += 1;
        }
        Ok(())
    }

    fn root(&mut self, v: NodeRef) -> Result<NodeRef> {
        Ok(self.root_steps(v)?.0)
    }

    fn nca(&mut self, v: NodeRef, w: NodeRef) -> Result<Option<NodeRef>> {
        Ok(self.nca_steps(v, w)?.0)
    }

    fn parent(&mut self, v: NodeRef) -> Result<Option<NodeRef>> {
        let s = self.check(v)?;
        let p = self.parent[s];
        Ok((p != NIL).then(|| self.node(p)))
    }

    fn cut(&mut self, v: NodeRef) -> Result<()> {
        self.check(v)?;
        Err(ForestError::Unsupported {
            backend: "rank",
            op: Operation::Cut,
        })
    }

    fn delete(&mut self, v: NodeRef) -> Result<()> {
        let s = self.check(v)?;
        if self.live_children[s] != 0 {
            return Err(ForestError::NotLeaf(v));
        }
        let p = self.parent[s];
        if p != NIL {
            self.live_children[p] -= 1;
        }
        self.live[v.0] = false;
        self.live_count -= 1;
        if self.key.len() >= REBUILD_MIN && 2 * self.live_count <= self.key.len() {
            self.rebuild();
        }
        Ok(())
    }

    fn key(&self, v: NodeRef) -> Result<Key> {
        let s = self.check(v)?;
        Ok(self.key[s])
    }

    fn is_live(&self, v: NodeRef) -> bool {
        self.check(v).is_ok()
    }

    fn handle_count(&self) -> usize {
        self.slot.len()
    }

    fn counters(&self) -> &OpCounters {
        &self.counters
    }
}
