//! Rooted dynamic trees on top of self-adjusting path decomposition.
//!
//! Each preferred path is an auxiliary splay tree ordered from the tree root
//! (leftmost) down to the deepest node (rightmost). Auxiliary roots keep a
//! path-parent pointer in `par`. Every auxiliary node carries three
//! aggregates: its splay-subtree size, the minimum over its splay subtree
//! (a path minimum once the path is exposed) and the minimum over its splay
//! subtree together with all subtrees hanging off it through path-parent
//! pointers (a tree minimum at the root of the exposed path). The latter needs
//! the per-node ordered set `virt` of minima of those hanging subtrees.
//! Lazy `rev` flags flip path orientation for `evert`.

use std::collections::BTreeSet;

use crate::forest::{ForestError, Result};
use crate::key::{Key, NodeRef};

const NIL: u32 = u32::MAX;

#[derive(Clone, Debug, Default)]
pub struct DynForest {
    key: Vec<Key>,
    ch: Vec<[u32; 2]>,
    par: Vec<u32>,
    rev: Vec<bool>,
    cnt: Vec<u32>,
    path_min: Vec<u32>,
    tree_min: Vec<u32>,
    virt: Vec<BTreeSet<(Key, u32)>>,
}

impl DynForest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        DynForest {
            key: Vec::with_capacity(n),
            ch: Vec::with_capacity(n),
            par: Vec::with_capacity(n),
            rev: Vec::with_capacity(n),
            cnt: Vec::with_capacity(n),
            path_min: Vec::with_capacity(n),
            tree_min: Vec::with_capacity(n),
            virt: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.key.is_empty()
    }

    /// Adds a single-node tree and returns its index.
    pub fn add_node(&mut self, key: Key) -> usize {
        let i = self.key.len() as u32;
        self.key.push(key);
        self.ch.push([NIL, NIL]);
        self.par.push(NIL);
        self.rev.push(false);
        self.cnt.push(1);
        self.path_min.push(i);
        self.tree_min.push(i);
        self.virt.push(BTreeSet::new());
        i as usize
    }

    pub fn key(&self, v: usize) -> Key {
        self.key[v]
    }

    #[inline]
    fn is_aux_root(&self, x: u32) -> bool {
        let p = self.par[x as usize];
        p == NIL || {
            let c = self.ch[p as usize];
            c[0] != x && c[1] != x
        }
    }

    #[inline]
    fn push(&mut self, x: u32) {
        let xi = x as usize;
        if self.rev[xi] {
            self.ch[xi].swap(0, 1);
            for c in self.ch[xi] {
                if c != NIL {
                    self.rev[c as usize] ^= true;
                }
            }
            self.rev[xi] = false;
        }
    }

    #[inline]
    fn smaller(&self, a: u32, b: u32) -> u32 {
        if self.key[a as usize] < self.key[b as usize] {
            a
        } else {
            b
        }
    }

    fn pull(&mut self, x: u32) {
        let xi = x as usize;
        let [l, r] = self.ch[xi];
        let mut cnt = 1;
        let mut pm = x;
        let mut tm = x;
        for c in [l, r] {
            if c != NIL {
                let ci = c as usize;
                cnt += self.cnt[ci];
                pm = self.smaller(pm, self.path_min[ci]);
                tm = self.smaller(tm, self.tree_min[ci]);
            }
        }
        if let Some(&(_, m)) = self.virt[xi].first() {
            tm = self.smaller(tm, m);
        }
        self.cnt[xi] = cnt;
        self.path_min[xi] = pm;
        self.tree_min[xi] = tm;
    }

    fn rotate(&mut self, x: u32) {
        let p = self.par[x as usize];
        let g = self.par[p as usize];
        let dir = (self.ch[p as usize][1] == x) as usize;
        let b = self.ch[x as usize][dir ^ 1];
        self.ch[p as usize][dir] = b;
        if b != NIL {
            self.par[b as usize] = p;
        }
        self.ch[x as usize][dir ^ 1] = p;
        self.par[p as usize] = x;
        self.par[x as usize] = g;
        if g != NIL {
            let gc = &mut self.ch[g as usize];
            if gc[0] == p {
                gc[0] = x;
            } else if gc[1] == p {
                gc[1] = x;
            }
        }
        self.pull(p);
        self.pull(x);
    }

    fn splay(&mut self, x: u32) {
        let mut stack = vec![x];
        let mut y = x;
        while !self.is_aux_root(y) {
            y = self.par[y as usize];
            stack.push(y);
        }
        while let Some(z) = stack.pop() {
            self.push(z);
        }
        while !self.is_aux_root(x) {
            let p = self.par[x as usize];
            if !self.is_aux_root(p) {
                let g = self.par[p as usize];
                let zig_zig = (self.ch[g as usize][0] == p) == (self.ch[p as usize][0] == x);
                if zig_zig {
                    self.rotate(p);
                } else {
                    self.rotate(x);
                }
            }
            self.rotate(x);
        }
    }

    #[inline]
    fn virt_entry(&self, sub: u32) -> (Key, u32) {
        let m = self.tree_min[sub as usize];
        (self.key[m as usize], m)
    }

    /// Exposes the root path of `x`; `x` ends as the root of its auxiliary
    /// tree with no deeper preferred child. Returns the last path-parent
    /// jump target, which is the nearest common ancestor with the
    /// previously exposed node.
    fn access(&mut self, x: u32) -> u32 {
        let mut last = NIL;
        let mut y = x;
        while y != NIL {
            self.splay(y);
            let r = self.ch[y as usize][1];
            if r != NIL {
                let e = self.virt_entry(r);
                self.virt[y as usize].insert(e);
            }
            if last != NIL {
                let e = self.virt_entry(last);
                let removed = self.virt[y as usize].remove(&e);
                debug_assert!(removed, "path child missing from virtual set");
            }
            self.ch[y as usize][1] = last;
            self.pull(y);
            last = y;
            y = self.par[y as usize];
        }
        self.splay(x);
        last
    }

    pub fn root(&mut self, v: usize) -> usize {
        let v = v as u32;
        self.access(v);
        let mut r = v;
        loop {
            self.push(r);
            let l = self.ch[r as usize][0];
            if l == NIL {
                break;
            }
            r = l;
        }
        self.splay(r);
        r as usize
    }

    pub fn connected(&mut self, v: usize, w: usize) -> bool {
        v == w || self.root(v) == self.root(w)
    }

    pub fn parent(&mut self, v: usize) -> Option<usize> {
        let v = v as u32;
        self.access(v);
        self.push(v);
        let mut r = self.ch[v as usize][0];
        if r == NIL {
            return None;
        }
        loop {
            self.push(r);
            let c = self.ch[r as usize][1];
            if c == NIL {
                break;
            }
            r = c;
        }
        self.splay(r);
        Some(r as usize)
    }

    /// Makes `w` the parent of the root `v`; `w` must lie in another tree.
    pub fn link(&mut self, v: usize, w: usize) -> Result<()> {
        if self.root(v) != v || self.connected(v, w) {
            return Err(ForestError::BadLink(NodeRef(v), NodeRef(w)));
        }
        let (v, w) = (v as u32, w as u32);
        self.access(v);
        self.access(w);
        self.par[v as usize] = w;
        let e = self.virt_entry(v);
        self.virt[w as usize].insert(e);
        self.pull(w);
        Ok(())
    }

    /// Removes the arc from `v` to its parent. Returns whether an arc existed.
    pub fn cut(&mut self, v: usize) -> bool {
        let v = v as u32;
        self.access(v);
        self.push(v);
        let l = self.ch[v as usize][0];
        if l == NIL {
            return false;
        }
        self.ch[v as usize][0] = NIL;
        self.par[l as usize] = NIL;
        self.pull(v);
        true
    }

    /// Re-roots the tree of `v` at `v`.
    pub fn evert(&mut self, v: usize) {
        let v = v as u32;
        self.access(v);
        self.rev[v as usize] ^= true;
    }

    pub fn nca(&mut self, v: usize, w: usize) -> Option<usize> {
        if !self.connected(v, w) {
            return None;
        }
        self.access(v as u32);
        Some(self.access(w as u32) as usize)
    }

    /// Minimum-key node on the path from `v` to its root.
    pub fn pathmin(&mut self, v: usize) -> usize {
        self.access(v as u32);
        self.path_min[v] as usize
    }

    /// Minimum-key node of the tree containing `v`.
    pub fn treemin(&mut self, v: usize) -> usize {
        self.access(v as u32);
        self.tree_min[v] as usize
    }

    /// Number of nodes on the path from `v` to its root, both included.
    pub fn depth(&mut self, v: usize) -> usize {
        self.access(v as u32);
        self.cnt[v] as usize
    }

    /// Smallest ancestor of `v` (inclusive) whose key is strictly greater than
    /// `threshold`. Keys on the root path of `v` must increase away from the
    /// root, which is the case for every heap-ordered tree.
    pub fn topmost(&mut self, v: usize, threshold: Key) -> Result<usize> {
        if self.key[v] <= threshold {
            return Err(ForestError::NotHeapOrdered(NodeRef(v)));
        }
        let v = v as u32;
        self.access(v);
        let mut node = v;
        let mut best = NIL;
        while node != NIL {
            self.push(node);
            if self.key[node as usize] > threshold {
                best = node;
                node = self.ch[node as usize][0];
            } else {
                node = self.ch[node as usize][1];
            }
        }
        if best == NIL {
            return Err(ForestError::NotHeapOrdered(NodeRef(v as usize)));
        }
        self.splay(best);
        // Every node left of `best` is an ancestor and must be at or below
        // the threshold.
        let l = self.ch[best as usize][0];
        if l != NIL && self.key[self.path_min[l as usize] as usize] > threshold {
            return Err(ForestError::NotHeapOrdered(NodeRef(v as usize)));
        }
        Ok(best as usize)
    }

    /// Parent of every node.
    pub fn parents(&mut self) -> Vec<Option<usize>> {
        (0..self.len()).map(|v| self.parent(v)).collect()
    }

    /// Undirected edge set as sorted `(min, max)` index pairs.
    pub fn edges(&mut self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self
            .parents()
            .into_iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (v.min(p), v.max(p))))
            .collect();
        e.sort_unstable();
        e
    }

    /// Pushes every pending reversal flag down to the leaves.
    pub fn push_all(&mut self) {
        let n = self.len() as u32;
        for x in 0..n {
            if self.is_aux_root(x) {
                let mut stack = vec![x];
                while let Some(y) = stack.pop() {
                    self.push(y);
                    for c in self.ch[y as usize] {
                        if c != NIL {
                            stack.push(c);
                        }
                    }
                }
            }
        }
    }

    /// Recomputes every aggregate from scratch and compares with the stored
    /// values.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let n = self.len();
        let mut kids: Vec<Vec<u32>> = vec![Vec::new(); n];
        for x in 0..n {
            let p = self.par[x];
            if p != NIL {
                kids[p as usize].push(x as u32);
            }
            for c in self.ch[x] {
                if c != NIL && self.par[c as usize] != x as u32 {
                    return Err(format!("child {c} of {x} has parent {}", self.par[c as usize]));
                }
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut state = vec![0u8; n];
        for start in 0..n {
            if self.par[start] != NIL {
                continue;
            }
            let mut stack = vec![(start as u32, false)];
            while let Some((x, done)) = stack.pop() {
                if done {
                    order.push(x);
                    continue;
                }
                if state[x as usize] != 0 {
                    return Err(format!("cycle through {x}"));
                }
                state[x as usize] = 1;
                stack.push((x, true));
                for &c in &kids[x as usize] {
                    stack.push((c, false));
                }
            }
        }
        if order.len() != n {
            return Err("parent pointers contain a cycle".into());
        }
        let mut cnt = vec![0u32; n];
        let mut pm = vec![NIL; n];
        let mut tm = vec![NIL; n];
        for &x in &order {
            let xi = x as usize;
            let mut c_cnt = 1;
            let mut c_pm = x;
            let mut c_tm = x;
            let mut expected_virt = BTreeSet::new();
            for &c in &kids[xi] {
                let ci = c as usize;
                if self.ch[xi].contains(&c) {
                    c_cnt += cnt[ci];
                    c_pm = self.smaller(c_pm, pm[ci]);
                } else {
                    expected_virt.insert((self.key[tm[ci] as usize], tm[ci]));
                }
                c_tm = self.smaller(c_tm, tm[ci]);
            }
            if expected_virt != self.virt[xi] {
                return Err(format!("virtual minima of {x} are stale"));
            }
            cnt[xi] = c_cnt;
            pm[xi] = c_pm;
            tm[xi] = c_tm;
            if self.cnt[xi] != c_cnt {
                return Err(format!("size aggregate of {x}: {} != {c_cnt}", self.cnt[xi]));
            }
            if self.path_min[xi] != c_pm {
                return Err(format!("path minimum of {x} is stale"));
            }
            if self.tree_min[xi] != c_tm {
                return Err(format!("tree minimum of {x} is stale"));
            }
        }
        Ok(())
    }
}
