//! Pairing sweeps: the direct path-walking sweep, the single pass over a
//! parent-capable forest and the two-pass variant that needs no parents.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Adjacency, ReebError, ReebGraph, VertexKind};
use crate::forest::{ForestError, MergeableForest, Operation};
use crate::key::NodeRef;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairType {
    /// Down-fork with up-fork.
    A,
    /// Down-fork with source.
    B,
    /// Sink with up-fork.
    C,
    /// Sink with source.
    D,
}

impl PairType {
    /// Type of a pair from the kinds of its later and earlier vertex.
    pub fn classify(later: VertexKind, earlier: VertexKind) -> Option<PairType> {
        use VertexKind::*;
        match (later, earlier) {
            (DownFork, UpFork) => Some(PairType::A),
            (DownFork, Source) => Some(PairType::B),
            (Sink, UpFork) => Some(PairType::C),
            (Sink, Source) => Some(PairType::D),
            _ => None,
        }
    }
}

impl fmt::Display for PairType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairType::A => "a",
            PairType::B => "b",
            PairType::C => "c",
            PairType::D => "d",
        })
    }
}

/// One pair; `x` is the later vertex in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pair {
    pub x: usize,
    pub y: usize,
    pub kind: PairType,
}

/// A pairing of graph vertices, sorted by the later vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    pub pairs: Vec<Pair>,
}

impl Pairing {
    fn from_partners(adj: &Adjacency, found: &[(usize, usize)]) -> Pairing {
        let mut pairs: Vec<Pair> = found
            .iter()
            .map(|&(x, y)| {
                let (x, y) = (x.max(y), x.min(y));
                let kind = PairType::classify(adj.kinds[x], adj.kinds[y])
                    .unwrap_or_else(|| panic!("sweep paired a {} with a {}", adj.kinds[x], adj.kinds[y]));
                Pair { x, y, kind }
            })
            .collect();
        pairs.sort();
        Pairing { pairs }
    }

    /// Checks that the pairs partition the vertices, that each type matches
    /// the kinds of its vertices and that every component has one type-d pair.
    pub fn check(&self, g: &ReebGraph) -> Result<(), String> {
        let adj = g.adjacency().map_err(|e| e.to_string())?;
        let n = g.len();
        let mut seen = vec![false; n];
        for p in &self.pairs {
            if p.x >= n || p.y >= n || p.y >= p.x {
                return Err(format!("malformed pair ({}, {})", p.x, p.y));
            }
            for v in [p.x, p.y] {
                if std::mem::replace(&mut seen[v], true) {
                    return Err(format!("vertex {v} is paired twice"));
                }
            }
            if PairType::classify(adj.kinds[p.x], adj.kinds[p.y]) != Some(p.kind) {
                return Err(format!("pair ({}, {}) has the wrong type {}", p.x, p.y, p.kind));
            }
        }
        if let Some(v) = seen.iter().position(|&s| !s) {
            return Err(format!("vertex {v} is unpaired"));
        }
        let (ids, count) = g.component_ids();
        let mut d_pairs = vec![0; count];
        for p in self.pairs.iter().filter(|p| p.kind == PairType::D) {
            d_pairs[ids[p.x]] += 1;
        }
        if let Some(c) = d_pairs.iter().position(|&k| k != 1) {
            return Err(format!("component {c} has {} type-d pairs", d_pairs[c]));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        self.pairs.iter().map(|p| format!("p {} {} {}\n", p.x, p.y, p.kind)).collect()
    }
}

/// Direct sweep that walks paths backward and rearranges them, with no
/// mergeable trees. Quadratic in the worst case; used as the oracle.
///
/// The sweep invariants are asserted after every vertex: each visited vertex
/// has in-degree at most one, a live visited vertex is paired exactly when its
/// in- and out-degree are both one or both zero, and arcs stay increasing.
pub fn reference_pairing(g: &ReebGraph) -> Result<Pairing, ReebError> {
    let adj = g.adjacency()?;
    let n = g.len();
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut paired = vec![false; n];
    let mut deleted = vec![false; n];
    // Arcs to vertices not yet visited.
    let mut pending: Vec<usize> = adj.succs.iter().map(Vec::len).collect();
    let mut found = Vec::with_capacity(n / 2);
    for x in 0..n {
        for &p in &adj.preds[x] {
            pending[p] -= 1;
        }
        match adj.kinds[x] {
            VertexKind::Source => {}
            VertexKind::UpFork => pred[x] = Some(adj.preds[x][0]),
            VertexKind::DownFork => {
                let (v, w) = (adj.preds[x][0], adj.preds[x][1]);
                let mut walked = vec![v, w];
                let (mut a, mut b) = (v, w);
                let y = loop {
                    if a == b {
                        break a;
                    }
                    if a < b {
                        std::mem::swap(&mut a, &mut b);
                    }
                    match pred[a] {
                        None => break a,
                        Some(p) => {
                            a = p;
                            walked.push(p);
                        }
                    }
                };
                found.push((x, y));
                paired[x] = true;
                paired[y] = true;
                walked.sort_unstable();
                walked.dedup();
                for i in 1..walked.len() {
                    pred[walked[i]] = Some(walked[i - 1]);
                }
                pred[x] = Some(v.max(w));
            }
            VertexKind::Sink => {
                deleted[x] = true;
                paired[x] = true;
                let mut v = adj.preds[x][0];
                while paired[v] {
                    deleted[v] = true;
                    v = pred[v].expect("a paired vertex with a live successor has a predecessor");
                }
                found.push((x, v));
                paired[v] = true;
            }
        }
        assert_sweep_invariants(x, &pred, &paired, &deleted, &pending);
    }
    Ok(Pairing::from_partners(&adj, &found))
}

fn assert_sweep_invariants(x: usize, pred: &[Option<usize>], paired: &[bool], deleted: &[bool], pending: &[usize]) {
    let mut out = pending[..=x].to_vec();
    for u in 0..=x {
        if deleted[u] {
            continue;
        }
        if let Some(p) = pred[u] {
            assert!(p < u, "arc {p} -> {u} breaks the topological order after visiting {x}");
            assert!(!deleted[p], "live vertex {u} hangs below deleted {p}");
            out[p] += 1;
        }
    }
    for u in (0..=x).filter(|&u| !deleted[u]) {
        let indeg = pred[u].is_some() as usize;
        let balanced = (indeg == 1 && out[u] == 1) || (indeg == 0 && out[u] == 0);
        assert_eq!(
            paired[u], balanced,
            "vertex {u} after visiting {x}: paired={} but in={indeg} out={}",
            paired[u], out[u]
        );
    }
}

/// Work done by the single-pass sweep beyond the per-vertex operations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SinglePassStats {
    /// Parent steps taken while looking for an unpaired ancestor at sinks.
    pub parent_walk_steps: u64,
    /// Forest operations issued, inserts included.
    pub forest_ops: u64,
}

struct Sweep<'a, F: ?Sized> {
    forest: &'a mut F,
    base: usize,
    stats: SinglePassStats,
}

impl<F: MergeableForest + ?Sized> Sweep<'_, F> {
    fn node(&self, v: usize) -> NodeRef {
        NodeRef(self.base + v)
    }

    fn vertex(&self, h: NodeRef) -> usize {
        h.0 - self.base
    }

    fn merge(&mut self, v: usize, w: usize) -> Result<(), ForestError> {
        self.stats.forest_ops += 1;
        self.forest.merge(self.node(v), self.node(w))
    }

    /// Runs the forward sweep over `g`. Returns every pair found, first those
    /// found at down-forks. With `walk_parents` unset, sinks only merge.
    fn run(&mut self, g: &ReebGraph, adj: &Adjacency, walk_parents: bool) -> Result<Vec<(usize, usize)>, ForestError> {
        let n = g.len();
        for (v, &l) in g.labels.iter().enumerate() {
            let h = self.forest.insert(l);
            self.stats.forest_ops += 1;
            debug_assert_eq!(h, self.node(v));
        }
        let mut paired = vec![false; n];
        let mut found = Vec::with_capacity(n / 2);
        for x in 0..n {
            let preds = &adj.preds[x];
            match adj.kinds[x] {
                VertexKind::Source => {}
                VertexKind::UpFork => self.merge(x, preds[0])?,
                VertexKind::DownFork => {
                    let (v, w) = (preds[0], preds[1]);
                    let (hv, hw) = (self.node(v), self.node(w));
                    self.stats.forest_ops += 3;
                    let (rv, rw) = (self.forest.root(hv)?, self.forest.root(hw)?);
                    let y = if rv != rw {
                        if self.forest.key(rv)? > self.forest.key(rw)? {
                            rv
                        } else {
                            rw
                        }
                    } else {
                        self.forest.nca(hv, hw)?.expect("vertices with one root have a common ancestor")
                    };
                    let y = self.vertex(y);
                    found.push((x, y));
                    paired[x] = true;
                    paired[y] = true;
                    self.merge(x, v)?;
                    self.merge(x, w)?;
                }
                VertexKind::Sink => {
                    let v = preds[0];
                    self.merge(x, v)?;
                    if walk_parents {
                        let mut h = self.node(v);
                        while paired[self.vertex(h)] {
                            self.stats.parent_walk_steps += 1;
                            self.stats.forest_ops += 1;
                            h = self.forest.parent(h)?.expect("a paired vertex below an unpaired one has a parent");
                        }
                        let v = self.vertex(h);
                        found.push((x, v));
                        paired[x] = true;
                        paired[v] = true;
                    }
                }
            }
        }
        Ok(found)
    }
}

/// Pairs the vertices with one sweep over a forest that answers `parent`.
/// The forest's existing nodes are left alone; the graph's vertices are
/// inserted after them.
pub fn pair_single_pass<F: MergeableForest + ?Sized>(g: &ReebGraph, forest: &mut F) -> Result<Pairing, ReebError> {
    pair_single_pass_stats(g, forest).map(|(p, _)| p)
}

/// [`pair_single_pass`] that also reports its walk statistics.
pub fn pair_single_pass_stats<F: MergeableForest + ?Sized>(
    g: &ReebGraph,
    forest: &mut F,
) -> Result<(Pairing, SinglePassStats), ReebError> {
    let adj = g.adjacency()?;
    if !forest.capability().supports_parent {
        return Err(ForestError::Unsupported {
            backend: forest.name(),
            op: Operation::Parent,
        }
        .into());
    }
    let base = forest.handle_count();
    let mut sweep = Sweep { forest, base, stats: SinglePassStats::default() };
    let found = sweep.run(g, &adj, true)?;
    Ok((Pairing::from_partners(&adj, &found), sweep.stats))
}

/// Pairs the vertices with a forward and a reverse sweep that only use
/// insert, root, nca and merge. Each connected component contributes its
/// first and last vertex as its type-d pair; every other pair is found at a
/// down-fork of one of the two sweeps.
pub fn pair_two_pass<F: MergeableForest + ?Sized>(
    g: &ReebGraph,
    forward: &mut F,
    reverse: &mut F,
) -> Result<Pairing, ReebError> {
    let adj = g.adjacency()?;
    let n = g.len();
    let mut partner: Vec<Option<usize>> = vec![None; n];
    let mut found = Vec::with_capacity(n / 2);
    let mut record = |x: usize, y: usize, found: &mut Vec<(usize, usize)>| -> Result<(), ReebError> {
        match (partner[x], partner[y]) {
            (None, None) => {
                partner[x] = Some(y);
                partner[y] = Some(x);
                found.push((x, y));
                Ok(())
            }
            (Some(a), Some(b)) if a == y && b == x => Ok(()),
            _ => Err(ReebError::Conflict { x, y }),
        }
    };

    let (ids, count) = g.component_ids();
    let mut first = vec![usize::MAX; count];
    let mut last = vec![0; count];
    for v in 0..n {
        first[ids[v]] = first[ids[v]].min(v);
        last[ids[v]] = v;
    }
    for c in 0..count {
        record(last[c], first[c], &mut found)?;
    }

    let base = forward.handle_count();
    let mut sweep = Sweep { forest: forward, base, stats: SinglePassStats::default() };
    for (x, y) in sweep.run(g, &adj, false)? {
        record(x, y, &mut found)?;
    }

    let rg = g.reversed();
    let radj = rg.adjacency()?;
    let base = reverse.handle_count();
    let mut sweep = Sweep { forest: reverse, base, stats: SinglePassStats::default() };
    for (x, y) in sweep.run(&rg, &radj, false)? {
        record(n - 1 - x, n - 1 - y, &mut found)?;
    }
    Ok(Pairing::from_partners(&adj, &found))
}
