//! Reeb graphs of critical points and their extended persistence pairing.
//!
//! Vertices are numbered in canonical order, which is also a topological
//! order: every arc runs from a smaller to a larger index and labels strictly
//! increase with the index.

mod generate;
mod pairing;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::ForestError;

pub use generate::generate;
pub use pairing::{pair_single_pass, pair_single_pass_stats, pair_two_pass, reference_pairing, Pair, PairType, Pairing, SinglePassStats};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReebError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid reeb graph: {0}")]
    Invalid(String),
    #[error("reeb graph has {0} connected components, expected one")]
    Disconnected(usize),
    #[error("sweeps disagree on the partner of {x} or {y}")]
    Conflict { x: usize, y: usize },
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// Role of a vertex, read off its in- and out-degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexKind {
    Source,
    Sink,
    UpFork,
    DownFork,
}

impl VertexKind {
    pub fn from_degrees(indeg: usize, outdeg: usize) -> Option<VertexKind> {
        match (indeg, outdeg) {
            (0, 1) => Some(VertexKind::Source),
            (1, 0) => Some(VertexKind::Sink),
            (1, 2) => Some(VertexKind::UpFork),
            (2, 1) => Some(VertexKind::DownFork),
            _ => None,
        }
    }

    /// The role after every arc is reversed.
    pub fn reversed(self) -> VertexKind {
        match self {
            VertexKind::Source => VertexKind::Sink,
            VertexKind::Sink => VertexKind::Source,
            VertexKind::UpFork => VertexKind::DownFork,
            VertexKind::DownFork => VertexKind::UpFork,
        }
    }
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VertexKind::Source => "source",
            VertexKind::Sink => "sink",
            VertexKind::UpFork => "up-fork",
            VertexKind::DownFork => "down-fork",
        })
    }
}

/// A directed multigraph whose vertex indices are in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReebGraph {
    pub labels: Vec<f64>,
    /// Arcs `(from, to)`; repeated entries are parallel arcs.
    pub arcs: Vec<(usize, usize)>,
}

/// Per-vertex adjacency of a validated graph.
#[derive(Clone, Debug)]
pub(crate) struct Adjacency {
    pub preds: Vec<Vec<usize>>,
    pub succs: Vec<Vec<usize>>,
    pub kinds: Vec<VertexKind>,
}

impl ReebGraph {
    pub fn new(labels: Vec<f64>, arcs: Vec<(usize, usize)>) -> Self {
        ReebGraph { labels, arcs }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Checks labels, arc direction, degree signatures and the open-component
    /// sweep. Reports the first failure found.
    pub fn validate(&self) -> Result<(), ReebError> {
        self.adjacency().map(|_| ())
    }

    pub(crate) fn adjacency(&self) -> Result<Adjacency, ReebError> {
        let n = self.len();
        let bad = |msg: String| Err(ReebError::Invalid(msg));
        for (i, &l) in self.labels.iter().enumerate() {
            if !l.is_finite() {
                return bad(format!("vertex {i} has a non-finite label"));
            }
            if i > 0 && self.labels[i - 1] >= l {
                return bad(format!("label of vertex {i} does not exceed label of vertex {}", i - 1));
            }
        }
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(a, b) in &self.arcs {
            if a >= n || b >= n {
                return bad(format!("arc {a} -> {b} names a vertex outside 0..{n}"));
            }
            if a >= b {
                return bad(format!("arc {a} -> {b} does not point to a later vertex"));
            }
            succs[a].push(b);
            preds[b].push(a);
        }
        let mut kinds = Vec::with_capacity(n);
        for v in 0..n {
            match VertexKind::from_degrees(preds[v].len(), succs[v].len()) {
                Some(k) => kinds.push(k),
                None => {
                    return bad(format!(
                        "vertex {v} has in-degree {} and out-degree {}",
                        preds[v].len(),
                        succs[v].len()
                    ))
                }
            }
        }
        let adj = Adjacency { preds, succs, kinds };
        adj.sweep_check()?;
        Ok(adj)
    }

    /// Number of connected components, ignoring arc direction.
    pub fn components(&self) -> usize {
        self.component_ids().1
    }

    /// Component id of every vertex (ids ordered by first vertex) and the count.
    pub fn component_ids(&self) -> (Vec<usize>, usize) {
        let n = self.len();
        let mut dsu = Dsu::new(n);
        for &(a, b) in &self.arcs {
            if a < n && b < n {
                dsu.union(a, b);
            }
        }
        let mut id = vec![usize::MAX; n];
        let mut count = 0;
        let ids = (0..n)
            .map(|v| {
                let r = dsu.find(v);
                if id[r] == usize::MAX {
                    id[r] = count;
                    count += 1;
                }
                id[r]
            })
            .collect();
        (ids, count)
    }

    /// The graph with every arc reversed and vertices renumbered in reverse
    /// canonical order. Labels are negated so they still increase.
    pub fn reversed(&self) -> ReebGraph {
        let n = self.len();
        let labels = self.labels.iter().rev().map(|&l| -l).collect();
        let arcs = self.arcs.iter().map(|&(a, b)| (n - 1 - b, n - 1 - a)).collect();
        ReebGraph { labels, arcs }
    }

    /// Parses the line-based text format.
    pub fn parse(text: &str) -> Result<ReebGraph, ReebError> {
        let mut labels = Vec::new();
        let mut arcs = Vec::new();
        let mut declared = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| ReebError::Parse { line, msg };
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let parts: Vec<&str> = body.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| err(format!("expected an index, found `{s}`")));
            match (declared, parts.as_slice()) {
                (None, ["reeb", n]) => declared = Some(num(n)?),
                (None, _) => return Err(err("expected `reeb <n>` header".into())),
                (Some(_), ["reeb", ..]) => return Err(err("duplicate header".into())),
                (Some(n), ["v", idx, label]) => {
                    let idx = num(idx)?;
                    if !arcs.is_empty() {
                        return Err(err("vertex line after arc lines".into()));
                    }
                    if idx != labels.len() || idx >= n {
                        return Err(err(format!("expected vertex {}, found {idx}", labels.len())));
                    }
                    let l = label
                        .parse::<f64>()
                        .map_err(|_| err(format!("expected a label, found `{label}`")))?;
                    labels.push(l);
                }
                (Some(n), ["a", from, to]) => {
                    if labels.len() != n {
                        return Err(err(format!("arc before all {n} vertices were declared")));
                    }
                    arcs.push((num(from)?, num(to)?));
                }
                (Some(_), _) => return Err(err(format!("unrecognized line `{body}`"))),
            }
        }
        match declared {
            None => Err(ReebError::Parse { line: 0, msg: "missing `reeb <n>` header".into() }),
            Some(n) if labels.len() != n => Err(ReebError::Parse {
                line: 0,
                msg: format!("header declares {n} vertices, found {}", labels.len()),
            }),
            Some(_) => Ok(ReebGraph { labels, arcs }),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("reeb {}\n", self.len());
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(&format!("v {i} {l}\n"));
        }
        for (a, b) in &self.arcs {
            out.push_str(&format!("a {a} {b}\n"));
        }
        out
    }
}

impl Adjacency {
    /// Sweeps the vertices in order, counting open arcs and open components.
    /// A component is open while it has an arc leading to an unvisited vertex.
    fn sweep_check(&self) -> Result<(), ReebError> {
        let n = self.kinds.len();
        let mut dsu = Dsu::new(n);
        let mut open_arcs = vec![0usize; n];
        let mut open_components = 0i64;
        for x in 0..n {
            let mut before: Vec<usize> = self.preds[x].iter().map(|&p| dsu.find(p)).collect();
            before.sort_unstable();
            before.dedup();
            let carried: usize = before.iter().map(|&b| open_arcs[b]).sum::<usize>() - self.preds[x].len();
            for &p in &self.preds[x] {
                dsu.union(p, x);
            }
            let r = dsu.find(x);
            open_arcs[r] = carried + self.succs[x].len();
            open_components += 1 - before.len() as i64;
            if open_arcs[r] == 0 {
                open_components -= 1;
            }
            if open_components < 0 {
                return Err(ReebError::Invalid(format!("open component count negative at vertex {x}")));
            }
        }
        if open_components != 0 {
            return Err(ReebError::Invalid(format!("{open_components} components left open")));
        }
        Ok(())
    }
}

/// Union-find with path halving and union by size.
#[derive(Clone, Debug)]
pub(crate) struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        a
    }
}
