//! Workloads, traces, differential fuzzing and counter-bound reports.

mod bounds;
mod fuzz;
mod sort;
mod workload;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::{Capability, ForestError, MergeableForest, OpCounters, Operation, Result};
use crate::key::{Key, NodeRef};
use crate::{DynMergeForest, ImplicitForest, NaiveForest, RankForest};

pub use bounds::{bound_checks, run_workload, BenchReport, BoundCheck, Verdict};
pub use fuzz::{check_trace, fuzz, CheckOptions, random_trace, FuzzConfig, FuzzOutcome, Mismatch, TraceShape, TraceStats};
pub use sort::sort_via_merge;
pub use workload::{workload_fig6, workload_fig7, workload_interleave, workload_random, Expected, Workload};

/// The interchangeable forest implementations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Naive,
    Dyn,
    Rank,
    Implicit,
}

impl Backend {
    pub const ALL: [Backend; 4] = [Backend::Naive, Backend::Dyn, Backend::Rank, Backend::Implicit];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Naive => "naive",
            Backend::Dyn => "dyn",
            Backend::Rank => "rank",
            Backend::Implicit => "implicit",
        }
    }

    pub fn capability(self) -> Capability {
        match self {
            Backend::Naive | Backend::Dyn => Capability::FULL,
            Backend::Rank => Capability::NO_CUT,
            Backend::Implicit => Capability::IMPLICIT,
        }
    }

    pub fn build(self) -> AnyForest {
        match self {
            Backend::Naive => AnyForest::Naive(NaiveForest::new()),
            Backend::Dyn => AnyForest::Dyn(DynMergeForest::new()),
            Backend::Rank => AnyForest::Rank(RankForest::new()),
            Backend::Implicit => AnyForest::Implicit(ImplicitForest::new()),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown backend `{s}` (expected naive, dyn, rank or implicit)"))
    }
}

/// A forest of any backend, with access to backend-specific inspection.
#[derive(Clone, Debug)]
pub enum AnyForest {
    Naive(NaiveForest),
    Dyn(DynMergeForest),
    Rank(RankForest),
    Implicit(ImplicitForest),
}

macro_rules! dispatch {
    ($self:expr, $f:ident => $body:expr) => {
        match $self {
            AnyForest::Naive($f) => $body,
            AnyForest::Dyn($f) => $body,
            AnyForest::Rank($f) => $body,
            AnyForest::Implicit($f) => $body,
        }
    };
}

impl AnyForest {
    pub fn backend(&self) -> Backend {
        match self {
            AnyForest::Naive(_) => Backend::Naive,
            AnyForest::Dyn(_) => Backend::Dyn,
            AnyForest::Rank(_) => Backend::Rank,
            AnyForest::Implicit(_) => Backend::Implicit,
        }
    }

    /// Parent of every handle, recovered from the implicit representation
    /// when the backend does not keep parents.
    pub fn parent_map(&mut self) -> Vec<Option<NodeRef>> {
        match self {
            AnyForest::Naive(f) => f.parent_map(),
            AnyForest::Dyn(f) => (0..f.handle_count())
                .map(|i| f.parent(NodeRef(i)).ok().flatten())
                .collect(),
            AnyForest::Rank(f) => f.parent_map(),
            AnyForest::Implicit(f) => f.materialize_parents(),
        }
    }

    /// Full structural self-check of the backend.
    pub fn audit(&mut self) -> std::result::Result<(), String> {
        match self {
            AnyForest::Naive(_) => Ok(()),
            AnyForest::Dyn(f) => f.audit(),
            AnyForest::Rank(f) => f.audit(),
            AnyForest::Implicit(f) => f.audit(),
        }
    }
}

impl MergeableForest for AnyForest {
    fn name(&self) -> &'static str {
        dispatch!(self, f => f.name())
    }
    fn capability(&self) -> Capability {
        dispatch!(self, f => f.capability())
    }
    fn insert(&mut self, label: f64) -> NodeRef {
        dispatch!(self, f => f.insert(label))
    }
    fn merge(&mut self, v: NodeRef, w: NodeRef) -> Result<()> {
        dispatch!(self, f => f.merge(v, w))
    }
    fn root(&mut self, v: NodeRef) -> Result<NodeRef> {
        dispatch!(self, f => f.root(v))
    }
    fn nca(&mut self, v: NodeRef, w: NodeRef) -> Result<Option<NodeRef>> {
        dispatch!(self, f => f.nca(v, w))
    }
    fn parent(&mut self, v: NodeRef) -> Result<Option<NodeRef>> {
        dispatch!(self, f => f.parent(v))
    }
    fn cut(&mut self, v: NodeRef) -> Result<()> {
        dispatch!(self, f => f.cut(v))
    }
    fn delete(&mut self, v: NodeRef) -> Result<()> {
        dispatch!(self, f => f.delete(v))
    }
    fn key(&self, v: NodeRef) -> Result<Key> {
        dispatch!(self, f => f.key(v))
    }
    fn is_live(&self, v: NodeRef) -> bool {
        dispatch!(self, f => f.is_live(v))
    }
    fn handle_count(&self) -> usize {
        dispatch!(self, f => f.handle_count())
    }
    fn counters(&self) -> &OpCounters {
        dispatch!(self, f => f.counters())
    }
}

/// One line of an operation trace. Node arguments are insertion indices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Op {
    Insert(f64),
    Merge(usize, usize),
    Cut(usize),
    Delete(usize),
    Root(usize),
    Nca(usize, usize),
    Parent(usize),
}

impl Op {
    pub fn is_query(&self) -> bool {
        matches!(self, Op::Root(_) | Op::Nca(..) | Op::Parent(_))
    }

    pub fn is_structural(&self) -> bool {
        matches!(self, Op::Merge(..) | Op::Cut(_) | Op::Delete(_))
    }

    /// The capability an op needs beyond the ones every backend has.
    pub fn requires(&self) -> Option<Operation> {
        match self {
            Op::Cut(_) => Some(Operation::Cut),
            Op::Parent(_) => Some(Operation::Parent),
            _ => None,
        }
    }

    /// Whether a backend with `cap` can run this op.
    pub fn supported_by(&self, cap: Capability) -> bool {
        match self.requires() {
            Some(Operation::Cut) => cap.supports_cut,
            Some(Operation::Parent) => cap.supports_parent,
            None => true,
        }
    }

    /// Applies the op; queries return their answer, other ops `None`.
    pub fn apply<F: MergeableForest + ?Sized>(&self, f: &mut F) -> Result<Option<Option<NodeRef>>> {
        Ok(match *self {
            Op::Insert(l) => {
                f.insert(l);
                None
            }
            Op::Merge(v, w) => {
                f.merge(NodeRef(v), NodeRef(w))?;
                None
            }
            Op::Cut(v) => {
                f.cut(NodeRef(v))?;
                None
            }
            Op::Delete(v) => {
                f.delete(NodeRef(v))?;
                None
            }
            Op::Root(v) => Some(Some(f.root(NodeRef(v))?)),
            Op::Nca(v, w) => Some(f.nca(NodeRef(v), NodeRef(w))?),
            Op::Parent(v) => Some(f.parent(NodeRef(v))?),
        })
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Insert(l) => write!(f, "i {l}"),
            Op::Merge(v, w) => write!(f, "m {v} {w}"),
            Op::Cut(v) => write!(f, "c {v}"),
            Op::Delete(v) => write!(f, "d {v}"),
            Op::Root(v) => write!(f, "q root {v}"),
            Op::Nca(v, w) => write!(f, "q nca {v} {w}"),
            Op::Parent(v) => write!(f, "q parent {v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("op {index} (`{op}`): {source}")]
    Op {
        index: usize,
        op: String,
        #[source]
        source: ForestError,
    },
}

impl FromStr for Op {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Op, String> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let idx = |t: &str| t.parse::<usize>().map_err(|_| format!("expected a node index, found `{t}`"));
        match parts.as_slice() {
            ["i", l] => l.parse::<f64>().map(Op::Insert).map_err(|_| format!("expected a label, found `{l}`")),
            ["m", v, w] => Ok(Op::Merge(idx(v)?, idx(w)?)),
            ["c", v] => Ok(Op::Cut(idx(v)?)),
            ["d", v] => Ok(Op::Delete(idx(v)?)),
            ["q", "root", v] => Ok(Op::Root(idx(v)?)),
            ["q", "nca", v, w] => Ok(Op::Nca(idx(v)?, idx(w)?)),
            ["q", "parent", v] => Ok(Op::Parent(idx(v)?)),
            _ => Err(format!("unrecognized op `{s}`")),
        }
    }
}

/// Parses a trace, skipping blank lines and `#` comments.
pub fn parse_trace(text: &str) -> std::result::Result<Vec<Op>, TraceError> {
    let mut ops = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        ops.push(body.parse().map_err(|msg| TraceError::Parse { line: i + 1, msg })?);
    }
    Ok(ops)
}

pub fn format_trace(ops: &[Op]) -> String {
    ops.iter().map(|op| format!("{op}\n")).collect()
}

/// Formats a query answer as an output line.
pub fn format_answer(answer: Option<NodeRef>) -> String {
    match answer {
        Some(v) => format!("= {v}"),
        None => "= null".to_string(),
    }
}

/// Runs a trace and returns one output line per query.
pub fn run_trace<F: MergeableForest + ?Sized>(f: &mut F, ops: &[Op]) -> std::result::Result<Vec<String>, TraceError> {
    let mut out = Vec::new();
    for (index, op) in ops.iter().enumerate() {
        match op.apply(f) {
            Ok(Some(answer)) => out.push(format_answer(answer)),
            Ok(None) => {}
            Err(source) => {
                return Err(TraceError::Op {
                    index,
                    op: op.to_string(),
                    source,
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trip() {
        let text = "i 1\ni 2.5 # comment\n\nm 1 0\nc 1\nd 1\nq root 0\nq nca 0 1\nq parent 1\n";
        let ops = parse_trace(text).unwrap();
        assert_eq!(ops.len(), 8);
        assert_eq!(ops[1], Op::Insert(2.5));
        assert_eq!(parse_trace(&format_trace(&ops)).unwrap(), ops);
    }

    #[test]
    fn trace_parse_error_has_line() {
        let e = parse_trace("i 1\nx 2\n").unwrap_err();
        assert_eq!(e, TraceError::Parse { line: 2, msg: "unrecognized op `x 2`".into() });
    }

    #[test]
    fn run_trace_answers_queries() {
        let ops = parse_trace("i 3\ni 1\ni 2\nm 0 1\nm 2 0\nq parent 0\nq root 0\nq nca 0 2\nq parent 1\n").unwrap();
        for b in [Backend::Naive, Backend::Dyn, Backend::Rank] {
            let out = run_trace(&mut b.build(), &ops).unwrap();
            assert_eq!(out, ["= 2", "= 1", "= 2", "= null"], "{b}");
        }
        let e = run_trace(&mut Backend::Implicit.build(), &ops).unwrap_err();
        assert!(matches!(e, TraceError::Op { index: 5, .. }));
    }

    #[test]
    fn backend_names_parse() {
        for b in Backend::ALL {
            assert_eq!(b.name().parse::<Backend>().unwrap(), b);
        }
        assert!("splay".parse::<Backend>().is_err());
    }
}
