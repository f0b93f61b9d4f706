//! Deterministic workloads realizing the lower-bound constructions.
//!
//! Initial trees are built from singletons by merges, with keys chosen so the
//! merges produce the intended shapes. The setup ops are kept apart from the
//! measured ops so counters can be read for the measured phase alone.

use serde::{Deserialize, Serialize};

use super::fuzz::{random_trace, TraceShape};
use super::Op;
use crate::forest::OpCounters;

/// A counter value the workload's construction predicts for its measured ops.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub counter: String,
    pub value: u64,
}

impl Expected {
    fn new(counter: &str, value: u64) -> Self {
        Expected { counter: counter.to_string(), value }
    }

    /// Reads the named counter from `c`.
    pub fn observed(&self, c: &OpCounters) -> Option<u64> {
        let v = serde_json::to_value(c).ok()?;
        v.get(&self.counter)?.as_u64()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub name: String,
    pub param: u64,
    pub setup: Vec<Op>,
    pub ops: Vec<Op>,
    pub expected: Vec<Expected>,
}

impl Workload {
    pub fn all_ops(&self) -> impl Iterator<Item = &Op> {
        self.setup.iter().chain(self.ops.iter())
    }

    pub fn node_count(&self) -> usize {
        self.all_ops().filter(|op| matches!(op, Op::Insert(_))).count()
    }
}

/// Quadratically many structural merges on `2k + 1` nodes.
///
/// Node 0 is the root, nodes `1..=k` form a chain below it and nodes
/// `k+1..=2k` hang directly below the root. Keys equal node numbers. Round `j`
/// merges every high node `k+i` with chain node `j`; each such merge moves
/// `k+i` from below `j-1` to below `j`, so every merge changes one parent.
pub fn workload_fig6(k: usize) -> Workload {
    assert!(k >= 1, "fig6 needs k >= 1");
    let mut setup: Vec<Op> = (0..=2 * k).map(|i| Op::Insert(i as f64)).collect();
    for j in 1..=k {
        setup.push(Op::Merge(j, j - 1));
    }
    for i in 1..=k {
        setup.push(Op::Merge(k + i, 0));
    }
    let mut ops = Vec::with_capacity(k * k);
    for j in 1..=k {
        for i in 1..=k {
            ops.push(Op::Merge(k + i, j));
        }
    }
    let kk = (k * k) as u64;
    Workload {
        name: "fig6".into(),
        param: k as u64,
        setup,
        ops,
        expected: vec![
            Expected::new("merges", kk),
            Expected::new("structural_merges", kk),
            Expected::new("parent_changes", kk),
        ],
    }
}

/// Leaf merges whose shorter merge paths total Θ(n^{3/2}).
///
/// Nodes `0..=k` form a spine (node 0 the root) and leaf `k+i` hangs below
/// spine node `i`. Keys equal node numbers. Merge `i` joins the shallowest
/// remaining leaf `k+i` with leaf `k+√k+i`, which lies √k levels deeper.
pub fn workload_fig7(k: usize) -> Result<Workload, String> {
    let r = (k as f64).sqrt().round() as usize;
    if k < 4 || r * r != k {
        return Err(format!("fig7 needs a perfect square k >= 4, got {k}"));
    }
    let mut setup: Vec<Op> = (0..=2 * k).map(|i| Op::Insert(i as f64)).collect();
    for j in 1..=k {
        setup.push(Op::Merge(j, j - 1));
    }
    for i in 1..=k {
        setup.push(Op::Merge(k + i, i));
    }
    let ops = (1..=k - r).map(|i| Op::Merge(k + i, k + r + i)).collect();
    let total = (k * r + k - 2 * r) / 2;
    Ok(Workload {
        name: "fig7".into(),
        param: k as u64,
        setup,
        ops,
        expected: vec![
            Expected::new("merges", (k - r) as u64),
            Expected::new("shorter_path_nodes", total as u64),
        ],
    })
}

fn bit_reverse(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Pairwise merging of `n = 2^b` singletons into one path, with keys
/// assigned by bit reversal so the two paths of every merge interleave
/// perfectly. Merging two interleaved paths of `L` nodes changes the parent
/// of every node but the smaller root, so round `r` changes `n - n/2^r`
/// parents.
pub fn workload_interleave(n: usize) -> Result<Workload, String> {
    if n < 2 || !n.is_power_of_two() {
        return Err(format!("interleave needs a power of two n >= 2, got {n}"));
    }
    let bits = n.trailing_zeros();
    let setup: Vec<Op> = (0..n).map(|i| Op::Insert(bit_reverse(i, bits) as f64)).collect();
    // The deepest node of the path holding block i.
    let mut bottom: Vec<usize> = (0..n).collect();
    let key = |i: usize| bit_reverse(i, bits);
    let mut ops = Vec::with_capacity(n - 1);
    let mut expected = 0u64;
    let mut width = 1;
    while width < n {
        for start in (0..n).step_by(2 * width) {
            let (a, b) = (bottom[start], bottom[start + width]);
            ops.push(Op::Merge(a, b));
            bottom[start] = if key(a) > key(b) { a } else { b };
        }
        expected += (n - n / (2 * width)) as u64;
        width *= 2;
    }
    Ok(Workload {
        name: "interleave".into(),
        param: n as u64,
        setup,
        ops,
        expected: vec![Expected::new("merges", (n - 1) as u64), Expected::new("parent_changes", expected)],
    })
}

/// A random cut-free trace of `4n` ops over at most `n` live nodes, using
/// only ops every backend can run. The leading inserts form the setup.
pub fn workload_random(n: usize, seed: u64) -> Workload {
    let shape = TraceShape {
        ops: 4 * n,
        max_live: n.max(2),
        cuts: false,
        deletes: false,
        parent_queries: false,
        leaf_merges: false,
    };
    let trace = random_trace(seed, &shape);
    let split = trace.iter().position(|op| !matches!(op, Op::Insert(_))).unwrap_or(trace.len());
    Workload {
        name: "random".into(),
        param: n as u64,
        setup: trace[..split].to_vec(),
        ops: trace[split..].to_vec(),
        expected: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Backend;
    use crate::MergeableForest;

    fn measured(w: &Workload, b: Backend) -> OpCounters {
        let mut f = b.build();
        for op in &w.setup {
            op.apply(&mut f).unwrap();
        }
        let before = *f.counters();
        for op in &w.ops {
            op.apply(&mut f).unwrap();
        }
        f.counters().since(&before)
    }

    #[test]
    fn bit_reversal() {
        assert_eq!((0..8).map(|i| bit_reverse(i, 3)).collect::<Vec<_>>(), [0, 4, 2, 6, 1, 5, 3, 7]);
        assert_eq!(bit_reverse(0, 0), 0);
    }

    #[test]
    fn fig6_small_instances() {
        let w = workload_fig6(1);
        assert_eq!((w.node_count(), w.ops.len()), (3, 1));
        let w = workload_fig6(3);
        assert_eq!(measured(&w, Backend::Dyn).structural_merges, 9);
    }

    #[test]
    fn fig7_closed_form_values() {
        assert_eq!(workload_fig7(4).unwrap().expected[1].value, 4);
        assert_eq!(workload_fig7(16).unwrap().expected[1].value, 36);
        assert_eq!(workload_fig7(100).unwrap().expected[1].value, 540);
        assert!(workload_fig7(8).is_err());
        assert!(workload_fig7(1).is_err());
    }

    #[test]
    fn fig7_shorter_paths_on_the_oracle() {
        for k in [4, 16, 100] {
            let w = workload_fig7(k).unwrap();
            let c = measured(&w, Backend::Naive);
            assert_eq!(c.shorter_path_nodes, w.expected[1].value, "k={k}");
        }
    }

    #[test]
    fn interleave_sums() {
        let w = workload_interleave(2).unwrap();
        assert_eq!(w.ops.len(), 1);
        assert_eq!(w.expected[1].value, 1);
        let w = workload_interleave(8).unwrap();
        assert_eq!(w.expected[1].value, 17);
        assert_eq!(measured(&w, Backend::Naive).parent_changes, 17);
        assert!(workload_interleave(6).is_err());
    }

    #[test]
    fn expected_reads_counters() {
        let c = OpCounters { shorter_path_nodes: 9, ..Default::default() };
        assert_eq!(Expected::new("shorter_path_nodes", 0).observed(&c), Some(9));
        assert_eq!(Expected::new("nope", 0).observed(&c), None);
    }
}
