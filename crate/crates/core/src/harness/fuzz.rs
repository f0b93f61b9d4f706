//! Differential fuzzing of the backends against the oracle.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bounds::{bound_checks, BoundCheck};
use super::{format_answer, AnyForest, Backend, Op};
use crate::forest::{MergeableForest, OpCounters};
use crate::key::NodeRef;
use crate::NaiveForest;

/// What a random trace may contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceShape {
    /// Total ops, inserts included.
    pub ops: usize,
    pub max_live: usize,
    pub cuts: bool,
    /// Leaf deletions.
    pub deletes: bool,
    pub parent_queries: bool,
    /// Restrict merges to pairs of current leaves.
    pub leaf_merges: bool,
}

impl Default for TraceShape {
    fn default() -> Self {
        TraceShape {
            ops: 1000,
            max_live: 200,
            cuts: false,
            deletes: false,
            parent_queries: true,
            leaf_merges: false,
        }
    }
}

/// Generates a trace that is valid on the oracle: every argument is live and
/// every deletion removes a leaf. Labels are small integers so ties, broken by
/// insertion order, are common.
pub fn random_trace(seed: u64, shape: &TraceShape) -> Vec<Op> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = NaiveForest::new();
    let mut live: Vec<usize> = Vec::new();
    let mut ops = Vec::with_capacity(shape.ops);
    let label_range = (shape.max_live as u32 / 2).max(4);
    while ops.len() < shape.ops {
        let op = if live.len() < 2 || (live.len() < shape.max_live && rng.gen_bool(0.15)) {
            Op::Insert(rng.gen_range(0..label_range) as f64)
        } else {
            let pick = |rng: &mut ChaCha8Rng, from: &[usize]| from[rng.gen_range(0..from.len())];
            let (v, w) = (pick(&mut rng, &live), pick(&mut rng, &live));
            let r: f64 = rng.gen();
            if r < 0.4 {
                if shape.leaf_merges {
                    let leaves: Vec<usize> = live.iter().copied().filter(|&x| g.is_leaf(NodeRef(x))).collect();
                    Op::Merge(pick(&mut rng, &leaves), pick(&mut rng, &leaves))
                } else {
                    Op::Merge(v, w)
                }
            } else if r < 0.52 {
                Op::Root(v)
            } else if r < 0.7 {
                Op::Nca(v, w)
            } else if r < 0.8 && shape.parent_queries {
                Op::Parent(v)
            } else if r < 0.9 && shape.cuts {
                Op::Cut(v)
            } else if r >= 0.9 && shape.deletes {
                let leaves: Vec<usize> = live.iter().copied().filter(|&x| g.is_leaf(NodeRef(x))).collect();
                let x = pick(&mut rng, &leaves);
                live.retain(|&y| y != x);
                Op::Delete(x)
            } else {
                Op::Nca(v, w)
            }
        };
        if let Op::Insert(_) = op {
            live.push(g.handle_count());
        }
        op.apply(&mut g).expect("generated op is valid on the oracle");
        ops.push(op);
    }
    ops
}

/// A backend disagreeing with the oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub backend: Backend,
    pub op_index: usize,
    pub op: String,
    pub detail: String,
    /// Shrunk trace that still shows a disagreement for `backend`.
    pub reproducer: Vec<Op>,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "backend {} disagrees at op {} (`{}`): {}", self.backend, self.op_index, self.op, self.detail)?;
        writeln!(f, "reproducer ({} ops):", self.reproducer.len())?;
        for op in &self.reproducer {
            writeln!(f, "  {op}")?;
        }
        Ok(())
    }
}

/// What [`check_trace`] verifies beyond query answers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Compare the full parent map after every structural op.
    pub parent_maps: bool,
    /// Run each backend's structural audit after every op.
    pub audit: bool,
}

/// Totals from a trace on which every backend agreed with the oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStats {
    pub ops: usize,
    /// Merge participants, as tracked by the oracle.
    pub n: u64,
    pub m: u64,
    pub cut_free: bool,
    pub delete_free: bool,
    pub queries_compared: u64,
    pub parent_maps_compared: u64,
    pub audits: u64,
    /// Largest root and nca step counts seen on the rank backend, and the
    /// caps `2 lg n + 2` and `4 lg n + 4` they are checked against.
    pub rank_root_steps: u64,
    pub rank_nca_steps: u64,
    pub counters: BTreeMap<Backend, OpCounters>,
    pub bounds: Vec<(Backend, BoundCheck)>,
}

impl TraceStats {
    pub fn bounds_ok(&self) -> bool {
        self.bounds.iter().all(|(_, b)| b.passed())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Failure {
    /// The oracle rejected an op, so the trace itself is malformed.
    Invalid,
    Mismatch { backend: Backend, index: usize, detail: String },
}

fn lg(n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        (n as f64).log2()
    }
}

fn show(answer: Option<Option<NodeRef>>) -> String {
    match answer {
        Some(a) => format_answer(a),
        None => "ok".into(),
    }
}

fn run_checked(ops: &[Op], backends: &[Backend], opts: CheckOptions) -> Result<TraceStats, Failure> {
    let mut oracle = NaiveForest::new();
    let mut forests: Vec<AnyForest> = backends.iter().map(|b| b.build()).collect();
    let mut stats = TraceStats {
        ops: ops.len(),
        n: 0,
        m: 0,
        cut_free: !ops.iter().any(|op| matches!(op, Op::Cut(_))),
        delete_free: !ops.iter().any(|op| matches!(op, Op::Delete(_))),
        queries_compared: 0,
        parent_maps_compared: 0,
        audits: 0,
        rank_root_steps: 0,
        rank_nca_steps: 0,
        counters: BTreeMap::new(),
        bounds: Vec::new(),
    };
    for (index, op) in ops.iter().enumerate() {
        let want = op.apply(&mut oracle).map_err(|_| Failure::Invalid)?;
        let want_parents = (opts.parent_maps && op.is_structural()).then(|| oracle.parent_map());
        for f in forests.iter_mut() {
            let backend = f.backend();
            let fail = |detail: String| Failure::Mismatch { backend, index, detail };
            if !op.supported_by(f.capability()) {
                if op.is_query() {
                    continue;
                }
                return Err(fail(format!("backend cannot run `{op}`")));
            }
            let got = match (&mut *f, *op) {
                (AnyForest::Rank(r), Op::Root(v)) => {
                    let cap = 2.0 * lg(r.structure_size()) + 2.0;
                    let (root, steps) = r.root_steps(NodeRef(v)).map_err(|e| fail(e.to_string()))?;
                    stats.rank_root_steps = stats.rank_root_steps.max(steps);
                    if steps as f64 > cap {
                        return Err(fail(format!("root took {steps} steps, cap {cap:.1}")));
                    }
                    Ok(Some(Some(root)))
                }
                (AnyForest::Rank(r), Op::Nca(v, w)) => {
                    let cap = 4.0 * lg(r.structure_size()) + 4.0;
                    let (u, steps) = r.nca_steps(NodeRef(v), NodeRef(w)).map_err(|e| fail(e.to_string()))?;
                    stats.rank_nca_steps = stats.rank_nca_steps.max(steps);
                    if steps as f64 > cap {
                        return Err(fail(format!("nca took {steps} steps, cap {cap:.1}")));
                    }
                    Ok(Some(u))
                }
                (f, op) => op.apply(f),
            };
            match got {
                Ok(got) if got == want => {}
                Ok(got) => return Err(fail(format!("answered {}, oracle {}", show(got), show(want)))),
                Err(e) => return Err(fail(format!("error `{e}`, oracle {}", show(want)))),
            }
            if want.is_some() {
                stats.queries_compared += 1;
            }
            if let Some(wp) = &want_parents {
                let gp = f.parent_map();
                if let Some(x) = (0..wp.len()).find(|&x| gp.get(x) != Some(&wp[x])) {
                    return Err(fail(format!(
                        "parent of {x} is {:?}, oracle {:?}",
                        gp.get(x).copied().flatten(),
                        wp[x]
                    )));
                }
                stats.parent_maps_compared += 1;
            }
            if opts.audit {
                f.audit().map_err(|e| fail(format!("audit: {e}")))?;
                stats.audits += 1;
            }
        }
    }
    stats.n = oracle.participants() as u64;
    stats.m = oracle.counters().merges;
    for f in &forests {
        let b = f.backend();
        stats.counters.insert(b, *f.counters());
        for c in bound_checks(b, f.counters(), stats.n, stats.m, stats.cut_free, stats.delete_free) {
            stats.bounds.push((b, c));
        }
    }
    Ok(stats)
}

/// Runs `ops` on the oracle and every backend, comparing every answer. On a
/// disagreement the trace is shrunk to a small reproducer.
///
/// Panics if the trace is not valid on the oracle.
pub fn check_trace(ops: &[Op], backends: &[Backend], opts: CheckOptions) -> Result<TraceStats, Box<Mismatch>> {
    match run_checked(ops, backends, opts) {
        Ok(stats) => Ok(stats),
        Err(Failure::Invalid) => panic!("trace is not valid on the oracle"),
        Err(Failure::Mismatch { backend, index, detail }) => {
            let reproducer = shrink(&ops[..=index], backend, opts);
            Err(Box::new(Mismatch {
                backend,
                op_index: index,
                op: ops[index].to_string(),
                detail,
                reproducer,
            }))
        }
    }
}

fn shrink(ops: &[Op], backend: Backend, opts: CheckOptions) -> Vec<Op> {
    shrink_with(ops, |t| matches!(run_checked(t, &[backend], opts), Err(Failure::Mismatch { .. })))
}

/// Drops ops from the tail while `fails` holds, then removes chunks of
/// halving size from anywhere in the trace.
fn shrink_with(ops: &[Op], fails: impl Fn(&[Op]) -> bool) -> Vec<Op> {
    let mut t = ops.to_vec();
    while t.len() > 1 && fails(&t[..t.len() - 1]) {
        t.pop();
    }
    let mut chunk = t.len() / 2;
    while chunk >= 1 {
        let mut i = 0;
        while i + chunk <= t.len() {
            let cand: Vec<Op> = t[..i].iter().chain(&t[i + chunk..]).copied().collect();
            if fails(&cand) {
                t = cand;
            } else {
                i += chunk;
            }
        }
        chunk /= 2;
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub seed: u64,
    pub shape: TraceShape,
    pub backends: Vec<Backend>,
    pub check: CheckOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzOutcome {
    pub seed: u64,
    pub stats: Option<TraceStats>,
    pub mismatch: Option<Box<Mismatch>>,
}

impl FuzzOutcome {
    /// No disagreement and no failed bound.
    pub fn ok(&self) -> bool {
        self.mismatch.is_none() && self.stats.as_ref().is_some_and(TraceStats::bounds_ok)
    }
}

/// Generates one random trace and checks it.
pub fn fuzz(cfg: &FuzzConfig) -> Result<FuzzOutcome, String> {
    if cfg.shape.cuts {
        if let Some(b) = cfg.backends.iter().find(|b| !b.capability().supports_cut) {
            return Err(format!("backend {b} cannot run traces with cuts"));
        }
    }
    let trace = random_trace(cfg.seed, &cfg.shape);
    Ok(match check_trace(&trace, &cfg.backends, cfg.check) {
        Ok(stats) => FuzzOutcome { seed: cfg.seed, stats: Some(stats), mismatch: None },
        Err(m) => FuzzOutcome { seed: cfg.seed, stats: None, mismatch: Some(m) },
    })
}
