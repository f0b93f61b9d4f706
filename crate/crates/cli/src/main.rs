//! `mergetree`: pairing, workloads, fuzzing, sorting and trace replay from
//! the command line.
//!
//! Exit status is 0 on success, 1 when a check fails (a bound, an expectation
//! or a backend disagreeing with the oracle) and 2 when the input or the
//! requested combination of options is invalid.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use mergetree_core::harness::{
    format_answer, fuzz, parse_trace, run_workload, sort_via_merge, workload_fig6, workload_fig7, workload_interleave,
    workload_random, AnyForest, Backend, CheckOptions, FuzzConfig, TraceShape, Workload,
};
use mergetree_core::reeb::{pair_single_pass, pair_two_pass, ReebError};
use mergetree_core::{ImplicitForest, ReebGraph, RootMode};

#[derive(Parser)]
#[command(name = "mergetree", version, about = "Mergeable heap-ordered forests and Reeb graph pairing")]
struct Cli {
    /// How the implicit backend answers root: an in-engine tree minimum or
    /// separate disjoint sets.
    #[arg(long, global = true, value_enum, default_value_t = RootArg::TreeMin)]
    implicit_roots: RootArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RootArg {
    TreeMin,
    DisjointSet,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Single,
    Twopass,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WorkloadArg {
    Fig6,
    Fig7,
    Interleave,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportArg {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Subcommand)]
enum Command {
    /// Pair the critical vertices of a Reeb graph file.
    Pair {
        /// Reeb graph file, or `-` for stdin.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Single)]
        algo: Algo,
        /// Defaults to dyn for the single pass and implicit for two passes.
        #[arg(long)]
        backend: Option<Backend>,
        /// Reject graphs with more than one connected component.
        #[arg(long)]
        require_connected: bool,
    },
    /// Run a deterministic workload and report counters and bound checks.
    Bench {
        #[arg(long, value_enum)]
        workload: WorkloadArg,
        /// k for fig6 and fig7, n for interleave and random.
        #[arg(long)]
        param: usize,
        /// Comma-separated backends.
        #[arg(long, value_delimiter = ',', default_value = "dyn")]
        backend: Vec<Backend>,
        #[arg(long, value_enum, default_value_t = ReportArg::Text)]
        report: ReportArg,
        /// Seed of the random workload.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare backends against the oracle on random traces.
    Fuzz {
        #[arg(long, default_value_t = 1000)]
        ops: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Switch::Off)]
        cuts: Switch,
        /// Comma-separated backends. Defaults to dyn with cuts, otherwise
        /// dyn, rank and implicit.
        #[arg(long, value_delimiter = ',')]
        backends: Option<Vec<Backend>>,
        /// Traces to run, with seeds counting up from --seed.
        #[arg(long, default_value_t = 1)]
        runs: u64,
        #[arg(long, default_value_t = 200)]
        max_live: usize,
        #[arg(long, value_enum, default_value_t = Switch::Off)]
        deletes: Switch,
        /// Compare full parent maps after every structural op.
        #[arg(long)]
        parent_maps: bool,
        /// Run structural audits after every op.
        #[arg(long)]
        audit: bool,
    },
    /// Sort reals, one per line, through a merge forest.
    Sort {
        /// Input file, or `-` for stdin.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "dyn")]
        backend: Backend,
    },
    /// Replay an op trace and print one line per query.
    Run {
        /// Trace file, or `-` for stdin.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "dyn")]
        backend: Backend,
    },
}

/// Input or option errors, reported with exit status 2.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn read_input(path: &PathBuf) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }
}

fn build(backend: Backend, roots: RootArg) -> AnyForest {
    match (backend, roots) {
        (Backend::Implicit, RootArg::DisjointSet) => {
            AnyForest::Implicit(ImplicitForest::with_mode(RootMode::DisjointSet))
        }
        _ => backend.build(),
    }
}

fn pair(input: &PathBuf, algo: Algo, backend: Option<Backend>, require_connected: bool, roots: RootArg) -> anyhow::Result<String> {
    let text = read_input(input)?;
    let g = ReebGraph::parse(&text).map_err(|e| invalid(e.to_string()))?;
    g.validate().map_err(|e| invalid(e.to_string()))?;
    if require_connected && g.components() > 1 {
        return Err(invalid(ReebError::Disconnected(g.components()).to_string()));
    }
    let pairing = match algo {
        Algo::Single => {
            let b = backend.unwrap_or(Backend::Dyn);
            if !b.capability().supports_parent {
                return Err(invalid(format!("the single-pass algorithm needs parent queries, which {b} lacks")));
            }
            pair_single_pass(&g, &mut build(b, roots))?
        }
        Algo::Twopass => {
            let b = backend.unwrap_or(Backend::Implicit);
            pair_two_pass(&g, &mut build(b, roots), &mut build(b, roots))?
        }
    };
    Ok(pairing.to_text())
}

fn workload(kind: WorkloadArg, param: usize, seed: u64) -> anyhow::Result<Workload> {
    Ok(match kind {
        WorkloadArg::Fig6 if param == 0 => return Err(invalid("fig6 needs k >= 1")),
        WorkloadArg::Fig6 => workload_fig6(param),
        WorkloadArg::Fig7 => workload_fig7(param).map_err(invalid)?,
        WorkloadArg::Interleave => workload_interleave(param).map_err(invalid)?,
        WorkloadArg::Random => workload_random(param, seed),
    })
}

fn bench(kind: WorkloadArg, param: usize, backends: &[Backend], report: ReportArg, seed: u64) -> anyhow::Result<(String, bool)> {
    let w = workload(kind, param, seed)?;
    let mut out = String::new();
    let mut ok = true;
    for &b in backends {
        let r = run_workload(&w, b)?;
        ok &= r.ok();
        match report {
            ReportArg::Text => out.push_str(&r.to_string()),
            ReportArg::Json => {
                out.push_str(&serde_json::to_string(&r)?);
                out.push('\n');
            }
        }
    }
    Ok((out, ok))
}

#[allow(clippy::too_many_arguments)]
fn fuzz_cmd(
    ops: usize,
    seed: u64,
    cuts: bool,
    backends: Option<Vec<Backend>>,
    runs: u64,
    max_live: usize,
    deletes: bool,
    check: CheckOptions,
) -> anyhow::Result<(String, bool)> {
    let backends = backends.unwrap_or_else(|| {
        if cuts {
            vec![Backend::Dyn]
        } else {
            vec![Backend::Dyn, Backend::Rank, Backend::Implicit]
        }
    });
    if max_live < 2 {
        return Err(invalid("--max-live must be at least 2"));
    }
    let shape = TraceShape { ops, max_live, cuts, deletes, ..TraceShape::default() };
    let mut out = String::new();
    for s in seed..seed.saturating_add(runs) {
        let cfg = FuzzConfig { seed: s, shape, backends: backends.clone(), check };
        let outcome = fuzz(&cfg).map_err(invalid)?;
        if let Some(m) = &outcome.mismatch {
            out.push_str(&format!("seed {s}: FAIL\n{m}"));
            return Ok((out, false));
        }
        let stats = outcome.stats.as_ref().expect("a trace without mismatch has stats");
        out.push_str(&format!(
            "seed {s}: {} ops, n {}, m {}, {} answers equal the oracle",
            stats.ops, stats.n, stats.m, stats.queries_compared
        ));
        if check.parent_maps {
            out.push_str(&format!(", {} parent maps", stats.parent_maps_compared));
        }
        if check.audit {
            out.push_str(&format!(", {} audits", stats.audits));
        }
        out.push('\n');
        for (b, c) in stats.bounds.iter().filter(|(_, c)| !c.passed()) {
            out.push_str(&format!("  {b} {c}\n"));
        }
        if !outcome.ok() {
            return Ok((out, false));
        }
    }
    Ok((out, true))
}

fn sort(input: &PathBuf, backend: Backend, roots: RootArg) -> anyhow::Result<String> {
    let text = read_input(input)?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| invalid(format!("line {}: expected a real, found `{t}`", i + 1)))?;
        if !v.is_finite() {
            return Err(invalid(format!("line {}: value must be finite", i + 1)));
        }
        values.push(v);
    }
    if !backend.capability().supports_parent {
        return Err(invalid(format!("sorting reads parents, which {backend} lacks")));
    }
    let sorted = sort_via_merge(&values, &mut build(backend, roots))?;
    Ok(sorted.iter().map(|v| format!("{v}\n")).collect())
}

fn run(input: &PathBuf, backend: Backend, roots: RootArg) -> anyhow::Result<String> {
    let text = read_input(input)?;
    let ops = parse_trace(&text).map_err(|e| invalid(e.to_string()))?;
    let cap = backend.capability();
    if let Some((i, op)) = ops.iter().enumerate().find(|(_, op)| !op.supported_by(cap)) {
        return Err(invalid(format!("op {i} (`{op}`) is not supported by {backend}")));
    }
    let mut f = build(backend, roots);
    let mut out = String::new();
    for (index, op) in ops.iter().enumerate() {
        match op.apply(&mut f) {
            Ok(Some(answer)) => {
                out.push_str(&format_answer(answer));
                out.push('\n');
            }
            Ok(None) => {}
            Err(e) => return Err(invalid(format!("op {index} (`{op}`): {e}"))),
        }
    }
    Ok(out)
}

fn execute(cli: Cli) -> anyhow::Result<(String, bool)> {
    let roots = cli.implicit_roots;
    match cli.command {
        Command::Pair { input, algo, backend, require_connected } => {
            pair(&input, algo, backend, require_connected, roots).map(|s| (s, true))
        }
        Command::Bench { workload, param, backend, report, seed } => bench(workload, param, &backend, report, seed),
        Command::Fuzz { ops, seed, cuts, backends, runs, max_live, deletes, parent_maps, audit } => fuzz_cmd(
            ops,
            seed,
            cuts.on(),
            backends,
            runs,
            max_live,
            deletes.on(),
            CheckOptions { parent_maps, audit },
        ),
        Command::Sort { input, backend } => sort(&input, backend, roots).map(|s| (s, true)),
        Command::Run { input, backend } => run(&input, backend, roots).map(|s| (s, true)),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok((out, ok)) => {
            let mut stdout = io::stdout().lock();
            // A closed pipe is not an error worth reporting.
            let _ = stdout.write_all(out.as_bytes());
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
