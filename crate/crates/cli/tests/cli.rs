use std::io::Write;
use std::process::{Command, Output, Stdio};

fn mergetree(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mergetree"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn mergetree");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const DIAMOND: &str = "# two parallel arcs between a fork pair
reeb 4
v 0 0
v 1 1.5
v 2 2
v 3 3
a 0 1
a 1 2
a 1 2
a 2 3
";

const TWO_PIECES: &str = "reeb 4\nv 0 0\nv 1 1\nv 2 2\nv 3 3\na 0 1\na 2 3\n";

#[test]
fn pair_agrees_across_algorithms_and_backends() {
    let expected = "p 2 1 a\np 3 0 d\n";
    let runs: [&[&str]; 6] = [
        &["pair", "--input", "-"],
        &["pair", "--input", "-", "--backend", "naive"],
        &["pair", "--input", "-", "--backend", "rank"],
        &["pair", "--input", "-", "--algo", "twopass"],
        &["pair", "--input", "-", "--algo", "twopass", "--backend", "dyn"],
        &["pair", "--input", "-", "--algo", "twopass", "--implicit-roots", "disjoint-set"],
    ];
    for args in runs {
        let o = mergetree(args, DIAMOND);
        assert!(o.status.success(), "{args:?}");
        assert_eq!(stdout(&o), expected, "{args:?}");
    }
}

#[test]
fn pair_handles_components_unless_connectivity_is_required() {
    let o = mergetree(&["pair", "--input", "-"], TWO_PIECES);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "p 1 0 d\np 3 2 d\n");
    let o = mergetree(&["pair", "--input", "-", "--require-connected"], TWO_PIECES);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pair_rejects_invalid_graphs_with_status_2() {
    let bad = [
        "reeb 2\nv 0 1\nv 1 0\na 0 1\n",
        "reeb 2\nv 0 0\nv 1 1\na 1 0\n",
        "reeb 3\nv 0 0\nv 1 1\nv 2 2\na 0 1\na 0 2\n",
        "graph 1\n",
    ];
    for text in bad {
        let o = mergetree(&["pair", "--input", "-"], text);
        assert_eq!(o.status.code(), Some(2), "{text:?}");
        assert!(o.stdout.is_empty());
    }
    let o = mergetree(&["pair", "--input", "-", "--backend", "implicit"], DIAMOND);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_json_reports_are_flat() {
    let o = mergetree(&["bench", "--workload", "interleave", "--param", "8", "--report", "json"], "");
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["workload"], "interleave");
    assert_eq!(v["backend"], "dyn");
    assert_eq!(v["measured_parent_changes"], 17);
    assert!(v["merge_steps"].is_u64());
    assert!(v["bounds"].as_array().unwrap().iter().all(|b| b["verdict"] != "fail"));
}

#[test]
fn bench_runs_every_listed_backend() {
    let o = mergetree(&["bench", "--workload", "fig7", "--param", "16", "--backend", "naive,dyn,rank,implicit"], "");
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.matches("workload fig7").count(), 4);
    assert!(!text.contains("MISMATCH"));
    assert_eq!(mergetree(&["bench", "--workload", "fig7", "--param", "8"], "").status.code(), Some(2));
}

#[test]
fn fuzz_reports_each_seed() {
    let o = mergetree(&["fuzz", "--ops", "500", "--seed", "9", "--runs", "2", "--deletes", "on", "--parent-maps"], "");
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("seed 9:") && text.contains("seed 10:"));
    let o = mergetree(&["fuzz", "--ops", "500", "--cuts", "on"], "");
    assert!(o.status.success());
    let o = mergetree(&["fuzz", "--ops", "50", "--cuts", "on", "--backends", "dyn,implicit"], "");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sort_orders_reals() {
    let o = mergetree(&["sort", "--input", "-"], "3.5\n-1\n2\n\n1e3\n2\n");
    assert!(o.status.success());
    assert_eq!(stdout(&o), "-1\n2\n2\n3.5\n1000\n");
    assert_eq!(mergetree(&["sort", "--input", "-"], "1\nnan\n").status.code(), Some(2));
}

#[test]
fn run_replays_traces() {
    let trace = "i 3\ni 1\ni 2\nm 0 1\nq root 0\nq nca 0 2\nq parent 0\nc 0\nq parent 0\n";
    for backend in ["naive", "dyn"] {
        let o = mergetree(&["run", "--input", "-", "--backend", backend], trace);
        assert!(o.status.success());
        assert_eq!(stdout(&o), "= 1\n= null\n= 1\n= null\n");
    }
    let o = mergetree(&["run", "--input", "-", "--backend", "rank"], trace);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(mergetree(&["run", "--input", "-"], "i 1\nq root 3\n").status.code(), Some(2));
}
