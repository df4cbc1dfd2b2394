//! End-to-end tests through the `earleylog` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name).to_string_lossy().into_owned()
}

fn earleylog(args: &[&str]) -> Output {
    let args: Vec<String> =
        args.iter().map(|a| if a.contains('.') && !a.starts_with('-') { corpus(a) } else { a.to_string() }).collect();
    Command::new(env!("CARGO_BIN_EXE_earleylog")).args(&args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn eval_examples() {
    let o = earleylog(&["eval", "tc_left.dl", "graph.facts"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "answer(2)\nanswer(3)\n"));
    let o = earleylog(&["eval", "tc_left.dl", "empty.facts"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, ""));
    let o = earleylog(&["eval", "tc_tail.dl", "graph.facts", "--mode=extended", "--oracle"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "answer(2)\nanswer(3)\n"));
}

#[test]
fn compile_examples() {
    for prog in ["tc_left.dl", "tc_tail.dl"] {
        let o = earleylog(&["compile", prog]);
        assert_eq!(code(&o), 0);
        let text = stdout(&o);
        assert_eq!(text.lines().filter(|l| l.starts_with("state ")).count(), 2, "{text}");
        assert_eq!(text.lines().filter(|l| l.starts_with("transition ")).count(), 2, "{text}");
    }
    let o = earleylog(&["compile", "nonrecursive.dl"]);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("state ")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.starts_with("transition ")).count(), 1);
    assert!(text.contains("final 1 answer($c0)\n"));
}

#[test]
fn compile_is_deterministic_and_matches_golden_file() {
    let a = stdout(&earleylog(&["compile", "tc_left.dl"]));
    assert_eq!(a, stdout(&earleylog(&["compile", "tc_left.dl"])));
    assert_eq!(a, std::fs::read_to_string(corpus("tc.auto")).unwrap());
    let dot = stdout(&earleylog(&["compile", "tc_tail.dl", "--format", "dot"]));
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches(" -> ").count(), 2);
}

#[test]
fn compile_failures_exit_3() {
    let o = earleylog(&["compile", "same_generation.dl"]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("share the schema"), "{err}");
    let o = earleylog(&["compile", "tc_tail.dl", "--mode", "basic"]);
    assert_eq!(code(&o), 3);
    let o = earleylog(&["compile", "tc_left.dl", "--mode", "basic", "--cap", "1"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn run_examples() {
    let o = earleylog(&["run", "tc.auto", "graph.facts"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "answer(2)\nanswer(3)\n"));
    let o = earleylog(&["run", "tc.auto", "empty.facts"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, ""));
    let o = earleylog(&["run", "tc.auto", "cycle3.facts"]);
    assert_eq!(stdout(&o), "answer(1)\nanswer(2)\nanswer(3)\n");
    let o = earleylog(&["run", "tc.auto", "graph.facts", "--stream"]);
    assert_eq!(stdout(&o), "answer(2)\nanswer(3)\n");
    let o = earleylog(&["run", "tc.auto", "empty.facts", "--strict"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn trace_examples() {
    let state_sizes = |text: &str| -> Vec<usize> {
        text.lines()
            .filter(|l| l.starts_with('S') && l.ends_with("rules):"))
            .map(|l| l.split_whitespace().rev().nth(1).unwrap().trim_start_matches('(').parse().unwrap())
            .collect()
    };
    let o = earleylog(&["trace", "tc_left.dl", "graph.facts", "--mode=basic"]);
    assert_eq!(state_sizes(&stdout(&o)), [3, 5, 5]);
    let o = earleylog(&["trace", "tc_left.dl", "empty.facts"]);
    assert_eq!(state_sizes(&stdout(&o)).len(), 1);
    let o = earleylog(&["trace", "tc_tail.dl", "graph.facts", "--mode=extended"]);
    assert_eq!(state_sizes(&stdout(&o))[..2], [3, 4]);
}

#[test]
fn corpus_agrees_across_engines() {
    let cases = [
        ("tc_left.dl", "graph.facts"),
        ("tc_left.dl", "cycle5.facts"),
        ("tc_tail.dl", "cycle3.facts"),
        ("nonrecursive.dl", "graph.facts"),
        ("join.dl", "join.facts"),
        ("grammar.dl", "abc.facts"),
        ("grammar.dl", "bca.facts"),
    ];
    for (prog, facts) in cases {
        let eval = earleylog(&["eval", prog, facts, "--oracle"]);
        assert_eq!(code(&eval), 0, "{prog} {facts}");
        let run = earleylog(&["run", prog, facts]);
        assert_eq!(code(&run), 0, "{prog} {facts}");
        assert_eq!(stdout(&eval), stdout(&run), "{prog} {facts}");
    }
    // Not compilable, but still evaluated correctly.
    let o = earleylog(&["eval", "same_generation.dl", "sg.facts", "--oracle"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "answer(ann)\nanswer(bea)\nanswer(cid)\n"));
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    let bad_syntax = write("bad.dl", "path(X,Y) :- edge(X,Y\n");
    let unsafe_rule = write("unsafe.dl", "answer(X) :- edge(1,Y).\n");
    let no_goal = write("nogoal.dl", "path(X,Y) :- edge(X,Y).\n");
    let idb_fact = write("idb.facts", "path(1,2).\n");
    let run = |args: &[&str]| Command::new(env!("CARGO_BIN_EXE_earleylog")).args(args).output().unwrap();

    assert_eq!(code(&run(&["eval", &bad_syntax, &corpus("graph.facts")])), 1);
    assert_eq!(code(&run(&["eval", &unsafe_rule, &corpus("graph.facts")])), 2);
    assert_eq!(code(&run(&["eval", &no_goal, &corpus("graph.facts")])), 2);
    assert_eq!(code(&run(&["eval", &corpus("tc_left.dl"), &idb_fact])), 2);
    assert_eq!(code(&run(&["eval", "/nonexistent.dl", &corpus("graph.facts")])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["compile", &corpus("tc_left.dl"), "--cap", "0"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}
