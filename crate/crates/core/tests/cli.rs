mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::corpus_path;
use serde_json::Value as Json;

fn spacheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spacheck"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn example(name: &str) -> String {
    corpus_path(name).to_string_lossy().into_owned()
}

fn temp_spec(dir: &Path, text: &str) -> String {
    let path = dir.join("t.spa");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(out: &Output) -> Json {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}\n{}", stdout(out)))
}

#[test]
fn math_passes() {
    let out = spacheck(&["check", &example("math.spa"), "--const", "max_num_q=5"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("60 states"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("pass")).count(), 4);
}

#[test]
fn buggy_deadlocks() {
    let out = spacheck(&[
        "check",
        &example("math_buggy.spa"),
        "--const",
        "max_num_q=3",
    ]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(
        text.lines()
            .any(|l| l.starts_with("fail") && l.contains("deadlock")),
        "{text}"
    );
    let last_num = text
        .lines()
        .rfind(|l| l.trim_start().starts_with("num = "))
        .unwrap();
    assert_eq!(last_num.trim(), "num = 4");

    let out = spacheck(&[
        "check",
        &example("math_buggy.spa"),
        "--const",
        "max_num_q=3",
        "--no-deadlock",
    ]);
    assert!(!stdout(&out).contains("deadlock"));
}

#[test]
fn usage_errors_exit_3() {
    let out = spacheck(&["check", &example("math.spa")]);
    assert_eq!(code(&out), 3);
    assert!(
        stderr(&out).contains("constant max_num_q unbound"),
        "{}",
        stderr(&out)
    );

    let dup = spacheck(&[
        "check",
        &example("math.spa"),
        "--const",
        "max_num_q=2",
        "--const",
        "max_num_q=3",
    ]);
    assert_eq!(code(&dup), 3);

    for args in [
        vec!["check", "/nonexistent/file.spa"],
        vec!["check"],
        vec!["frobnicate"],
        vec!["check", "--bogus-flag", "x.spa"],
        vec!["graph", "x.spa"],
    ] {
        let out = spacheck(&args);
        assert_eq!(code(&out), 3, "{args:?}: {}", stderr(&out));
    }
    let bad_value = spacheck(&["check", &example("math.spa"), "--const", "max_num_q=\"x\""]);
    assert_eq!(code(&bad_value), 3);
    let unknown = spacheck(&["check", &example("clock.spa"), "--const", "max_num_q=3"]);
    assert_eq!(code(&unknown), 3);
    assert_eq!(code(&spacheck(&["--help"])), 0);
}

#[test]
fn spec_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        // parse error
        ("spec s\nvar x : int init 0\naction A { x' = }\n", "3:17"),
        // static error
        ("spec s\nvar x : int init 0\naction A { y' = 1 }\n", "3:12"),
        // domain violation during exploration
        (
            "spec s\nvar x : int domain 0..2 init 0\naction A { x' = x + 1 }\n",
            "domain",
        ),
        // overflow during exploration
        (
            "spec s\nvar x : int init 9223372036854775807\naction A { x' = x + 1 }\n",
            "overflow",
        ),
    ];
    for (text, needle) in cases {
        let path = temp_spec(dir.path(), text);
        let out = spacheck(&["check", &path]);
        assert_eq!(code(&out), 2, "{text}");
        let err = stderr(&out);
        assert!(err.contains(needle), "{text}\n{err}");
    }
    let out = spacheck(&[
        "check",
        &example("math.spa"),
        "--const",
        "max_num_q=5",
        "--max-states",
        "10",
    ]);
    assert_eq!(code(&out), 2);
    let out = spacheck(&[
        "check",
        &example("math.spa"),
        "--const",
        "max_num_q=5",
        "--max-depth",
        "3",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn error_verdict_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = temp_spec(
        dir.path(),
        "spec s\nvar x : int domain 0..2 init 0\naction A { x' = if x = 2 then 0 else x + 1 }\n\
         property P: eventually (x * 9223372036854775807 > 1)\nproperty Q: eventually (x = 1)\n",
    );
    let out = spacheck(&["check", &path, "--json"]);
    assert_eq!(code(&out), 2);
    let j = json(&out);
    assert_eq!(j["results"][1]["status"], "error");
    assert_eq!(j["results"][2]["status"], "pass");
}

#[test]
fn json_schema() {
    let out = spacheck(&[
        "check",
        &example("math.spa"),
        "--const",
        "max_num_q=3",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let j = json(&out);
    let keys: Vec<_> = j.as_object().unwrap().keys().cloned().collect();
    assert_eq!(
        keys,
        [
            "spec",
            "constants",
            "states",
            "transitions",
            "elapsed_ms",
            "results"
        ]
    );
    assert_eq!(j["spec"], "math");
    assert_eq!(j["constants"]["max_num_q"], 3);
    assert_eq!(
        (j["states"].as_u64(), j["transitions"].as_u64()),
        (Some(24), Some(36))
    );
    assert!(j["elapsed_ms"].is_number());
    let results = j["results"].as_array().unwrap();
    assert_eq!(results.len(), 4);
    for r in results {
        let keys: Vec<_> = r.as_object().unwrap().keys().cloned().collect();
        assert_eq!(
            keys,
            ["name", "kind", "status", "binder", "trace", "detail"]
        );
        assert_eq!(r["status"], "pass");
    }
    let kinds: Vec<_> = results
        .iter()
        .map(|r| r["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["deadlock", "eventually", "leadsto", "invariant"]);

    let clock = json(&spacheck(&["check", &example("clock.spa"), "--json"]));
    assert_eq!(
        (clock["states"].as_u64(), clock["transitions"].as_u64()),
        (Some(24), Some(24))
    );
}

#[test]
fn json_failing_invariant_trace() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(corpus_path("math.spa")).unwrap()
        + "\ninvariant Naive: num = count_right + count_wrong\n";
    let path = temp_spec(dir.path(), &src);
    let out = spacheck(&["check", &path, "--const", "max_num_q=3", "--json"]);
    assert_eq!(code(&out), 1);
    let j = json(&out);
    let r = j["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == "Naive")
        .unwrap();
    assert_eq!(r["status"], "fail");
    let t = &r["trace"];
    assert_eq!(t["actions"], serde_json::json!([]));
    assert!(t["loop_start"].is_null());
    let states = t["states"].as_array().unwrap();
    assert_eq!(states.len(), 1);
    // kinds survive: ints, strings and booleans
    assert_eq!(states[0]["num"], 1);
    assert_eq!(states[0]["result"], "");
    assert_eq!(states[0]["input_enabled"], true);
}

#[test]
fn json_lasso_trace() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(corpus_path("math.spa")).unwrap()
        + "\nproperty Input: always eventually (input_enabled)\n";
    let path = temp_spec(dir.path(), &src);
    let out = spacheck(&["check", &path, "--const", "max_num_q=2", "--json"]);
    assert_eq!(code(&out), 1);
    let j = json(&out);
    let r = &j["results"][4];
    assert_eq!(
        (r["kind"].as_str(), r["status"].as_str()),
        (Some("always_eventually"), Some("fail"))
    );
    let t = &r["trace"];
    let n = t["states"].as_array().unwrap().len();
    assert_eq!(t["loop_start"].as_u64(), Some(n as u64 - 1));
    assert_eq!(t["actions"].as_array().unwrap().len(), n - 1);
}

#[test]
fn text_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(corpus_path("math_buggy.spa")).unwrap()
        + "\ninvariant Naive: num = count_right + count_wrong\nproperty Six: eventually (num = 6)\n";
    let path = temp_spec(dir.path(), &src);
    for n in ["1", "3"] {
        let c = format!("max_num_q={n}");
        let text = stdout(&spacheck(&["check", &path, "--const", &c]));
        let j = json(&spacheck(&["check", &path, "--const", &c, "--json"]));
        let from_json: Vec<(String, String)> = j["results"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| {
                (
                    r["status"].as_str().unwrap().into(),
                    r["name"].as_str().unwrap().into(),
                )
            })
            .collect();
        let from_text: Vec<(String, String)> = text
            .lines()
            .filter(|l| l.starts_with("pass") || l.starts_with("fail") || l.starts_with("error"))
            .map(|l| {
                let mut w = l.split_whitespace();
                (w.next().unwrap().into(), w.next().unwrap().into())
            })
            .collect();
        assert_eq!(from_text, from_json);
    }
}

#[test]
fn text_trace_format() {
    let out = spacheck(&[
        "check",
        &example("math_buggy.spa"),
        "--const",
        "max_num_q=1",
    ]);
    let text = stdout(&out);
    assert!(
        text.contains("State 1:") && !text.contains("State 0:"),
        "{text}"
    );
    assert!(text.contains("-- Input_Answer -->"), "{text}");
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(corpus_path("math.spa")).unwrap()
        + "\nproperty Input: always eventually (input_enabled)\n";
    let path = temp_spec(dir.path(), &src);
    let text = stdout(&spacheck(&["check", &path, "--const", "max_num_q=1"]));
    assert!(text.contains("loop to state"), "{text}");
}

fn dot_lines(text: &str) -> (Vec<&str>, Vec<&str>) {
    let edges = text.lines().filter(|l| l.contains("->")).collect();
    let nodes = text
        .lines()
        .filter(|l| l.contains("[label=") && !l.contains("->"))
        .collect();
    (nodes, edges)
}

#[test]
fn dot_export() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("clock.dot");
    let out = spacheck(&[
        "graph",
        &example("clock.spa"),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    let (nodes, edges) = dot_lines(&text);
    assert_eq!((nodes.len(), edges.len()), (24, 24));
    assert!(edges.iter().all(|e| e.contains("label=\"Next\"")));
    assert_eq!(
        nodes.iter().filter(|n| n.contains("doublecircle")).count(),
        24
    );

    let dot = dir.path().join("math.dot");
    let out = spacheck(&[
        "check",
        &example("math.spa"),
        "--const",
        "max_num_q=1",
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&dot).unwrap();
    let (nodes, edges) = dot_lines(&text);
    assert_eq!(nodes.len(), 4);
    let checks: Vec<&&str> = edges.iter().filter(|e| e.contains("\"Check\"")).collect();
    assert_eq!(checks.len(), 2);
    let source = |e: &str| e.split("->").next().unwrap().trim().to_string();
    assert_eq!(source(checks[0]), source(checks[1]));
    assert!(
        nodes[0].starts_with("  0 [label=\"0\\nnum=1,"),
        "{}",
        nodes[0]
    );

    let path = temp_spec(
        dir.path(),
        "spec bare\nvar b : bool init false\naction Flip { b' = not b }\n",
    );
    let dot = dir.path().join("bare.dot");
    let out = spacheck(&["graph", &path, "--dot", dot.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&dot).unwrap();
    let (nodes, edges) = dot_lines(&text);
    assert_eq!((nodes.len(), edges.len()), (2, 2));
}
