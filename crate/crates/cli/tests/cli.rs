//! End-to-end runs of the binary against the fixture files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// A fresh scratch directory per call, so parallel tests never collide.
fn scratch() -> PathBuf {
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!(
        "pispace-cli-test-{}-{}",
        std::process::id(),
        NEXT.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn pispace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pispace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn encode_writes_full_and_simplified_dot() {
    let dir = scratch();
    let out = pispace(&[
        "encode",
        fixture("nil.pi").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let full = fs::read_to_string(dir.join("nil.encoded.dot")).unwrap();
    // The empty process encodes to exactly the root pair.
    assert!(full.contains(r#"[label="go"]"#));
    assert!(full.contains(r#"[label="t(p)"]"#));
    assert_eq!(full.matches(" -- ").count(), 1);
    let simplified = fs::read_to_string(dir.join("nil.simplified.dot")).unwrap();
    assert!(simplified.starts_with("graph"));
}

#[test]
fn explore_writes_dot_and_json_by_default() {
    let dir = scratch();
    let out = pispace(&[
        "explore",
        fixture("example4.pi").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("2 states, 1 edges"));

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("example4.space.json")).unwrap())
            .unwrap();
    assert_eq!(json["states"].as_array().unwrap().len(), 2);
    assert_eq!(json["edges"].as_array().unwrap().len(), 1);
    assert_eq!(json["edges"][0]["kind"], "com");
    assert_eq!(json["initial"], 0);
    assert_eq!(json["truncated"], false);

    let dot = fs::read_to_string(dir.join("example4.space.dot")).unwrap();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("->").count(), 1);
}

#[test]
fn explore_respects_the_format_selection() {
    let dir = scratch();
    let out = pispace(&[
        "explore",
        fixture("example4.pi").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    assert!(dir.join("example4.space.json").exists());
    assert!(!dir.join("example4.space.dot").exists());
}

#[test]
fn explore_output_is_reproducible() {
    let dir_a = scratch();
    let dir_b = scratch();
    for dir in [&dir_a, &dir_b] {
        let out = pispace(&[
            "explore",
            fixture("hospital.pi").to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(
        fs::read(dir_a.join("hospital.space.json")).unwrap(),
        fs::read(dir_b.join("hospital.space.json")).unwrap()
    );
    assert_eq!(
        fs::read(dir_a.join("hospital.space.dot")).unwrap(),
        fs::read(dir_b.join("hospital.space.dot")).unwrap()
    );
}

#[test]
fn simplified_exploration_renders_state_clusters() {
    let dir = scratch();
    let out = pispace(&[
        "explore",
        fixture("example4.pi").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--simplified",
        "--format",
        "dot",
    ]);
    assert!(out.status.success());
    let dot = fs::read_to_string(dir.join("example4.space.dot")).unwrap();
    assert!(dot.contains("subgraph cluster_s0"));
}

#[test]
fn reduce_dumps_the_pipeline_chain() {
    let out = pispace(&[
        "reduce",
        fixture("example4.pi").to_str().unwrap(),
        "--dump-intermediates",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for header in ["== source ==", "== stepped ==", "== merged ==", "== result =="] {
        assert!(text.contains(header), "missing {header}");
    }
    // The freshly stepped graph carries both kinds of cleanup labels; the
    // merged one only garbage; the final line shows the settled state.
    let stepped = text.split("== stepped ==").nth(1).unwrap();
    let stepped = stepped.split("== merged ==").next().unwrap();
    assert!(stepped.contains("merge("));
    assert!(stepped.contains("gc"));
    let merged = text.split("== merged ==").nth(1).unwrap();
    let merged = merged.split("== result ==").next().unwrap();
    assert!(!merged.contains("merge("));
    assert!(merged.contains("gc"));
    assert!(text.trim_end().ends_with("com -> y<w>"));
}

#[test]
fn reduce_on_a_terminal_process_says_so() {
    let out = pispace(&["reduce", fixture("nil.pi").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("no step applies"));
}

#[test]
fn parse_errors_exit_one_with_position() {
    let dir = scratch();
    let bad = dir.join("bad.pi");
    fs::write(&bad, "main = x<y>.\n").unwrap();
    let out = pispace(&["explore", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    // Diagnostics name the file and the line:column of the failure.
    let err = stderr(&out);
    assert!(err.contains("bad.pi"), "stderr: {err}");
    assert!(err.contains("1:"), "stderr: {err}");
}

#[test]
fn missing_input_exits_one() {
    let out = pispace(&["explore", "no-such-file.pi"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn strict_truncation_exits_three() {
    let dir = scratch();
    let out = pispace(&[
        "explore",
        fixture("hospital.pi").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--max-states",
        "3",
        "--strict",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("truncated"));

    // Without --strict the same truncation is an ordinary outcome.
    let out = pispace(&[
        "explore",
        fixture("hospital.pi").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--max-states",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn dump_rules_prints_every_strategy() {
    let out = pispace(&[
        "explore",
        fixture("pingpong.pi").to_str().unwrap(),
        "--out",
        scratch().to_str().unwrap(),
        "--dump-rules",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in [
        "strategy com",
        "strategy merge",
        "strategy gc",
        "strategy unfold[A]",
        "strategy unfold[B]",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn seeded_runs_keep_the_space_shape() {
    let dir = scratch();
    let out = pispace(&[
        "explore",
        fixture("pingpong.pi").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        "7",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("4 states, 5 edges"));
}
