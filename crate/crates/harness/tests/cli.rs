use std::path::PathBuf;
use std::process::{Command, Output};

fn lsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsq"))
        .args(args)
        .output()
        .expect("run lsq")
}

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
        .display()
        .to_string()
}

fn mini_fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../mini/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch_file(name: &str, text: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn typecheck_prints_the_type() {
    let o = lsq(&["typecheck", &corpus("once.lsq")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "Int");
}

#[test]
fn ill_typed_program_exits_with_one() {
    let f = scratch_file("bad.lsq", "1 + ()");
    let o = lsq(&["typecheck", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("type error"));
}

#[test]
fn top_needs_subtyping_mode() {
    let f = scratch_file("top.lsq", "(fun (x: Top) => 1)(2)");
    assert_eq!(lsq(&["typecheck", &f]).status.code(), Some(1));
    let o = lsq(&["typecheck", "--subtyping", &f]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "Int");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(lsq(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lsq(&["eval", "/nonexistent/file.lsq"]).status.code(), Some(2));
}

#[test]
fn eval_and_transform_agree() {
    let o = lsq(&["eval", &corpus("rep-driver.lsq")]);
    assert_eq!(stdout(&o).trim(), "77");
    let o = lsq(&["transform", &corpus("rep-driver.lsq")]);
    assert_eq!(o.status.code(), Some(0));
    let f = scratch_file("rep-driver.target", &stdout(&o));
    let o = lsq(&["eval-target", &f]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "77");
}

#[test]
fn trace_names_the_rules() {
    let o = lsq(&["eval", "--trace", &corpus("once.lsq")]);
    let text = stdout(&o);
    for rule in ["E-Start", "E-Resume1", "E-Yield", "E-Capture"] {
        assert!(text.contains(rule), "{rule} missing from\n{text}");
    }
    assert_eq!(text.lines().last(), Some("7"));
}

#[test]
fn out_of_fuel_is_a_failure() {
    let o = lsq(&["eval", "--fuel", "2", &corpus("rep-driver.lsq")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn difftest_prints_a_json_report() {
    let o = lsq(&["difftest", "--seed", "3", "--count", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["count"], 5);
    assert_eq!(report["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn mini_run_prints_yields_and_result() {
    let o = lsq(&[
        "mini",
        "run",
        &mini_fixture("bucket.mini"),
        "--coroutine",
        "bucket",
        "--args",
        "[3, 1, 4]",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "yield 3\nyield 1\nyield 4\nresult ()\n");
}

#[test]
fn mini_run_with_snapshot_runs_both_copies() {
    let o = lsq(&[
        "mini",
        "run",
        &mini_fixture("bucket.mini"),
        "--coroutine",
        "bucket",
        "--args",
        "[3, 1]",
        "--snapshot-at",
        "1",
    ]);
    assert_eq!(
        stdout(&o),
        "yield 3\noriginal: yield 1\noriginal: result ()\nsnapshot: yield 1\nsnapshot: result ()\n"
    );
}

#[test]
fn mini_uncaught_exception_is_reported() {
    let o = lsq(&["mini", "run", &mini_fixture("uncaught.mini"), "--coroutine", "main"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("exception 7\n"), "{}", stdout(&o));
}

#[test]
fn mini_compile_dumps_each_view() {
    for dump in ["cfg", "segments", "entries"] {
        let o = lsq(&[
            "mini",
            "compile",
            &mini_fixture("bucket.mini"),
            "--coroutine",
            "bucket",
            "--dump",
            dump,
        ]);
        assert_eq!(o.status.code(), Some(0), "{dump}");
        assert!(!o.stdout.is_empty(), "{dump}");
    }
    let o = lsq(&["mini", "compile", &mini_fixture("bucket.mini"), "--coroutine", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runs_are_deterministic() {
    let a = lsq(&["mini", "difftest", "--seed", "11", "--count", "10"]);
    let b = lsq(&["mini", "difftest", "--seed", "11", "--count", "10"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
