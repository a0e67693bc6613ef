use std::path::Path;
use std::process::{Command, Output};

use argprin::Report;

fn argprin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_argprin")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn lists_builtins() {
    let out = argprin(&["run", "--list-builtins"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in argprin::builtins::ids() {
        assert!(text.lines().any(|l| l == id), "{id} missing");
    }
}

#[test]
fn example2_report_round_trips_and_rank_map_is_one_colour() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = argprin(&["run", "builtin:example2", "--out", d, "--grid", "64,32"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let text = std::fs::read_to_string(dir.path().join("example2.json")).unwrap();
    let r = Report::from_json(&text).unwrap();
    assert_eq!(r.to_json(), text);
    assert_eq!(r.metrics["max_rank"], 1.0);

    let svg = std::fs::read_to_string(dir.path().join("example2.rank.svg")).unwrap();
    let cells = svg.split("<g shape-rendering=\"crispEdges\">").nth(1).unwrap().split("</g>").next().unwrap();
    let fills: std::collections::BTreeSet<&str> = cells.lines().filter_map(|l| l.split("fill=\"").nth(1)).collect();
    assert_eq!(fills.len(), 1, "{fills:?}");

    let csv = std::fs::read_to_string(dir.path().join("example2.rank.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("point_index,psi,t_index,value"));
    assert!(lines.all(|l| l.ends_with(",1")));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = argprin(&["run", "builtin:ap_suite", "--out", d.path().to_str().unwrap(), "--formats", "json"]);
        assert!(out.status.success());
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("ap_suite.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn missing_field_is_named_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", r#"{"schema_version": 1, "id": "bad"}"#);
    let out = argprin(&["run", &p, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("kind"), "{err}");
}

#[test]
fn invalid_value_is_named_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bad.json",
        r#"{"schema_version": 1, "id": "bad", "kind": "argument-principle", "grid": {"boundary": 100}, "argument": {}}"#,
    );
    let out = argprin(&["run", &p, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("grid.boundary"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(argprin(&["run", "builtin:ap_suite", "--out", d, "--tol", "bogus=1"]).status.code(), Some(2));
    assert_eq!(argprin(&["run", "builtin:ap_suite", "--out", d, "--formats", "pdf"]).status.code(), Some(2));
    assert_eq!(argprin(&["run", "builtin:ap_suite", "--out", d, "--grid", "64"]).status.code(), Some(2));
    assert_eq!(argprin(&["run", "builtin:nonexistent", "--out", d]).status.code(), Some(2));
    assert_eq!(argprin(&["run"]).status.code(), Some(2));
}

#[test]
fn failed_expectation_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "wrong.json",
        r#"{"schema_version": 1, "id": "wrong", "kind": "argument-principle",
            "argument": {"counts": [{"phi": "zeta^2", "expected": 3}]}}"#,
    );
    let out = argprin(&["run", &p, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAILED expect.count.0"));
}

#[test]
fn tolerance_override_reaches_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = argprin(&["run", "builtin:ap_suite", "--out", dir.path().to_str().unwrap(), "--tol", "rank=1e-9", "--jobs", "1"]);
    assert!(out.status.success());
    let r = Report::from_json(&std::fs::read_to_string(dir.path().join("ap_suite.json")).unwrap()).unwrap();
    assert_eq!(r.provenance.tolerances["rank"], 1e-9);
}
