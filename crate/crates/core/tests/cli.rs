//! End-to-end runs of the binary.

use std::process::Command;

fn qkflag(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qkflag"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn strip_timing(mut v: serde_json::Value) -> serde_json::Value {
    v["summary"]["wall_time_ms"] = 0.into();
    for r in v["results"].as_array_mut().unwrap() {
        r["wall_time_ms"] = 0.into();
    }
    v
}

#[test]
fn rank_one_everything_passes() {
    let out = qkflag(&["--n", "1", "--qdeg", "3", "--checks", "*"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["failed"], 0);
    assert_eq!(v["summary"]["passed"], v["summary"]["total"]);
    assert_eq!(v["config"]["n"], 1);
}

#[test]
fn whitney_families_pass_at_rank_two() {
    let out = qkflag(&["--n", "2", "--qdeg", "3", "--checks", "whitney*"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "whitney1/k=1",
            "whitney1/k=2",
            "whitney2/k=1",
            "whitney2/k=2",
            "whitney3"
        ]
    );
    for r in v["results"].as_array().unwrap() {
        assert_eq!(r["status"], "pass");
        assert_eq!(r["residual"], "");
        assert!(r["params"].is_object());
    }
}

#[test]
fn unknown_selector_is_an_error() {
    let out = qkflag(&["--n", "2", "--checks", "nonexistent"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("nonexistent") && err.contains("presentation"));
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (p, jobs) in [(&a, "1"), (&b, "4")] {
        let out = qkflag(&[
            "--checks",
            "borel*,lemma*",
            "--jobs",
            jobs,
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |p: &std::path::Path| {
        strip_timing(serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap())
    };
    assert_eq!(read(&a), read(&b));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "n=1\nqdeg=2\nchecks=quantum_inverse*\nformat=md\n").unwrap();
    let out = qkflag(&["--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["D"], 2);
    assert_eq!(v["summary"]["total"], 1);
}

#[test]
fn markdown_report() {
    let out = qkflag(&["--n", "1", "--checks", "rank1_oracle", "--format", "md"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("| rank1_oracle | pass |"));
}

#[test]
fn unwritable_output_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("r.json");
    let out = qkflag(&[
        "--n",
        "1",
        "--checks",
        "rank1_oracle",
        "--out",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_rank_and_degree_are_rejected() {
    assert_eq!(qkflag(&["--n", "5"]).status.code(), Some(2));
    assert_eq!(qkflag(&["--n", "0"]).status.code(), Some(2));
    assert_eq!(qkflag(&["--qdeg", "0"]).status.code(), Some(2));
}

#[test]
fn list_and_dumps() {
    let out = qkflag(&["--n", "1", "--list-checks"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "edge_equivalence"));

    let out = qkflag(&["--n", "2", "--dump-qbg"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["vertices"].as_array().unwrap().len(), 8);

    let out = qkflag(&["--dump-chain", "-1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["chain"]["steps"].as_array().unwrap().len(), 1);
    assert_eq!(v["chain"]["steps"][0]["level"], 1);
}
