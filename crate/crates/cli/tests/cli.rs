use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lbsched(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lbsched"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn stochastic_pipeline_has_pos_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(lbsched(
        d,
        &[
            "--seed",
            "3",
            "gen-stoch",
            "--n",
            "6",
            "--m",
            "4",
            "--out",
            "s.json"
        ]
    )
    .status
    .success());
    assert!(lbsched(
        d,
        &[
            "--seed",
            "3",
            "solve-stoch",
            "--in",
            "s.json",
            "--out",
            "sol.json"
        ]
    )
    .status
    .success());
    let sol = json(&d.join("sol.json"));
    assert_eq!(sol["kind"], "stoch-solution");
    assert_eq!(sol["pos"], serde_json::json!([1, 2, 4]));
    let ells: Vec<u64> = sol["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["ell"].as_u64().unwrap())
        .collect();
    assert_eq!(ells, [1, 2, 4]);
    let lambdas: Vec<u64> = sol["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["lambda"].as_u64().unwrap())
        .collect();
    assert_eq!(lambdas, [8, 4, 2]);

    let report = lbsched(d, &["report", "--in", "sol.json", "--instance", "s.json"]);
    assert!(report.status.success());
    let text = String::from_utf8(report.stdout).unwrap();
    assert!(text.contains("E[Top-l]") && text.contains("epsilon = 0.001"));
}

#[test]
fn oracle_evaluates_a_norm() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("s.json"),
        r#"{"m":2,"jobs":[{"id":"a","dist":[{"v":0,"q":0.5},{"v":2,"q":0.5}]},{"id":"b","dist":[{"v":1,"q":1}]}]}"#,
    )
    .unwrap();
    fs::write(
        d.join("a.json"),
        r#"{"assignment":[{"job":"a","machine":1},{"job":"b","machine":2}]}"#,
    )
    .unwrap();
    fs::write(d.join("w.json"), r#"{"w":[1,1]}"#).unwrap();
    let out = lbsched(
        d,
        &[
            "oracle",
            "--in",
            "s.json",
            "--assignment",
            "a.json",
            "--norm",
            "w.json",
            "--out",
            "o.json",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let o = json(&d.join("o.json"));
    assert_eq!(o["norm_expected"], 2.0);
    // Top-1 of (X_a, 1): 2 w.p. 1/2, 1 w.p. 1/2.
    assert_eq!(o["rows"][0]["expected"], 1.5);
    assert_eq!(o["rows"][0]["opt"], 1.5);
}

#[test]
fn vector_oracle_reports_sandwich() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("v.json"),
        r#"{"m":2,"d":1,"jobs":[{"id":"a","p":[3]},{"id":"b","p":[3]},{"id":"c","p":[2]}]}"#,
    )
    .unwrap();
    assert!(lbsched(d, &["oracle", "--in", "v.json", "--out", "o.json"])
        .status
        .success());
    let o = json(&d.join("o.json"));
    assert_eq!(o["lb"], 4.0);
    assert_eq!(o["opt"], 5.0);
}

#[test]
fn malformed_input_names_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("bad.json"),
        "{\n \"m\": 2,\n \"d\": 1,\n \"jobs\": [{\"id\": \"a\", \"p\": [true]}]\n}\n",
    )
    .unwrap();
    let out = lbsched(d, &["solve-vs", "--in", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("line 4") && err.contains("jobs[0].p[0]"),
        "{err}"
    );
}

#[test]
fn budget_violation_is_a_capacity_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(lbsched(
        d,
        &["gen-vs", "--n", "12", "--m", "3", "--d", "2", "--out", "v.json"]
    )
    .status
    .success());
    let out = lbsched(d, &["oracle", "--in", "v.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("531441") && err.contains("59049"), "{err}");
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = lbsched(
        d,
        &[
            "--cases",
            "40",
            "verify",
            "--sweep-cases",
            "10",
            "--out",
            "v.json",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let v = json(&d.join("v.json"));
    assert_eq!(v["total_violations"], 0);
    assert_eq!(v["suites"].as_array().unwrap().len(), 11);
    let text = String::from_utf8(lbsched(d, &["report", "--in", "v.json"]).stdout).unwrap();
    assert!(text.contains("all checks passed"));
}

#[test]
fn unknown_document_kind_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("x.json"), r#"{"kind":"mystery"}"#).unwrap();
    assert_eq!(
        lbsched(dir.path(), &["report", "--in", "x.json"])
            .status
            .code(),
        Some(2)
    );
}
