use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn qjets(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qjets")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

#[test]
fn check_reports_all_predicates() {
    let out = qjets(&["check", &data("pair.json"), "--dim", "2,1"]);
    assert!(out.status.success());
    let r = json(&out);
    for key in ["totally_negative", "property_P", "fundamental_domain", "simple_exists", "bridges", "quiver_hash"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["property_P"], true);
    assert_eq!(r["params"]["dim"]["v1"], 2);
}

#[test]
fn reports_are_deterministic() {
    let args = ["count", &data("triangle.json"), "--dim", "1,1,1", "--q", "2", "--n", "2"];
    let a = qjets(&args);
    let b = qjets(&[&args[..], &["--threads", "1"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let records = json(&a)["records"].as_array().unwrap().clone();
    assert_eq!(records[0]["count"], "28");
    assert_eq!(records[1]["count"], "592");
}

#[test]
fn count_csv_has_three_rows() {
    let out = qjets(&["count", &data("a2.json"), "--dim", "1,1", "--q", "2", "--n", "3", "--emit", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, ["n,count,normalized_num,normalized_den", "1,3,3,2", "2,8,2,1", "3,20,5,2"]);
}

#[test]
fn csv_is_refused_for_nested_reports() {
    let out = qjets(&["check", &data("a2.json"), "--dim", "1,1", "--emit", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn errors_carry_codes() {
    let out = qjets(&["check", &data("a2.json"), "--dim", "w=1"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "unknown_vertex");

    let dir = tempfile::tempdir().unwrap();
    let dup = dir.path().join("dup.json");
    std::fs::write(&dup, r#"{"vertices": ["v", "v"], "arrows": []}"#).unwrap();
    let out = qjets(&["check", dup.to_str().unwrap(), "--dim", "1,1"]);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "invalid_quiver");

    let out = qjets(&["count", &data("s2.json"), "--dim", "1", "--q", "4", "--n", "1"]);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "not_prime");
}

#[test]
fn types_and_aux() {
    let r = json(&qjets(&["types", &data("s2.json"), "--dim", "2"]));
    assert_eq!(r["count"], 3);
    let r = json(&qjets(&["aux", &data("s2.json"), "--type", &data("s2_type.json")]));
    assert_eq!(r["totally_negative"], true);
    assert_eq!(r["aux_quiver"]["arrows"].as_array().unwrap().len(), 2 + 2 + 2);
    let inline = r#"[{"dim": {"v": 1}, "mult": 2}]"#;
    let r = json(&qjets(&["aux", &data("s2.json"), "--type", inline]));
    assert_eq!(r["e"]["1"], 2);
    assert_eq!(r["aux_quiver"]["arrows"].as_array().unwrap().len(), 2);
}

#[test]
fn bounds_assert_the_lemmas() {
    let out = qjets(&["bounds", &data("pair.json"), "--dim", "2,1", "--loop-lemma", "2,4", "--ledger", "4"]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["totneg_lemma"]["verdict"], true);
    assert_eq!(r["loop_lemma"]["verdict"], true);
    let r = json(&qjets(&["bounds", &data("a2.json"), "--dim", "1,1"]));
    assert!(r["totneg_lemma"]["skipped"].is_string());
}

#[test]
fn cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("counts.jsonl");
    let args = ["count", &data("a2.json"), "--dim", "1,1", "--q", "3", "--n", "2", "--cache", cache.to_str().unwrap()];
    let a = qjets(&args);
    let lines = std::fs::read_to_string(&cache).unwrap().lines().count();
    let b = qjets(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(lines, 2);
    assert_eq!(std::fs::read_to_string(&cache).unwrap().lines().count(), 2);
}

#[test]
fn mpa_count_jordan() {
    let dir = tempfile::tempdir().unwrap();
    let jordan = dir.path().join("jordan.json");
    std::fs::write(&jordan, r#"{"vertices": ["v"], "arrows": [{"src": "v", "tgt": "v"}]}"#).unwrap();
    let j = jordan.to_str().unwrap();
    let r = json(&qjets(&["mpa-count", j, "--dim", "1", "--q", "5", "--alpha", "v=1"]));
    assert_eq!(r["count"], "21");
    let r = json(&qjets(&["mpa-count", j, "--dim", "1", "--q", "5", "--alpha", "2", "--order", "0"]));
    assert_eq!(r["count"], "0");
}

#[test]
fn extquiver_verdicts() {
    let out = qjets(&["extquiver", "--gram", "[[0]]", "--vectors", "(0,(1),1);(0,(2),2)"]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["verdict"], false);
    let r = json(&qjets(&["extquiver", "--vectors", "(1,(),-1);(2,(),-2)", "--check-gloop", "2", "--m", "1,2"]));
    assert_eq!(r["verdict"], true);
    assert_eq!(r["gloop_check"]["equal"], true);
    let out = qjets(&["extquiver", "--gram", "[[1]]", "--vectors", "(0,(1),0)"]);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "odd_loop_count");
}

#[test]
fn manifest_replays() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("run.json");
    let report = dir.path().join("report.json");
    let out = qjets(&[
        "count",
        &data("a2.json"),
        "--dim",
        "1,1",
        "--q",
        "2",
        "--n",
        "2",
        "--out",
        report.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["command"], "count");
    assert_eq!(m["inputs"].as_array().unwrap().len(), 1);
    let out = qjets(&["replay", manifest.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["assertions"]["output_matches"], true);
}

#[test]
fn suite_desk_exits_zero() {
    let out = qjets(&["suite", "--level", "desk"]);
    let lines = String::from_utf8_lossy(&out.stderr);
    assert!(out.status.success(), "{lines}");
    assert_eq!(lines.lines().filter(|l| l.starts_with("[PASS]")).count(), 13);
    assert_eq!(json(&out)["passed"], true);
}
