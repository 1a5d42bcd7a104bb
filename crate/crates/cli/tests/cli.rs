use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bergcomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergcomp")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, file: &str, body: &str) -> String {
    let path = dir.join(file);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn record<'a>(doc: &'a Value, name: &str) -> &'a Value {
    doc["records"].as_array().unwrap().iter().find(|r| r["criterion"] == name).unwrap()
}

#[test]
fn identity_criteria_match_known_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "id.toml",
        "name = \"id\"\ndelta = 3.0\ncriteria = [\"order_bounded\", \"bounded\"]\n",
    );
    let out = dir.path().join("out");
    let o = bergcomp(&["criteria", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&out.join("id/criteria.json"));
    assert_eq!(record(&doc, "order_bounded")["result"]["verdict"], "fails");
    assert_eq!(record(&doc, "bounded")["result"]["verdict"], "holds");
    assert_eq!(doc["config"]["phi"], "identity");
    assert_eq!(doc["config"]["quad"]["rings"], 48);
    let csv = std::fs::read_to_string(out.join("id/criteria.csv")).unwrap();
    assert!(csv.starts_with("criterion,re,im,value,error_estimate,verdict\n"));
}

#[test]
fn constant_symbol_is_order_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "name = \"c\"\nphi = \"constant:0.3\"\ncriteria = [\"order_bounded\"]\n");
    let out = dir.path().join("out");
    let o = bergcomp(&["criteria", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc = read_json(&out.join("c/criteria.json"));
    assert_eq!(record(&doc, "order_bounded")["result"]["verdict"], "holds");
}

#[test]
fn p_above_q_is_recorded_per_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "g.toml",
        "name = \"g\"\np = 3.0\nq = 2.0\nphi = \"scaling:0.5\"\ncriteria = [\"order_bounded\", \"bounded\"]\n",
    );
    let out = dir.path().join("out");
    let o = bergcomp(&["criteria", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc = read_json(&out.join("g/criteria.json"));
    let bounded = record(&doc, "bounded");
    assert_eq!(bounded["status"], "error");
    assert!(bounded["error"].as_str().unwrap().contains("unsupported regime"));
    assert_eq!(record(&doc, "order_bounded")["status"], "ok");
}

#[test]
fn essnorm_refuses_unbounded_operators() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "u.toml", "name = \"u\"\np = 3.0\nq = 2.0\n");
    let out = dir.path().join("out");
    let o = bergcomp(&["essnorm", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("boundedness"));
    let doc = read_json(&out.join("u/essnorm.json"));
    assert!(doc["refused"].is_string());
    assert_eq!(doc["boundedness"]["status"], "error");
}

#[test]
fn essnorm_records_heuristic_delta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.toml",
        "name = \"s\"\nphi = \"scaling:0.5\"\n",
    );
    let out = dir.path().join("out");
    let o = bergcomp(&["essnorm", "--config", &cfg, "--out", out.to_str().unwrap(), "--workers", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&out.join("s/essnorm.json"));
    assert_eq!(doc["delta"]["basis"], "heuristic");
    assert!(doc["delta"]["delta"].as_f64().unwrap() >= 2.0);
    assert_eq!(doc["essential_norm"]["verdict"], "holds");
    assert_eq!(doc["classifications_agree"], true);
    let rows = std::fs::read_to_string(out.join("s/essnorm.csv")).unwrap();
    assert_eq!(rows.lines().count(), 15);
}

#[test]
fn undecided_integral_gives_exit_code_two() {
    // (1 - |z|)^{-1}-type growth sits on the divergence boundary
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.toml",
        "name = \"b\"\nweight = \"standard:alpha=0\"\ntarget_weight = \"standard:alpha=1\"\ncriteria = [\"order_bounded\"]\n",
    );
    let out = dir.path().join("out");
    let o = bergcomp(&["criteria", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn weight_table_errors_name_the_row() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("w.csv"), "r,omega\n0.0,1.0\n0.5,-2.0\n").unwrap();
    let cfg = write_config(dir.path(), "t.toml", "name = \"t\"\nweight = \"table:w.csv\"\n");
    let out = dir.path().join("out");
    let o = bergcomp(&["weight-report", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 2"), "{err}");
}

#[test]
fn bad_config_key_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k.toml", "name = \"k\"\ngrid.angels = 3\n");
    let o = bergcomp(&["criteria", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("angels"));
}

#[test]
fn weight_report_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "w.toml", "name = \"w\"\ntarget_weight = \"standard:alpha=2\"\n");
    let out = dir.path().join("out");
    let o = bergcomp(&["weight-report", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc = read_json(&out.join("w/weight_report.json"));
    let source = &doc["weights"][0]["report"];
    assert_eq!(source["verdict"]["in_d"], true);
    assert!((source["upper_constant"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(doc["weights"][1]["role"], "target");
    let schema = read_json(&out.join("csv_schema.json"));
    let header = std::fs::read_to_string(out.join("w/weight_report.csv")).unwrap();
    let cols: Vec<&str> = schema["weight_report.csv"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(header.lines().next().unwrap(), cols.join(","));
}

#[test]
fn command_line_overrides_reach_the_embedded_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "o.toml", "name = \"o\"\ncriteria = [\"order_bounded\"]\n");
    let out = dir.path().join("out");
    let o = bergcomp(&[
        "criteria",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--quad.rings",
        "30",
        "--quad.relerr",
        "1e-5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc = read_json(&out.join("o/criteria.json"));
    assert_eq!(doc["config"]["quad"]["rings"], 30);
    assert_eq!(doc["config"]["quad"]["relerr"], 1e-5);
}

#[test]
fn batch_runs_every_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a.toml", "name = \"a\"\ncriteria = [\"order_bounded\"]\n");
    let b = write_config(dir.path(), "b.toml", "name = \"b\"\nphi = \"scaling:0.5\"\ncriteria = [\"order_bounded\"]\n");
    let out = dir.path().join("out");
    let o = bergcomp(&["criteria", "--config", &a, "--config", &b, "--out", out.to_str().unwrap(), "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("a/criteria.json").exists() && out.join("b/criteria.json").exists());
    let dup = bergcomp(&["criteria", "--config", &a, "--config", &a, "--out", out.to_str().unwrap()]);
    assert_eq!(dup.status.code(), Some(1));
}
