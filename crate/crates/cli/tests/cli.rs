use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ktaxi(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ktaxi")).current_dir(dir).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn lowerbound(dir: &Path) {
    let o = ktaxi(dir, &["lowerbound", "--family", "tree", "--k", "2", "--d", "2", "--out", "lb.json"]);
    assert!(o.status.success());
}

#[test]
fn lowerbound_simulate_offline() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    lowerbound(p);
    let pred: Value = serde_json::from_str(&fs::read_to_string(p.join("lb.prediction.json")).unwrap()).unwrap();
    assert_eq!(pred["dc_cost"], 7);
    assert_eq!(pred["opt_cost"], 1);

    let tr = json(&ktaxi(p, &["simulate", "lb.json"]));
    assert_eq!(tr["format"], "trace/v1");
    let cost = tr["cost_up"].as_i64().unwrap() + tr["cost_down"].as_i64().unwrap();
    assert_eq!(cost, 7);

    for oracle in ["flow", "dp"] {
        let off = json(&ktaxi(p, &["offline", "lb.json", "--oracle", oracle]));
        assert_eq!(off["opt_cost"], 1, "{oracle}");
    }
    let csv = ktaxi(p, &["simulate", "lb.json", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("request,kind,s,d,steps,cost_up,cost_down"));
}

#[test]
fn verify_dual_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    lowerbound(p);
    assert!(ktaxi(p, &["simulate", "lb.json", "--out", "tr.json"]).status.success());
    let r = json(&ktaxi(p, &["verify-dual", "tr.json", "--cert-out", "c.json"]));
    assert_eq!(r["passed"], true);
    assert_eq!(r["weak_duality"], true);
    let again = json(&ktaxi(p, &["verify-dual", "tr.json", "--cert", "c.json"]));
    assert_eq!(again["d"], r["d"]);
    let b = json(&ktaxi(p, &["verify-dual", "tr.json", "--mode", "banded"]));
    assert_eq!(b["mode"], "banded");
    assert_eq!(b["passed"], true);

    // a tampered trace is rejected before any certificate is built
    let mut t: Value = serde_json::from_str(&fs::read_to_string(p.join("tr.json")).unwrap()).unwrap();
    t["cost_up"] = Value::from(t["cost_up"].as_i64().unwrap() + 1);
    fs::write(p.join("bad.json"), t.to_string()).unwrap();
    assert_eq!(ktaxi(p, &["verify-dual", "bad.json"]).status.code(), Some(2));
}

#[test]
fn tables_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = ktaxi(dir.path(), &["tables", "--k-max", "3", "--d-max", "2", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,d,c_kd,depth,m,big_m"));
    assert!(lines.any(|l| l.starts_with("3,2,")));
}

#[test]
fn metric_commands() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(
        p.join("m.json"),
        r#"{"format":"metric/v1","points":["a","b","c","d"],"dist":[[0,2,3,4],[2,0,1,2],[3,1,0,1],[4,2,1,0]]}"#,
    )
    .unwrap();
    fs::write(
        p.join("r.json"),
        r#"{"initial_positions":[0,3],"requests":[{"type":"simple","s":1},{"type":"relocate","s":1,"d":2},{"type":"simple","s":0}]}"#,
    )
    .unwrap();
    let e = json(&ktaxi(p, &["embed", "m.json", "--depth", "2", "--seed", "4"]));
    assert_eq!(e["leaf_of"].as_array().unwrap().len(), 4);
    assert!(e["max_stretch"].as_f64().unwrap() >= 1.0);
    let s = json(&ktaxi(p, &["embed", "m.json", "--trials", "10"]));
    assert_eq!(s["seeds"], 10);
    let rows = json(&ktaxi(p, &["run-metric", "m.json", "r.json", "--trials", "3"]));
    for r in rows.as_array().unwrap() {
        assert_eq!(r["move_violations"], 0);
        assert!(r["metric_cost"].as_i64() <= r["hst_cost"].as_i64());
    }
}

#[test]
fn experiment_flags_and_spec() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let rep = json(&ktaxi(p, &["experiment", "--kind", "duality-audit", "--grid", "2:2,3:2", "--trials", "2"]));
    assert_eq!(rep["summary"]["trials"], 4);
    assert_eq!(rep["summary"]["failed"], 0);

    fs::write(p.join("spec.json"), serde_json::to_string(&rep["spec"]).unwrap()).unwrap();
    let again = json(&ktaxi(p, &["experiment", "--spec", "spec.json"]));
    assert_eq!(again["rows"], rep["rows"]);

    let o = ktaxi(p, &["experiment", "--kind", "upper-bound-sweep", "--grid", "2:2", "--trials", "2", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 3);
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(ktaxi(p, &["experiment", "--grid", "2:2"]).status.code(), Some(2));
    assert_eq!(ktaxi(p, &["simulate", "missing.json"]).status.code(), Some(2));
    assert_eq!(ktaxi(p, &["experiment", "--kind", "duality-audit", "--grid", "2"]).status.code(), Some(2));
    assert!(!ktaxi(p, &["lowerbound", "--family", "tree", "--k", "2", "--d", "2", "--alpha", "3"]).status.success());
}
