use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn heatlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatlab"))
        .args(args)
        .current_dir(dir)
        .env("HEATLAB_THREADS", "2")
        .output()
        .expect("spawn heatlab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn line_graph(dir: &Path) {
    let o = heatlab(dir, &["build", "lattice", "--dim", "1", "--radius", "50", "--b", "1", "--m", "1", "-o", "z.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

/// CSV rows after the stamp line and the header.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(2).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn builds_report_their_size() {
    let dir = tempfile::tempdir().unwrap();
    line_graph(dir.path());
    let g: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("z.json")).unwrap()).unwrap();
    assert_eq!(g["vertices"].as_array().unwrap().len(), 101);
    assert_eq!(g["edges"].as_array().unwrap().len(), 100);
    assert!(g["meta"]["config_hash"].is_string());

    let o = heatlab(dir.path(), &["build", "anti-tree", "--gamma", "0.5", "--levels", "4", "-o", "at.json"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("6 vertices"), "{}", stdout(&o));

    let o = heatlab(dir.path(), &["build", "anti-tree", "--levels", "4", "-o", "at.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--gamma"));

    let o = heatlab(dir.path(), &["build", "lattice", "--dim", "1", "--radius", "3", "--b", "-1", "-o", "bad.json"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn custom_graph_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("e.csv"), "u,v,b\na,b,2\nb,c,0.5\n").unwrap();
    fs::write(dir.path().join("m.csv"), "id,m\na,1\nb,2\nc,3\n").unwrap();
    let o = heatlab(dir.path(), &["build", "custom", "--edges", "e.csv", "--measures", "m.csv", "-o", "c.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("3 vertices, 2 edges"));
    let o = heatlab(dir.path(), &["build", "custom", "--edges", "e.csv", "-o", "c1.json"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn kernel_matches_the_line_oracle() {
    let dir = tempfile::tempdir().unwrap();
    line_graph(dir.path());
    let o = heatlab(dir.path(), &["kernel", "z.json", "--t", "1", "--x", "0", "--y", "0"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("# heatlab "));
    assert_eq!(text.lines().nth(1), Some("t,x_id,y_id,value,log_value,backend,radius"));
    let r = rows(&text);
    assert_eq!(r.len(), 1);
    let v: f64 = r[0][3].parse().unwrap();
    assert!((v - 0.308508322553671).abs() < 1e-9, "{v}");

    let o = heatlab(dir.path(), &["kernel", "z.json", "--t", "0", "--x", "0,1", "--y", "0,1"]);
    let r = rows(&stdout(&o));
    let vals: Vec<f64> = r.iter().map(|row| row[3].parse().unwrap()).collect();
    assert_eq!(vals, [1.0, 0.0, 0.0, 1.0]);
}

#[test]
fn kernel_without_times_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    line_graph(dir.path());
    assert_eq!(code(&heatlab(dir.path(), &["kernel", "z.json"])), 1);
    assert_eq!(code(&heatlab(dir.path(), &["kernel", "missing.json", "--t", "1"])), 1);
}

#[test]
fn metric_csv_has_the_jump_stamp() {
    let dir = tempfile::tempdir().unwrap();
    line_graph(dir.path());
    let o = heatlab(dir.path(), &["metric", "z.json", "--kind", "path-degree", "--S", "1", "--x", "0", "--y", "3"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().contains("metric=path-degree jump=1"));
    let r = rows(&text);
    let d: f64 = r[0][2].parse().unwrap();
    assert!((d - 3.0 / 2f64.sqrt()).abs() < 1e-12, "{d}");
}

#[test]
fn verify_universal_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    line_graph(dir.path());
    let args = [
        "verify", "universal", "--graph", "z.json", "--metric", "path-degree", "--S", "1", "--tmin", "0.1", "--tmax", "50",
        "--max-vertices", "12", "--out", "run",
    ];
    let o = heatlab(dir.path(), &args);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let json1 = fs::read(dir.path().join("run/universal.json")).unwrap();
    let csv1 = fs::read(dir.path().join("run/universal.csv")).unwrap();
    let v: Value = serde_json::from_slice(&json1).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(v["reports"][0]["violation_count"], 0);
    assert_eq!(
        String::from_utf8_lossy(&csv1).lines().nth(1),
        Some("campaign,t,x,y,lhs_log,rhs_log,ratio_log")
    );

    let o = heatlab(dir.path(), &args);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(dir.path().join("run/universal.json")).unwrap(), json1);
    assert_eq!(fs::read(dir.path().join("run/universal.csv")).unwrap(), csv1);

    let o = heatlab(dir.path(), &["report", "run/universal.json"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("universal: PASS"));
}

#[test]
fn combinatorial_metric_is_a_precondition_failure() {
    let dir = tempfile::tempdir().unwrap();
    line_graph(dir.path());
    let o = heatlab(dir.path(), &["verify", "universal", "--graph", "z.json", "--metric", "combinatorial", "--t", "1", "--out", "run"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("intrinsic"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn violations_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    line_graph(dir.path());
    // a constant cap far below what the Gaussian form needs
    let o = heatlab(
        dir.path(),
        &["verify", "g", "--graph", "z.json", "--S", "1", "--n", "1", "--c-max", "0.01", "--t", "1,4", "--x", "0,5", "--y", "0,5"],
    );
    assert_eq!(code(&o), 2, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("VIOLATION"));
    assert_eq!(code(&heatlab(dir.path(), &["report", "g.json"])), 2);
}

#[test]
fn verify_lemma_writes_a_gap_table() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("e.csv"),
        "u,v,b\n0,1,1.5\n1,2,0.7\n2,3,2.0\n3,0,1.1\n1,3,0.4\n3,4,1.0\n",
    )
    .unwrap();
    let o = heatlab(dir.path(), &["build", "custom", "--edges", "e.csv", "-o", "g.json"]);
    assert_eq!(code(&o), 0);
    let o = heatlab(dir.path(), &["verify", "lemma", "--graph", "g.json", "--S", "1"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("lemma.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("x_id,y_id,rho_s,rho_e,lower_gap,upper_gap"));
    assert_eq!(rows(&csv).len(), 10);
}

#[test]
fn config_files_drive_campaigns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "graph": {"builder": "lattice", "dim": 2, "radius": 3, "conductance": {"rule": "iid", "lo": 1, "hi": 2, "seed": 7}},
        "bound": {"kind": "semigroup"},
        "grid": {"times": [0.5, 2], "tmin": 0.1, "tmax": 1, "per_decade": 2, "sources": null, "targets": null, "max_vertices": 4},
        "output": {"dir": "out", "prefix": "sg"}
    }"#;
    fs::write(dir.path().join("c.json"), cfg).unwrap();
    let o = heatlab(dir.path(), &["verify", "semigroup", "--config", "c.json"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("out/sg.csv").exists());
    // the config names a different campaign
    assert_eq!(code(&heatlab(dir.path(), &["verify", "universal", "--config", "c.json"])), 1);
    fs::write(dir.path().join("bad.json"), r#"{"bound": {"kind": "semigroup", "colour": 1}}"#).unwrap();
    assert_eq!(code(&heatlab(dir.path(), &["verify", "semigroup", "--config", "bad.json"])), 1);
}
