use std::process::{Command, Output};

use serde_json::Value;

fn eeprb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eeprb")).args(args).output().unwrap()
}

fn data_lines(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(table: &[Vec<String>], name: &str) -> Vec<String> {
    let i = table[0].iter().position(|c| c == name).unwrap();
    table[1..].iter().map(|r| r[i].clone()).collect()
}

#[test]
fn sweep_without_identification_tracks_classical_curve() {
    let out = eeprb(&["sweep", "--ident", "none", "--pairs", "40000", "--grid-points", "9"]);
    assert!(out.status.success());
    let table = data_lines(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(table.len(), 10);
    let theta = column(&table, "theta");
    let k12 = column(&table, "K12");
    for (t, k) in theta.iter().zip(&k12) {
        let (t, k): (f64, f64) = (t.parse().unwrap(), k.parse().unwrap());
        assert!((k + 0.5 * (2.0 * t).cos()).abs() < 5.0 / 200.0, "theta={t} K12={k}");
    }
    // nothing is filtered, so E equals K
    assert_eq!(column(&table, "E12"), k12);
}

#[test]
fn sweep_with_identification_tracks_singlet() {
    let out = eeprb(&["sweep", "--window", "1", "--pairs", "200000", "--grid-points", "5"]);
    assert!(out.status.success());
    let table = data_lines(&String::from_utf8(out.stdout).unwrap());
    for ((t, e), n) in column(&table, "theta").iter().zip(column(&table, "E12")).zip(column(&table, "n_coincident")) {
        let (t, e, n): (f64, f64, f64) = (t.parse().unwrap(), e.parse().unwrap(), n.parse().unwrap());
        assert!((e + (2.0 * t).cos()).abs() < 0.05 + 5.0 / n.sqrt(), "theta={t} E12={e}");
    }
}

#[test]
fn files_are_reproducible_and_json_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let args = ["sweep", "--pairs", "3000", "--grid-points", "4", "--seed", "11", "--topology", "eprb"];
    for name in ["a.csv", "b.csv"] {
        assert!(eeprb(&[&args[..], &["--out", &path(name)]].concat()).status.success());
    }
    assert!(eeprb(&[&args[..], &["--out", &path("c.json"), "--format", "json"]].concat()).status.success());
    let a = std::fs::read(path("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(path("b.csv")).unwrap());

    let csv = String::from_utf8(a).unwrap();
    assert!(csv.contains("# seed: 11"));
    let table = data_lines(&csv);
    // EPRB has no S3/S4
    assert!(column(&table, "K13").iter().all(|v| v == "NA"));
    assert!(column(&table, "oracle_E34").iter().all(|v| v == "NA"));

    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path("c.json")).unwrap()).unwrap();
    let cols: Vec<&str> = doc["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(cols, table[0].iter().map(String::as_str).collect::<Vec<_>>());
    for (row, csv_row) in doc["rows"].as_array().unwrap().iter().zip(&table[1..]) {
        for (v, c) in row.as_array().unwrap().iter().zip(csv_row) {
            if c == "NA" {
                assert!(v.is_null());
            } else {
                assert_eq!(v.as_f64().unwrap(), c.parse::<f64>().unwrap());
            }
        }
    }
    assert_eq!(doc["header"]["seed"], "11");
}

#[test]
fn oracle_prints_curves_only() {
    let out = eeprb(&["oracle", "--grid-points", "3", "--source", "parallel"]);
    assert!(out.status.success());
    let table = data_lines(&String::from_utf8(out.stdout).unwrap());
    assert!(column(&table, "K12").iter().all(|v| v == "NA"));
    let e: Vec<f64> = column(&table, "oracle_E12").iter().map(|v| v.parse().unwrap()).collect();
    // flipped sign: +cos 2θ at θ = 0, π/2, π
    for (got, want) in e.iter().zip([1.0, -1.0, 1.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn run_accepts_degrees() {
    let out = eeprb(&["run", "--a", "deg:45", "--pairs", "1000", "--format", "json"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let a = doc["rows"][0][1].as_f64().unwrap();
    assert!((a - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["run", "--pairs", "0"][..],
        &["sweep", "--gamma", "0.5"],
        &["sweep", "--law", "learning"],
        &["sweep", "--p", "0.1", "--q", "0.2"],
        &["sweep", "--source", "fixed"],
        &["sweep", "--eta", "2"],
        &["sweep", "--format", "xml"],
        &["frobnicate"],
        &["run", "--pairs", "10", "--out", "/nonexistent-dir/out.csv"],
    ] {
        let out = eeprb(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?} printed no diagnostic");
    }
    assert_eq!(eeprb(&["--help"]).status.code(), Some(0));
    assert_eq!(eeprb(&["--version"]).status.code(), Some(0));
}

#[test]
fn validate_reports_each_criterion() {
    let out = eeprb(&["validate", "--only", "10", "--only", "8", "--pairs", "2000", "--grid-points", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS] 10 oracle self-consistency"));
    assert!(text.contains("[PASS]  8 single-run CHSH bound"));

    // a tiny workload cannot identify enough pairs for the ratio bands
    let out = eeprb(&["validate", "--only", "3", "--pairs", "200", "--grid-points", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().contains("[FAIL]  3"));
}
