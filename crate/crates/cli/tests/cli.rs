use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn eulerian(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eulerian"))
        .args(args)
        .output()
        .expect("run eulerian")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate_files(dir: &Path, n: &str, count: &str) -> (std::path::PathBuf, std::path::PathBuf) {
    let (x, y) = (dir.join("x.txt"), dir.join("y.txt"));
    let out = eulerian(&[
        "simulate",
        "--rho2",
        "0.8,0.4",
        "--n",
        n,
        "--count",
        count,
        "--seed",
        "7",
        "--x-out",
        p(&x),
        "--y-out",
        p(&y),
        "--out",
        p(&dir.join("s.txt")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (x, y)
}

#[test]
fn estimate_json_has_stable_keys_and_all_starts() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = simulate_files(dir.path(), "12", "80");
    let out = eulerian(&[
        "estimate",
        "--population",
        p(&y),
        "--population",
        p(&x),
        "--format",
        "json",
    ]);
    let v = json(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    let at: Vec<usize> = ["\"command\"", "\"input\"", "\"report\"", "\"notes\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(at.windows(2).all(|w| w[0] < w[1]), "{at:?}");
    let report = &v["report"];
    assert_eq!(report["k"], 2);
    assert_eq!(report["n"], 12);
    assert_eq!(report["samples"], 80);
    assert_eq!(report["polynomial_degree"], 10);
    assert_eq!(report["starts"].as_array().unwrap().len(), 5);
    assert_eq!(report["converged"], true);
}

#[test]
fn template_is_reused_for_every_specimen() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = simulate_files(dir.path(), "12", "40");
    let text = std::fs::read_to_string(&x).unwrap();
    let first = text.split("\n\n").next().unwrap();
    let body = first.split_once('\n').unwrap().1;
    let template = dir.path().join("template.txt");
    std::fs::write(&template, format!("13 2 1\n{body}\n")).unwrap();
    let v = json(&eulerian(&[
        "estimate",
        "--population",
        p(&y),
        "--template",
        p(&template),
        "--format",
        "json",
    ]));
    assert_eq!(v["input"]["x_kind"], "template");
    assert_eq!(v["report"]["samples"], 40);

    // A multi-specimen file is rejected as a template.
    let out = eulerian(&["estimate", "--population", p(&y), "--template", p(&x)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn single_subset_discrimination_matches_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = simulate_files(dir.path(), "12", "60");
    let est = json(&eulerian(&[
        "estimate",
        "--population",
        p(&y),
        "--population",
        p(&x),
        "--format",
        "json",
    ]));
    let dis = json(&eulerian(&[
        "discriminate",
        "--population",
        p(&y),
        "--population",
        p(&x),
        "--schedule",
        "1-13",
        "--format",
        "json",
    ]));
    let step = &dis["discrimination"]["steps"][0]["report"];
    assert_eq!(step["rho2_hat"], est["report"]["rho2_hat"]);
    assert_eq!(step["log_likelihood"], est["report"]["log_likelihood"]);
}

#[test]
fn density_grid_rows() {
    let out = eulerian(&["density-grid", "--rho2", "0.5,0.3", "--n", "12"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 5050);
    assert!(rows.iter().all(|r| r.split_whitespace().count() == 3));

    let v = json(&eulerian(&[
        "density-grid",
        "--rho2",
        "0.5,0.3",
        "--n",
        "12",
        "--resolution",
        "3",
        "--format",
        "json",
    ]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn tailprob_reads_an_estimate_report() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = simulate_files(dir.path(), "12", "50");
    let report = dir.path().join("est.json");
    let out = eulerian(&[
        "estimate",
        "--population",
        p(&y),
        "--population",
        p(&x),
        "--format",
        "json",
        "--out",
        p(&report),
    ]);
    assert!(out.status.success());
    let v = json(&eulerian(&[
        "tailprob",
        "--estimate",
        p(&report),
        "--t",
        "0.5,0.1",
        "--format",
        "json",
    ]));
    let prob = v["probability"]["value"].as_f64().unwrap();
    assert!(prob > 0.0 && prob < 1.0, "{v}");
}

#[test]
fn series_flag_and_parity() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = simulate_files(dir.path(), "11", "15");
    let v = json(&eulerian(&[
        "estimate",
        "--population",
        p(&y),
        "--population",
        p(&x),
        "--format",
        "json",
    ]));
    assert_eq!(v["report"]["form"], "series");
    let out = eulerian(&["estimate", "--population", p(&y), "--population", p(&x), "--polynomial"]);
    assert_eq!(out.status.code(), Some(1));
}
