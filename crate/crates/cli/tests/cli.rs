use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_energy-space"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn gram_on_chain_is_min_matrix() {
    let v = json(&[
        "gram", "--graph", "zchain", "--base", "0", "--window", "1,2,3",
    ]);
    assert_eq!(v["schema"], "energy-space/1");
    assert_eq!(v["command"], "gram");
    assert!(v["paper_anchor"].as_str().is_some_and(|s| !s.is_empty()));
    let m = v["results"]["matrix"].as_array().unwrap();
    for (i, row) in m.iter().enumerate() {
        for (j, e) in row.as_array().unwrap().iter().enumerate() {
            assert!((e.as_f64().unwrap() - (i.min(j) + 1) as f64).abs() < 1e-9);
        }
    }
}

#[test]
fn monopole_on_chain_diverges() {
    let v = json(&[
        "monopole",
        "--graph",
        "zchain",
        "--base",
        "0",
        "--filtration",
        "box:30",
    ]);
    let trace = &v["results"]["trace"];
    assert_eq!(trace["verdict"], "divergent");
    let levels = trace["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 30);
    for l in levels {
        let k = l["level"].as_f64().unwrap();
        assert!((l["energy"].as_f64().unwrap() - (k + 1.0) / 2.0).abs() < 1e-9);
    }
}

#[test]
fn dual_recovers_triangle_from_gram_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "k3.json",
        r#"{"window": [0, 1, 2], "entries": [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]}"#,
    );
    let v = json(&["dual", "--gram-file", &path]);
    let edges = v["results"]["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 3);
    for e in edges {
        assert_eq!(e[2].as_f64().unwrap(), 1.0);
    }
    assert!(
        v["results"]["roundtrip"]["max_relative_error"]
            .as_f64()
            .unwrap()
            < 1e-12
    );
    assert_eq!(v["results"]["pass"], true);
}

#[test]
fn dual_on_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "k3.txt", "# triangle\na b 1\nb c 2\na c 3\n");
    let v = json(&["dual", "--graph", &path, "--base", "a"]);
    assert_eq!(v["results"]["base"], "a");
    assert_eq!(v["results"]["edges"].as_array().unwrap().len(), 3);
    assert_eq!(v["results"]["pass"], true);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let args = [
        "gaussian-check",
        "--graph",
        "zchain",
        "--section",
        "box:6",
        "--window",
        "1,3",
        "--samples",
        "20000",
        "--seed",
        "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["lattice", "--format", "csv"]);
    let d = run(&["lattice", "--format", "csv"]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn gaussian_check_passes() {
    let v = json(&[
        "gaussian-check",
        "--graph",
        "zchain",
        "--section",
        "box:6",
        "--window",
        "1,2",
        "--samples",
        "50000",
    ]);
    assert_eq!(v["results"]["pass"], true);
    assert_eq!(v["inputs"]["samples"], 50000);
}

#[test]
fn csv_has_level_quantity_value_rows() {
    let out = run(&[
        "monopole",
        "--graph",
        "zchain",
        "--filtration",
        "box:4",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["level", "quantity", "value"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert!(rows
        .iter()
        .any(|r| &r[0] == "2" && &r[1] == "energy" && r[2].parse::<f64>().unwrap() > 1.49));
    assert!(rows.iter().any(|r| &r[1] == "verdict"));
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(
        run(&["gram", "--graph", "zchain", "--window", "1", "--bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(
        run(&["gram", "--graph", "zchain", "--window", "x"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["gram", "--window", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["gram", "--graph", "/no/such/file", "--window", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["deficiency", "--graph", "zchain", "--lambda", "1"])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"window": [0, 1], "entries": [[1, 1], [1, 1]]}"#,
    );
    assert_eq!(run(&["dual", "--gram-file", &bad]).status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn every_subcommand_reports() {
    let cases: &[&[&str]] = &[
        &[
            "dipole",
            "--graph",
            "zchain",
            "--window",
            "2",
            "--section",
            "box:4",
        ],
        &["reconstruct", "--graph", "star:4", "--window", "0,1,2"],
        &["harmonic", "--graph", "geom:2", "--filtration", "box:30"],
        &["deficiency", "--graph", "zchain", "--filtration", "box:10"],
        &[
            "boundary",
            "--graph",
            "zd:2",
            "--vertex",
            "(1,0)",
            "--filtration",
            "box:5",
        ],
        &[
            "indicator",
            "--graph",
            "zd:2",
            "--filtration",
            "box:4",
            "--window",
            "(1,0)",
        ],
        &["lattice", "--window", "4,1"],
    ];
    for args in cases {
        let v = json(args);
        assert_eq!(v["command"], args[0]);
        assert!(v["inputs"].is_object() && v["tolerances"].is_object() && v["results"].is_object());
    }
}
