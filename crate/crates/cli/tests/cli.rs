use std::process::Command;

use mrball_cli::{parse_cf, parse_rate, run_with_output};

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut full = vec!["mrball"];
    full.extend_from_slice(args);
    let code = run_with_output(full, &mut out);
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn trace_row() {
    let (code, out) = run(&["trace", "--p", "3", "--q", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out, "p,q,trace,exact\n3,2,15,true\n");
}

#[test]
fn fibers_rows() {
    let (code, out) = run(&["fibers", "--max-markoff", "100"]);
    assert_eq!(code, 0);
    let rows: Vec<(String, String)> = out
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    let expected = [
        ("1", "3"),
        ("2", "3"),
        ("5", "6"),
        ("13", "6"),
        ("29", "6"),
        ("34", "6"),
        ("89", "6"),
    ];
    assert_eq!(rows.len(), expected.len());
    for ((m, s), (em, es)) in rows.iter().zip(expected) {
        assert_eq!((m.as_str(), s.as_str()), (em, es));
    }
}

#[test]
fn tailturn_json() {
    let (code, out) = run(&["tailturn", "--hmax", "1", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let row = &v[0];
    assert_eq!(row["H"], 1);
    let atoms = row["tail_from_atoms"].as_f64().unwrap();
    let gaps = row["tail_from_gaps"].as_f64().unwrap();
    assert!((atoms - 1.8808).abs() < 2e-3);
    assert!((atoms - gaps).abs() < 1e-12);
}

#[test]
fn output_is_deterministic() {
    let args = ["gaps", "--height", "4"];
    let (c1, a) = run(&args);
    let (c2, b) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert!(!a.is_empty());
    assert_eq!(a, b);

    let args = [
        "flatness",
        "montecarlo",
        "--samples",
        "100",
        "--heights",
        "30",
        "--seed",
        "5",
    ];
    assert_eq!(run(&args), run(&args));
}

#[test]
fn out_dir_receives_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    let (code, out) = run(&["ball", "--height", "3", "--out-dir", path]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    assert!(names.iter().all(|n| n.ends_with(".csv")));
}

#[test]
fn invalid_inputs_exit_one() {
    assert_eq!(
        run(&["validate", "--surface", "triple", "--x", "2", "--y", "2", "--z", "2"]).0,
        1
    );
    assert_eq!(run(&["trace", "--p", "0", "--q", "0"]).0, 1);
    assert_eq!(run(&["--bogus"]).0, 1);
    assert_eq!(run(&["fibers", "--max-markoff", "ten"]).0, 1);
    assert_eq!(run(&["--config", "/nonexistent/config.json", "validate"]).0, 1);
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn config_file_sets_height() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"height": 2}"#).unwrap();
    let (code, from_config) = run(&["--config", cfg.to_str().unwrap(), "atoms"]);
    assert_eq!(code, 0);
    let (_, from_flag) = run(&["atoms", "--height", "2"]);
    assert_eq!(from_config, from_flag);
    // Flags override the file.
    let (_, overridden) = run(&["--config", cfg.to_str().unwrap(), "atoms", "--height", "1"]);
    assert_eq!(overridden.lines().count(), 1 + 4);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_mrball");
    let ok = Command::new(bin).args(["validate"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin)
        .args(["length", "--p", "0", "--q", "0"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:"));
}

#[test]
fn argument_parsers() {
    let cf = parse_cf("0;1,2,7").unwrap();
    assert_eq!(cf.quotients.len(), 3);
    assert!(parse_cf("0;1,0").is_err());
    assert!(matches!(parse_rate("j").unwrap(), mrball_core::flatness::Rate::Growing));
    assert!(matches!(
        parse_rate("3/2").unwrap(),
        mrball_core::flatness::Rate::Fixed(_)
    ));
    assert!(parse_rate("fast").is_err());
}
