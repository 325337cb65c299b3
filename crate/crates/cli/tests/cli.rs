use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bellcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn bellcheck_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellcheck"))
        .args(args)
        .env("BELLCHECK_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_json_reparses_to_same_chsh_fields() {
    let out = bellcheck(&[
        "run",
        "--model",
        "dice-coin",
        "--n",
        "20000",
        "--seed",
        "11",
    ]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let report: bellcheck_core::report::RunReport = serde_json::from_str(&text).unwrap();
    assert_eq!(bellcheck_core::report::to_json(&report), text);
    let direct = bellcheck_core::report::run_report(&bellcheck_core::report::RunSpec::new(
        "dice-coin",
        20000,
        11,
    ))
    .unwrap();
    assert_eq!(report.chsh, direct.chsh);
    assert!(report.chsh.s_star.abs() <= 3.0 * 4.0 * report.chsh.hoeffding_epsilon);
    assert!(report.mi.unwrap().diagnostic.holds);
}

#[test]
fn identical_config_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.json");
    std::fs::write(
        &config,
        r#"{"model": "cosine-sign", "n_per_series": 5000, "seed": 42, "format": "csv"}"#,
    )
    .unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    for (out, threads) in [(&first, "1"), (&second, "3")] {
        let status = bellcheck_with_threads(
            &["run", "--config", path_arg(&config), "--out", path_arg(out)],
            threads,
        );
        assert!(status.status.success());
    }
    let a = std::fs::read(&first).unwrap();
    assert_eq!(a, std::fs::read(&second).unwrap());
    assert!(String::from_utf8(a)
        .unwrap()
        .starts_with("pair_i,pair_k,n,e_hat,hoeffding_eps\n"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.json");
    std::fs::write(&config, r#"{"model": "constant", "n": 10, "seed": 1}"#).unwrap();
    let report = json(&bellcheck(&[
        "run",
        "--config",
        path_arg(&config),
        "--seed",
        "5",
        "--model",
        "quantum",
    ]));
    assert_eq!(report["seed"], 5);
    assert_eq!(report["model"], "quantum");
    assert_eq!(report["n_per_series"], 10);
    assert!(report["mi"].is_null());
}

#[test]
fn conspiracy_run_reports_mi_failure() {
    let report = json(&bellcheck(&["run", "--model", "conspiracy", "--n", "1000"]));
    assert_eq!(report["chsh"]["s_star"].as_f64(), Some(4.0));
    assert_eq!(report["mi"]["holds"], false);
}

#[test]
fn quantum_angles_flag() {
    let report = json(&bellcheck(&[
        "run", "--model", "quantum", "--n", "2000", "--angles", "0,0,0,0",
    ]));
    for series in report["series"].as_array().unwrap() {
        assert_eq!(series["e_hat"].as_f64(), Some(-1.0));
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ model: ").unwrap();
    let unknown_key = dir.path().join("unknown.json");
    std::fs::write(&unknown_key, r#"{"model": "dice-coin", "trials": 3}"#).unwrap();
    let cases: [&[&str]; 7] = [
        &["run", "--model", "dice"],
        &["run", "--model", "dice-coin", "--n", "0"],
        &["run", "--config", path_arg(&broken)],
        &["run", "--config", path_arg(&unknown_key)],
        &["run", "--model", "quantum", "--angles", "0,1"],
        &["ghz-check", "--phi", "1", "--fifth"],
        &["fine-check", "--table", "2,0,0,0"],
    ];
    for args in cases {
        assert_eq!(bellcheck(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn model_errors_exit_3() {
    assert_eq!(
        bellcheck(&["bound", "--model", "conspiracy"]).status.code(),
        Some(3)
    );
}

#[test]
fn ghz_resource_guard_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.json");
    let factors: Vec<(&str, f64)> = (0..25).map(|k| ("A", k as f64 * 0.1)).collect();
    std::fs::write(
        &path,
        serde_json::json!([{ "factors": factors, "target": 1 }]).to_string(),
    )
    .unwrap();
    assert_eq!(
        bellcheck(&["ghz-check", "--constraints", path_arg(&path)])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn ghz_check_canonical_systems() {
    let five = json(&bellcheck(&["ghz-check", "--fifth"]));
    assert_eq!(five["satisfiable"], false);
    assert_eq!(five["assignments_checked"], 256);
    let four = json(&bellcheck(&["ghz-check", "--phi", "pi/3"]));
    assert_eq!(four["satisfiable"], true);
    assert_eq!(four["constraints"].as_array().unwrap().len(), 4);
}

#[test]
fn custom_ghz_system() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.json");
    std::fs::write(&path, r#"[{"factors": [["A", 0.0], ["B", 0.0]], "target": 1}, {"factors": [["A", 0.0]], "target": -1}]"#)
        .unwrap();
    let report = json(&bellcheck(&["ghz-check", "--constraints", path_arg(&path)]));
    assert!(report["phi"].is_null());
    assert_eq!(report["satisfying_assignments"], 1);
}

#[test]
fn bound_and_fine_check() {
    let dice = json(&bellcheck(&["bound", "--model", "dice-coin"]));
    assert_eq!(dice["s"], "0");
    assert_eq!(dice["bound_holds"], true);

    let local = json(&bellcheck(&["fine-check", "--table", "1/2,1/2,1/2,1/2"]));
    assert_eq!(local["feasible"], true);
    assert_eq!(local["agrees_with_facets"], true);
    let pr = json(&bellcheck(&["fine-check", "--table", "1,1,1,-1"]));
    assert_eq!(pr["feasible"], false);
    assert_eq!(pr["certificate"]["value"], "4");
    let with_marginals = json(&bellcheck(&[
        "fine-check",
        "--table",
        "1,1,1,1",
        "--marginals",
        "1,1,1,1",
    ]));
    assert_eq!(with_marginals["feasible"], true);
}

#[test]
fn zoo_lists_every_model() {
    let out = bellcheck(&["zoo"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in bellcheck_core::zoo::MODEL_NAMES
        .iter()
        .chain(["quantum"].iter())
    {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
