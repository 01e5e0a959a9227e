//! End-to-end tests of the installed binary: output contracts, exit codes,
//! determinism, and the documented example invocations.

use std::process::{Command, Output};

fn siegel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siegel"))
        .args(args)
        .env_remove("SIEGEL_TOL")
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn w_documented_examples_print_zero() {
    let cases: [&[&str]; 3] = [
        &["w", "--m", "0,-1;1,0", "--n", "0,-1;1,0", "--exact"],
        &[
            "w",
            "--m",
            "1,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1",
            "--n",
            "1,2,0,0;0,1,0,0;0,0,1,0;0,0,-2,1",
        ],
        &["w", "--m", "13,8;8,5", "--n", "13,8;8,5"],
    ];
    for args in cases {
        let out = siegel(args);
        assert_eq!(code(&out), 0, "{args:?}: {out:?}");
        let text = stdout_of(&out);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("w=0"), "{args:?}");
        let residual = lines.next().expect("residual line");
        assert!(residual.starts_with("residual="), "{residual}");
    }
}

#[test]
fn w_numeric_matches_exact_orientation() {
    // a pair with a nonzero value in both evaluation modes
    let m = "0,-1;1,0";
    let n = "-1,0;0,-1";
    let exact = siegel(&["w", "--m", m, "--n", n, "--exact"]);
    let numeric = siegel(&["w", "--m", m, "--n", n, "--numeric"]);
    assert_eq!(code(&exact), 0);
    assert_eq!(code(&numeric), 0);
    let first = |o: &Output| stdout_of(o).lines().next().unwrap().to_string();
    assert_eq!(first(&exact), first(&numeric));
}

#[test]
fn w_rejects_bad_input_with_usage_code() {
    let bad_literal = siegel(&["w", "--m", "1,2;1", "--n", "1,0;0,1"]);
    assert_eq!(code(&bad_literal), 2);
    let not_symplectic = siegel(&["w", "--m", "1,1;1,1", "--n", "1,0;0,1"]);
    assert_eq!(code(&not_symplectic), 2);
    let genus_mismatch = siegel(&[
        "w",
        "--m",
        "1,0;0,1",
        "--n",
        "1,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1",
    ]);
    assert_eq!(code(&genus_mismatch), 2);
    let exact_beyond_genus1 = siegel(&[
        "w",
        "--m",
        "1,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1",
        "--n",
        "1,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1",
        "--exact",
    ]);
    assert_eq!(code(&exact_beyond_genus1), 2);
}

#[test]
fn w_reads_matrix_from_file() {
    let dir = std::env::temp_dir().join("siegel-cli-test-w");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.txt");
    std::fs::write(&path, "0,-1;1,0\n").unwrap();
    let arg = format!("@{}", path.display());
    let out = siegel(&["w", "--m", &arg, "--n", "0,-1;1,0", "--exact"]);
    assert_eq!(code(&out), 0);
    assert!(stdout_of(&out).starts_with("w=0"));
}

#[test]
fn lemma_certificate_passes_and_is_deterministic() {
    let args = ["lemma", "ITra", "--samples", "25", "--seed", "7"];
    let a = siegel(&args);
    let b = siegel(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout, "same seed must give identical bytes");
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&a)).unwrap();
    assert_eq!(doc["claim"], "ITra");
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["steps"].as_array().unwrap().len(), 25);
}

#[test]
fn lemma_rejects_unknown_tag() {
    let out = siegel(&["lemma", "NoSuchLemma"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn deligne_pinned_chain_and_reproducible_bytes() {
    let args = ["deligne", "--q", "4"];
    let a = siegel(&args);
    let b = siegel(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout_of(&a);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["level"], 4);
    assert!(text.contains("13,8;8,5"));
    assert!(text.contains("233,144;144,89"));
    assert!(doc["conclusion"].as_str().unwrap().contains("2r is integral"));
}

#[test]
fn deligne_rejects_bad_level() {
    assert_eq!(code(&siegel(&["deligne", "--q", "6"])), 2);
    assert_eq!(code(&siegel(&["deligne", "--q", "-4"])), 2);
}

#[test]
fn deligne_writes_output_file() {
    let dir = std::env::temp_dir().join("siegel-cli-test-out");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("deligne.json");
    let arg = path.display().to_string();
    let out = siegel(&["deligne", "--q", "4", "--out", &arg]);
    assert_eq!(code(&out), 0);
    assert!(stdout_of(&out).is_empty(), "JSON goes to the file, not stdout");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["pass"], true);
}

#[test]
fn theta_report_passes() {
    let out = siegel(&["theta", "--samples", "6", "--seed", "3", "--matrix", "1,2;0,1"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["relation"]["pass"], true);
    assert_eq!(doc["relation"]["pairs_checked"], 6);
    let value = doc["matrix"]["value"].as_str().unwrap();
    assert!(value.starts_with("+1.000000000000e0"), "theta(z+2) = theta(z): {value}");
}

#[test]
fn theta_rejects_matrix_outside_group() {
    let out = siegel(&["theta", "--samples", "1", "--matrix", "1,1;0,1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn delta_report_passes_and_env_tolerance_applies() {
    let args = ["delta", "--r", "0.3", "--samples", "10", "--seed", "11"];
    let out = siegel(&args);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["relation"]["pass"], true);
    assert_eq!(doc["weight"], 0.3);

    // an unreachable tolerance from the environment flips the verdict
    let strict = Command::new(env!("CARGO_BIN_EXE_siegel"))
        .args(args)
        .env("SIEGEL_TOL", "1e-30")
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(1));

    // a malformed value is a usage error
    let broken = Command::new(env!("CARGO_BIN_EXE_siegel"))
        .args(args)
        .env("SIEGEL_TOL", "plenty")
        .output()
        .unwrap();
    assert_eq!(broken.status.code(), Some(2));

    // the flag wins over the environment
    let flagged = Command::new(env!("CARGO_BIN_EXE_siegel"))
        .args(["delta", "--r", "0.3", "--samples", "10", "--seed", "11", "--tol", "1e-9"])
        .env("SIEGEL_TOL", "1e-30")
        .output()
        .unwrap();
    assert_eq!(flagged.status.code(), Some(0));
}

#[test]
fn delta_reports_rademacher_integer() {
    let out =
        siegel(&["delta", "--r", "0.5", "--samples", "2", "--seed", "1", "--matrix", "2,1;5,3"]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["matrix"]["rademacher"], -2);
}
