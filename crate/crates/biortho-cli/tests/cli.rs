//! Interface tests for the binary: flag parsing, file formats, and the
//! exit-status contract on paths the acceptance criteria don't cover.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biortho"))
        .args(args)
        .output()
        .expect("binary must run")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biortho"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary must run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn verify_report_is_valid_json_with_stable_schema() {
    let out = run(&["verify", "--map", "identity"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["map"], "identity");
    assert_eq!(report["config"]["N"], 64);
    assert!(report["config"]["grid"].is_null());
    assert_eq!(report["pass"], true);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 21);
    for ck in checks {
        assert!(ck["ms"].is_null());
        assert_eq!(ck["pass"], true);
        assert!(ck["residual"].as_f64().unwrap() <= ck["tol"].as_f64().unwrap() * 10.0);
    }
}

#[test]
fn eigenstate_green_eta_hits_the_kernel_peak() {
    let out = run(&[
        "eigenstate", "--map", "green", "--family", "eta", "--x0", "0",
        "--grid-extent", "1", "--grid-points", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("# family=eta map=green"));
    assert!(text.contains("Closed[G(x - 0)]"));
    let peak_row = text
        .lines()
        .find(|l| l.starts_with("0.0000"))
        .expect("row at x = 0");
    let fields: Vec<f64> = peak_row.split(',').map(|v| v.parse().unwrap()).collect();
    let expect = 1.0 / (2.0 * 2.0f64.sqrt());
    assert!((fields[1] - expect).abs() < 1e-12);
    assert!((fields[2] - expect).abs() < 1e-12);
}

#[test]
fn eigenstate_requires_the_matching_parameter() {
    let out = run(&["eigenstate", "--map", "identity", "--family", "eta", "--p0", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--x0"));
}

#[test]
fn matrix_json_export_carries_the_ladder_entries() {
    let out = run(&["matrix", "--operator", "q0", "--basis-size", "4", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let m: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(m["operator"], "q0");
    assert_eq!(m["n"], 4);
    let rows = m["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    // Entry (0,1): re at index 2, im at index 3 of row 0.
    let half_sqrt2 = 0.5f64.sqrt();
    assert!((rows[0][2].as_f64().unwrap() - half_sqrt2).abs() < 1e-15);
    assert_eq!(rows[0][3].as_f64().unwrap(), 0.0);
    // Diagonal is empty.
    assert_eq!(rows[0][0].as_f64().unwrap(), 0.0);
}

#[test]
fn coefficient_files_feed_the_rankone_legs() {
    let dir = std::env::temp_dir().join(format!("biortho-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("u.txt");
    let mut body = String::from("hermite-coeffs N=8\n1,0\n");
    body.push_str(&"0,0\n".repeat(7));
    std::fs::write(&path, body).unwrap();

    let out = run(&[
        "matrix", "--map", "rankone", "--alpha", "1,0",
        "--u", path.to_str().unwrap(), "--basis-size", "8", "--operator", "q",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("# operator=q map=rankone"));

    // Wrong declared size is a configuration error.
    let bad = run(&[
        "matrix", "--map", "rankone", "--u", path.to_str().unwrap(),
        "--basis-size", "16", "--operator", "q",
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("declares N=8"));

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn profile_battery_lists_every_member() {
    let out = run(&["profile", "--what", "battery", "--grid-points", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in ["\"hermite:0\"", "\"gaussian:a=3,w=2\"", "\"modulated:k=2\""] {
        assert!(text.contains(name), "missing {name}");
    }
    // 22 members × 3 points + header line.
    assert_eq!(text.lines().count(), 22 * 3 + 1);
}

#[test]
fn unwritable_output_exits_three() {
    let out = run(&[
        "verify", "--map", "identity", "--out", "/nonexistent-dir/report.json",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn default_basis_size_comes_from_the_environment() {
    let out = run_env(&["matrix", "--operator", "q0"], "BIORTHO_DEFAULT_N", "32");
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("# operator=q0 map=identity n=32"));

    let bad = run_env(&["matrix", "--operator", "q0"], "BIORTHO_DEFAULT_N", "three");
    assert_eq!(bad.status.code(), Some(2));
}
