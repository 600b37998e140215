//! End-to-end golden-file tests: every subcommand is run with a fixed seed
//! and its JSON output compared byte-for-byte against a committed report.

use std::process::Command;

fn run(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_permstat"))
        .args(args)
        .output()
        .expect("spawn permstat");
    let code = out.status.code().unwrap_or(-1);
    (String::from_utf8(out.stdout).expect("utf-8 output"), code)
}

fn check_golden(name: &str, args: &[&str]) {
    let (stdout, code) = run(args);
    let golden = std::fs::read_to_string(format!("tests/golden/{name}.json"))
        .unwrap_or_else(|e| panic!("missing golden file for {name}: {e}"));
    assert_eq!(code, 0, "{name}: expected exit 0");
    assert_eq!(
        stdout, golden,
        "{name}: output differs from the golden file"
    );
}

#[test]
fn golden_moments() {
    check_golden("moments", &["moments", "--matrix", "footrule", "--n", "6"]);
}

#[test]
fn golden_tail_check() {
    check_golden(
        "tail_check",
        &[
            "tail-check",
            "--matrix",
            "rho",
            "--n",
            "12",
            "--seed",
            "11",
            "--reps",
            "4000",
        ],
    );
}

#[test]
fn golden_clt_check() {
    check_golden(
        "clt_check",
        &[
            "clt-check",
            "--matrix",
            "footrule",
            "--n",
            "30",
            "--seed",
            "11",
            "--reps",
            "4000",
        ],
    );
}

#[test]
fn golden_matrix_check() {
    check_golden(
        "matrix_check",
        &[
            "matrix-check",
            "--n",
            "12",
            "--dim",
            "2",
            "--seed",
            "11",
            "--reps",
            "4000",
        ],
    );
}

#[test]
fn golden_gc_check() {
    check_golden(
        "gc_check",
        &[
            "gc-check",
            "--pop-size",
            "60",
            "--n-grid",
            "10,30",
            "--seed",
            "11",
            "--reps",
            "2000",
        ],
    );
}

#[test]
fn golden_sup_dev() {
    check_golden(
        "sup_dev",
        &[
            "sup-dev",
            "--input",
            "tests/fixtures/pop50.csv",
            "--n",
            "10",
            "--seed",
            "3",
        ],
    );
}

#[test]
fn golden_rosen() {
    check_golden(
        "rosen",
        &[
            "rosen",
            "--pop-size",
            "100",
            "--seed",
            "11",
            "--reps",
            "4000",
        ],
    );
}

#[test]
fn golden_series_reg() {
    check_golden(
        "series_reg",
        &[
            "series-reg",
            "--input",
            "tests/fixtures/xy_quadratic.csv",
            "--n",
            "20",
            "--seed",
            "4",
            "--reps",
            "500",
        ],
    );
}

#[test]
fn golden_perm_test_exact() {
    check_golden(
        "perm_test_exact",
        &[
            "perm-test",
            "--x",
            "tests/fixtures/x_small.csv",
            "--y",
            "tests/fixtures/y_small.csv",
            "--stat",
            "mean_diff",
            "--mode",
            "exact",
        ],
    );
}

#[test]
fn golden_perm_test_mc() {
    check_golden(
        "perm_test_mc",
        &[
            "perm-test",
            "--x",
            "tests/fixtures/x_small.csv",
            "--y",
            "tests/fixtures/y_small.csv",
            "--stat",
            "mean_diff",
            "--mode",
            "mc",
            "--B",
            "999",
            "--seed",
            "2",
        ],
    );
}

#[test]
fn golden_verify_all() {
    check_golden(
        "verify_all",
        &["verify-all", "--seed", "7", "--reps", "20000"],
    );
}

#[test]
fn missing_seed_is_a_usage_error() {
    let (_, code) = run(&[
        "perm-test",
        "--x",
        "tests/fixtures/x_small.csv",
        "--y",
        "tests/fixtures/y_small.csv",
        "--mode",
        "mc",
    ]);
    assert_eq!(code, 2);
    // clap reports missing required --seed for stochastic subcommands
    let (_, code) = run(&["tail-check", "--matrix", "rho", "--n", "12"]);
    assert_eq!(code, 2);
}

#[test]
fn malformed_csv_is_a_data_error() {
    let dir = std::env::temp_dir().join(format!("permstat-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.csv");
    std::fs::write(&bad, "1\nnot-a-number\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_permstat"))
        .args([
            "perm-test",
            "--x",
            bad.to_str().unwrap(),
            "--y",
            "tests/fixtures/y_small.csv",
            "--mode",
            "exact",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("line 2"),
        "stderr should carry the line number: {err}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn text_format_renders_verdict_lines() {
    let (stdout, code) = run(&["moments", "--matrix", "rho", "--n", "5", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("[PASS] moments/enumeration-cross-check"));
    assert!(stdout.contains("summary: 1 passed, 0 failed"));
}

#[test]
fn matrix_check_accepts_json_tensor_input() {
    let (stdout, code) = run(&[
        "matrix-check",
        "--input",
        "tests/fixtures/family_tensor.json",
        "--seed",
        "1",
        "--reps",
        "500",
    ]);
    assert_eq!(
        code, 0,
        "matrix-check on a tensor file should pass: {stdout}"
    );
    assert!(stdout.contains("matrix_bernstein"));
}

#[test]
fn env_var_sets_worker_count_without_changing_results() {
    let args = [
        "tail-check",
        "--matrix",
        "footrule",
        "--n",
        "10",
        "--seed",
        "9",
        "--reps",
        "2000",
    ];
    let plain = run(&args);
    let out = Command::new(env!("CARGO_BIN_EXE_permstat"))
        .args(args)
        .env("PERMSTAT_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), plain.0);
}

#[test]
fn moments_reports_rank_statistic_by_id() {
    let (stdout, code) = run(&[
        "moments",
        "--matrix",
        "footrule",
        "--n",
        "6",
        "--rank-stat",
        "chatterjee_xi",
    ]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let mean = parsed["data"]["rank_stat"]["mean"].as_f64().unwrap();
    assert!((mean - 35.0 / 3.0).abs() < 1e-10);
}
