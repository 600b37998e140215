//! Acceptance suite: every exit criterion of the toolkit, one test per
//! criterion, each printing its own PASS/FAIL line. Run with
//! `cargo test --test acceptance` (add `-- --nocapture` to see the lines).

use permstat::report::CheckRecord;
use permstat::verify::{self, VerifyConfig};
use std::process::Command;
use std::time::Instant;

fn full_config() -> VerifyConfig {
    VerifyConfig {
        seed: 7,
        reps: 100_000,
    }
}

fn assert_all(criterion: &str, records: &[CheckRecord]) {
    let pass = records.iter().all(|r| r.passed());
    println!(
        "criterion {criterion}: {}",
        if pass { "PASS" } else { "FAIL" }
    );
    for r in records {
        assert!(
            r.passed(),
            "criterion {criterion} failed at {}: analytic={:?} empirical={:?} se={:?}",
            r.name,
            r.analytic,
            r.empirical,
            r.se
        );
    }
}

#[test]
fn criterion_01_exact_moment_oracle() {
    let start = Instant::now();
    let records = verify::criterion_exact_moments().unwrap();
    assert_all("1 (exact-moment oracle)", &records);
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "criterion 1 took {elapsed:.1}s, limit 30s");
}

#[test]
fn criterion_02_rank_statistic_moments() {
    let records = verify::criterion_rank_moments().unwrap();
    assert_all("2 (rank-statistic moments)", &records);
}

#[test]
fn criterion_03_stein_linearity() {
    let records = verify::criterion_stein_linearity().unwrap();
    assert_all("3 (Stein linearity)", &records);
}

#[test]
fn criterion_04_tail_domination() {
    let start = Instant::now();
    let records = verify::criterion_tail_domination(&full_config()).unwrap();
    assert_all("4 (tail domination)", &records);
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < 300.0,
        "criterion 4 took {elapsed:.1}s, limit 5min"
    );
}

#[test]
fn criterion_05_clt_rate_behavior() {
    let records = verify::criterion_clt_rates(&full_config()).unwrap();
    assert_all("5 (CLT rate behavior)", &records);
}

#[test]
fn criterion_06_donsker_covariance() {
    let records = verify::criterion_donsker_cov(&full_config()).unwrap();
    assert_all("6 (Donsker covariance)", &records);
}

#[test]
fn criterion_07_rosen_process() {
    let records = verify::criterion_rosen(&full_config()).unwrap();
    assert_all("7 (Rosen process)", &records);
}

#[test]
fn criterion_08_convex_ordering() {
    let records = verify::criterion_convex_order().unwrap();
    assert_all("8 (convex ordering)", &records);
}

#[test]
fn criterion_09_permutation_test() {
    let records = verify::criterion_perm_test(&full_config()).unwrap();
    assert_all("9 (permutation test)", &records);
}

#[test]
fn criterion_10_series_regression() {
    let records = verify::criterion_series_reg(&full_config()).unwrap();
    assert_all("10 (series regression)", &records);
}

#[test]
fn criterion_11_reproducibility() {
    // verify-all with a fixed seed must emit byte-identical JSON across
    // repeated runs and across thread counts
    let bin = env!("CARGO_BIN_EXE_permstat");
    let run = |threads: &str| -> Vec<u8> {
        let out = Command::new(bin)
            .args([
                "verify-all",
                "--seed",
                "7",
                "--reps",
                "20000",
                "--threads",
                threads,
            ])
            .output()
            .expect("spawn permstat");
        assert!(
            out.status.success(),
            "verify-all failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let first = run("1");
    let second = run("1");
    let third = run("4");
    let fourth = run("4");
    let pass = first == second && second == third && third == fourth;
    println!(
        "criterion 11 (reproducibility): {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(
        pass,
        "verify-all output differs across runs or thread counts"
    );
}
