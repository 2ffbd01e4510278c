//! End-to-end tests of the `codeprobe` binary: output formats, determinism,
//! and the exit-code contract (0 success, 2 usage, 3 disjointness, 4
//! reproduction mismatch).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_codeprobe"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_rm13(dir: &Path) -> PathBuf {
    let path = dir.join("rm13.json");
    let out = run(&[
        "code",
        "rm",
        "--r",
        "1",
        "--m",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    path
}

#[test]
fn code_construction_prints_parameters() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("rm13.json");
    let out = run(&[
        "code",
        "rm",
        "--r",
        "1",
        "--m",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "n=8 size=16 d=4 linear=true");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"00001111\""));

    let out = run(&["code", "rep", "--n", "5"]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("n=5 size=2 d=5 linear=true"));
    assert!(stdout(&out).contains("\"11111\""));
}

#[test]
fn code_concat_scales_distance() {
    let dir = TempDir::new().unwrap();
    let rm13 = write_rm13(dir.path());
    let c24 = dir.path().join("c24.json");
    let out = run(&[
        "code",
        "concat",
        "--in",
        rm13.to_str().unwrap(),
        "--r",
        "3",
        "--out",
        c24.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "n=24 size=16 d=12 linear=true");
}

#[test]
fn code_coset_and_generator_forms() {
    let dir = TempDir::new().unwrap();
    let rep = dir.path().join("rep8.json");
    assert!(
        run(&["code", "rep", "--n", "8", "--out", rep.to_str().unwrap()])
            .status
            .success()
    );
    let out = run(&[
        "code",
        "coset",
        "--in",
        rep.to_str().unwrap(),
        "--shift",
        "01010101",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"01010101\""));
    assert!(stdout(&out).contains("\"10101010\""));

    let gen = dir.path().join("gen.json");
    std::fs::write(&gen, r#"{"generator": ["110", "011"]}"#).unwrap();
    let out = run(&["code", "from-generator", "--in", gen.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"101\""));

    // rank-deficient input is a plain failure (exit 1)
    std::fs::write(&gen, r#"{"generator": ["110", "011", "101"]}"#).unwrap();
    let out = run(&["code", "from-generator", "--in", gen.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bound_reports_the_single_erasure_values() {
    let dir = TempDir::new().unwrap();
    let rm13 = write_rm13(dir.path());
    let out = run(&[
        "bound",
        "--in",
        rm13.to_str().unwrap(),
        "--erase",
        "1",
        "--exact",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["thm1_lower"], "7/1");
    assert_eq!(v["thm2_upper"], "28/1");
    assert_eq!(v["disjoint"], true);
    assert!((v["gen2norm_lower"].as_f64().unwrap() - 7.0).abs() < 1e-9);
    assert!((v["var_upper"].as_f64().unwrap() - 28.0).abs() < 1e-9);
    let q = v["exact_qfi"].as_f64().unwrap();
    assert!(q >= 7.0 - 1e-9 && q <= 28.0 + 1e-9);
}

#[test]
fn bound_on_a_weight_four_support_exits_three() {
    let dir = TempDir::new().unwrap();
    let rm13 = write_rm13(dir.path());
    let out = run(&[
        "bound",
        "--in",
        rm13.to_str().unwrap(),
        "--erase",
        "1,2,3,4",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["error"], "disjointness");
}

#[test]
fn erased_ghz_has_zero_exact_qfi() {
    let dir = TempDir::new().unwrap();
    let rep5 = dir.path().join("rep5.json");
    assert!(
        run(&["code", "rep", "--n", "5", "--out", rep5.to_str().unwrap()])
            .status
            .success()
    );
    let out = run(&[
        "bound",
        "--in",
        rep5.to_str().unwrap(),
        "--erase",
        "1",
        "--exact",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["exact_qfi"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn sweep_two_erasures_is_constant() {
    let dir = TempDir::new().unwrap();
    let rm13 = write_rm13(dir.path());
    let out = run(&["sweep", "--in", rm13.to_str().unwrap(), "-t", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 1 + 28 + 3);
    for row in &rows[1..=28] {
        assert!(row.contains(",3/1,"), "row: {row}");
    }
    assert!(text.contains("summary:min,,,3/1,"));
    assert!(text.contains("summary:mean,,,3/1,"));
}

#[test]
fn sweep_burst_on_the_24_qubit_code() {
    let dir = TempDir::new().unwrap();
    let rm13 = write_rm13(dir.path());
    let c24 = dir.path().join("c24.json");
    assert!(run(&[
        "code",
        "concat",
        "--in",
        rm13.to_str().unwrap(),
        "--r",
        "3",
        "--out",
        c24.to_str().unwrap()
    ])
    .status
    .success());
    let out = run(&[
        "sweep",
        "--in",
        c24.to_str().unwrap(),
        "-t",
        "3",
        "--mode",
        "burst",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let data: Vec<&str> = text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with("summary:"))
        .collect();
    assert_eq!(data.len(), 22);
    let sixty_three = data.iter().filter(|l| l.contains(",63/1,")).count();
    let twenty_seven = data.iter().filter(|l| l.contains(",27/1,")).count();
    assert_eq!(sixty_three, 8);
    assert_eq!(twenty_seven, 14);
}

#[test]
fn sweep_zero_erasures_single_row() {
    let dir = TempDir::new().unwrap();
    let rm13 = write_rm13(dir.path());
    let out = run(&["sweep", "--in", rm13.to_str().unwrap(), "-t", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 1 + 3);
    assert!(text.lines().nth(1).unwrap().starts_with(",0,true,16/1,"));
}

#[test]
fn sweep_output_is_deterministic_and_parallelism_independent() {
    let dir = TempDir::new().unwrap();
    let rm13 = write_rm13(dir.path());
    let base = run(&[
        "sweep",
        "--in",
        rm13.to_str().unwrap(),
        "-t",
        "2",
        "--exact",
    ]);
    assert!(base.status.success());
    let again = run(&[
        "sweep",
        "--in",
        rm13.to_str().unwrap(),
        "-t",
        "2",
        "--exact",
    ]);
    assert_eq!(base.stdout, again.stdout);
    for jobs in ["1", "4"] {
        let jobbed = run(&[
            "sweep",
            "--in",
            rm13.to_str().unwrap(),
            "-t",
            "2",
            "--exact",
            "--jobs",
            jobs,
        ]);
        assert!(jobbed.status.success());
        assert_eq!(
            base.stdout, jobbed.stdout,
            "--jobs {jobs} changed the bytes"
        );
    }
}

#[test]
fn boost_wraps_the_projected_bound() {
    let dir = TempDir::new().unwrap();
    let rm13 = write_rm13(dir.path());
    let out = run(&[
        "boost",
        "--in",
        rm13.to_str().unwrap(),
        "--r",
        "3",
        "--erase",
        "1,2,3",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["boosted_lower"], "63/1");
    assert_eq!(v["projected_blocks"], serde_json::json!([1]));
}

#[test]
fn estimator_summary_values() {
    let dir = TempDir::new().unwrap();
    let rm13 = write_rm13(dir.path());
    let curve = dir.path().join("curve.csv");
    let out = run(&[
        "estimator",
        "--in",
        rm13.to_str().unwrap(),
        "--erase",
        "1",
        "--out",
        curve.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["theorem3_bound"], "1/14");
    assert_eq!(v["defined"], true);
    // the measured error-propagation MSE saturates the inverse QFI
    let mse0 = v["mse_at_0"].as_f64().unwrap();
    let inv_qfi = v["exact_qfi_inverse"].as_f64().unwrap();
    assert!((mse0 - inv_qfi).abs() < 1e-9);
    let text = std::fs::read_to_string(&curve).unwrap();
    assert!(text.starts_with("theta,bias_raw,slope,second_moment,mse,defined\n"));
    assert_eq!(text.lines().count(), 1 + 101);

    // pure instance: mse(0) = 1/32 and the bound is attained; without
    // --out the curve takes stdout and the summary moves to stderr
    let out = run(&["estimator", "--in", rm13.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("theta,"));
    let summary = String::from_utf8_lossy(&out.stderr).into_owned();
    let v: serde_json::Value = serde_json::from_str(summary.trim()).unwrap();
    assert_eq!(v["theorem3_bound"], "1/32");
    assert!((v["mse_at_0"].as_f64().unwrap() - 1.0 / 32.0).abs() < 1e-9);
}

#[test]
fn estimator_flags_degenerate_families() {
    let dir = TempDir::new().unwrap();
    let rep8 = dir.path().join("rep8.json");
    assert!(
        run(&["code", "rep", "--n", "8", "--out", rep8.to_str().unwrap()])
            .status
            .success()
    );
    let curve = dir.path().join("curve.csv");
    let out = run(&[
        "estimator",
        "--in",
        rep8.to_str().unwrap(),
        "--erase",
        "1",
        "--out",
        curve.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["defined"], false);
    assert!(v["mse_at_0"].is_null());
    // every MSE cell in the curve is flagged undefined
    let text = std::fs::read_to_string(&curve).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",false")));
}

#[test]
fn reproduce_passes_and_writes_the_advantage_curve() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("advantage.csv");
    let out = run(&["reproduce", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stdout(&out));
    let table = stdout(&out);
    assert!(table.contains("PASS"));
    assert!(!table.contains("FAIL"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("r,n,qfi_lower,log_n_qfi_lower\n"));
    assert_eq!(text.lines().count(), 16);
}

#[test]
fn reproduce_detects_a_tampered_base_code() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    assert!(
        run(&["code", "rep", "--n", "8", "--out", bad.to_str().unwrap()])
            .status
            .success()
    );
    let out = run(&["reproduce", "--base", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).contains("FAIL"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["bound", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    // out-of-domain constructor parameters count as usage
    let out = run(&["code", "rm", "--r", "3", "--m", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
