//! End-to-end tests of the binary: exit codes, file outputs, and the
//! report-determinism acceptance criterion (two identical invocations
//! produce byte-identical report.json files).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use fairstream_core::BenchmarkReport;

static DIR_COUNTER: AtomicUsize = AtomicUsize::new(0);

struct TempDir(PathBuf);

impl TempDir {
    fn new() -> Self {
        let id = DIR_COUNTER.fetch_add(1, Ordering::SeqCst);
        let path = std::env::temp_dir()
            .join(format!("fairstream-cli-test-{}-{id}", std::process::id()));
        std::fs::create_dir_all(&path).unwrap();
        Self(path)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn fairstream(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairstream"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should run")
}

fn synth(dir: &TempDir, nodes: &str, n: &str, seed: &str) {
    let out = fairstream(
        &[
            "synth", "--nodes", nodes, "--n", n, "--seed", seed,
            "--out-csv", "data.csv", "--out-truth", "truth.json",
        ],
        &dir.0,
    );
    assert!(out.status.success(), "synth failed: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn criterion_8_report_determinism() {
    let dir = TempDir::new();
    synth(&dir, "8", "2000", "3");
    let run = |output: &str| {
        let out = fairstream(
            &[
                "run", "--input", "data.csv", "--label", "Y", "--protected", "S",
                "--runs", "3", "--output", output,
            ],
            &dir.0,
        );
        assert!(out.status.success(), "run failed: {}", String::from_utf8_lossy(&out.stderr));
    };
    run("r1.json");
    run("r2.json");
    let a = std::fs::read(dir.path("r1.json")).unwrap();
    let b = std::fs::read(dir.path("r2.json")).unwrap();
    assert_eq!(a, b, "reports from identical configs differ");
    println!("ACCEPTANCE criterion 8 (byte-identical report.json): PASS");
}

#[test]
fn report_round_trips_byte_identically() {
    let dir = TempDir::new();
    synth(&dir, "6", "1000", "5");
    let out = fairstream(
        &[
            "run", "--input", "data.csv", "--label", "Y", "--protected", "S",
            "--runs", "2", "--output", "report.json", "--variant", "sfcf-ri",
        ],
        &dir.0,
    );
    assert!(out.status.success());
    let body = std::fs::read_to_string(dir.path("report.json")).unwrap();
    let parsed: BenchmarkReport = serde_json::from_str(&body).unwrap();
    assert_eq!(parsed.to_json(), body);
}

#[test]
fn unknown_variant_exits_2_naming_the_flag() {
    let dir = TempDir::new();
    synth(&dir, "5", "200", "1");
    let out = fairstream(
        &[
            "run", "--input", "data.csv", "--label", "Y", "--protected", "S",
            "--variant", "sfcf-bogus",
        ],
        &dir.0,
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--variant"), "stderr should name --variant: {stderr}");
}

#[test]
fn invalid_alpha_exits_2() {
    let dir = TempDir::new();
    synth(&dir, "5", "200", "1");
    let out = fairstream(
        &[
            "run", "--input", "data.csv", "--label", "Y", "--protected", "S",
            "--alpha", "1.5",
        ],
        &dir.0,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--alpha"));
}

#[test]
fn missing_input_exits_2() {
    let dir = TempDir::new();
    let out = fairstream(
        &["run", "--input", "nope.csv", "--label", "Y", "--protected", "S"],
        &dir.0,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--input"));
}

#[test]
fn synth_too_few_nodes_exits_2() {
    let dir = TempDir::new();
    let out = fairstream(
        &["synth", "--nodes", "2", "--n", "100", "--out-csv", "d.csv", "--out-truth", "t.json"],
        &dir.0,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_is_byte_deterministic() {
    let dir = TempDir::new();
    for suffix in ["a", "b"] {
        let out = fairstream(
            &[
                "synth", "--nodes", "7", "--n", "500", "--seed", "9",
                "--out-csv", &format!("d-{suffix}.csv"),
                "--out-truth", &format!("t-{suffix}.json"),
            ],
            &dir.0,
        );
        assert!(out.status.success());
    }
    assert_eq!(
        std::fs::read(dir.path("d-a.csv")).unwrap(),
        std::fs::read(dir.path("d-b.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(dir.path("t-a.json")).unwrap(),
        std::fs::read(dir.path("t-b.json")).unwrap()
    );
}

#[test]
fn single_run_reports_zero_std() {
    let dir = TempDir::new();
    synth(&dir, "6", "800", "2");
    let out = fairstream(
        &[
            "run", "--input", "data.csv", "--label", "Y", "--protected", "S",
            "--runs", "1", "--output", "report.json",
        ],
        &dir.0,
    );
    assert!(out.status.success());
    let report: BenchmarkReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path("report.json")).unwrap()).unwrap();
    for outcome in report.variants.values() {
        if let fairstream_core::VariantOutcome::Report(r) = outcome {
            assert_eq!(r.accuracy.std, 0.0);
            assert_eq!(r.eo.std, 0.0);
            assert_eq!(r.dp.std, 0.0);
        }
    }
}

#[test]
fn dump_files_have_expected_shape() {
    let dir = TempDir::new();
    synth(&dir, "6", "800", "4");
    let out = fairstream(
        &[
            "run", "--input", "data.csv", "--label", "Y", "--protected", "S",
            "--runs", "1", "--output", "report.json",
            "--dump-graph", "graph.json", "--dump-selection", "selection.json",
        ],
        &dir.0,
    );
    assert!(out.status.success());

    let graph: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path("graph.json")).unwrap()).unwrap();
    for side in ["label", "protected"] {
        for field in ["target", "strong_relevant", "redundant", "irrelevant", "cor"] {
            assert!(graph[side].get(field).is_some(), "graph dump missing {side}.{field}");
        }
    }
    // cor entries are [conditioning-set, redundant-features] pairs.
    if let Some(entry) = graph["label"]["cor"].as_array().unwrap().first() {
        assert_eq!(entry.as_array().unwrap().len(), 2);
    }

    let selection: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path("selection.json")).unwrap()).unwrap();
    let snaps = selection.as_array().unwrap();
    assert_eq!(snaps.len(), 6);
    for field in ["inadmissible", "admissible", "mi", "ri", "icrf", "ad1", "ad2", "selected"] {
        assert!(snaps[0].get(field).is_some(), "selection dump missing {field}");
    }
}

#[test]
fn verify_mb_reports_recovery_and_rejects_mismatched_truth() {
    let dir = TempDir::new();
    synth(&dir, "8", "5000", "1");
    let out = fairstream(&["verify-mb", "--input", "data.csv", "--truth", "truth.json"], &dir.0);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Y:") && stdout.contains("S:"), "missing per-target lines: {stdout}");
    assert!(stdout.matches("f1").count() == 2);

    // Ground truth naming unknown features is a config error.
    let mut truth: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path("truth.json")).unwrap()).unwrap();
    truth["mb_y"].as_array_mut().unwrap().push(serde_json::json!("Q99"));
    std::fs::write(dir.path("bad-truth.json"), truth.to_string()).unwrap();
    let out = fairstream(&["verify-mb", "--input", "data.csv", "--truth", "bad-truth.json"], &dir.0);
    assert_eq!(out.status.code(), Some(2));
}
