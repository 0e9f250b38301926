//! Black-box tests of the `callwise` binary: each stage runs as a real
//! process against files in a temporary directory, checking outputs,
//! diagnostics, and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use callwise_cli::formats;
use callwise_core::bayes::BayesModel;
use tempfile::TempDir;

fn callwise(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_callwise"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(dir: &Path, args: &[&str]) -> String {
    let out = callwise(dir, args);
    assert!(
        out.status.success(),
        "command {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty(), "stdout must stay clean for scripting");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn run_err(dir: &Path, args: &[&str]) -> String {
    let out = callwise(dir, args);
    assert!(!out.status.success(), "command {args:?} unexpectedly passed");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const RAW_HEADER: &str =
    "timestamp,direction,duration_seconds,counterpart,location,situation,event_type";

fn nine_row_log() -> String {
    let mut log = String::from(RAW_HEADER);
    let rows = [
        "2004-03-01T08:30:00,incoming,42,A,Office,Meeting,",
        "2004-03-01T12:10:00,incoming,0,B,Office,Lunch,missed",
        "2004-03-01T19:00:00,outgoing,300,A,Home,,",
        "2004-03-02T09:00:00,incoming,0,C,Office,Meeting,",
        "2004-03-02T21:40:00,incoming,180,B,Home,Dinner,",
        "2004-03-06T11:05:00,incoming,0,D,,Lecture,",
        "2004-03-06T23:59:59,incoming,7,A,Home,,",
        "2004-03-07T06:00:00,outgoing,0,E,,,",
        "2004-03-07T05:59:59,incoming,0,E,,,missed",
    ];
    for row in rows {
        log.push('\n');
        log.push_str(row);
    }
    log
}

#[test]
fn preprocess_turns_nine_rows_into_nine_instances() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("raw.csv"), nine_row_log()).unwrap();
    let stderr = run_ok(
        dir.path(),
        &["preprocess", "--input", "raw.csv", "--output", "ds.csv"],
    );
    assert!(stderr.contains("9 instances"), "stderr: {stderr}");

    let ds = formats::parse_dataset(&fs::read_to_string(dir.path().join("ds.csv")).unwrap())
        .unwrap();
    assert_eq!(ds.len(), 9);
    assert!(ds.validate().is_ok());
    assert_eq!(
        ds.schema().classes(),
        ["Accept", "Reject", "Missed", "Outgoing"]
    );
    // Midnight boundary: 23:59:59 and 06:00:00 land in different segments.
    let registry = fs::read_to_string(dir.path().join("ds.csv.registry")).unwrap();
    assert_eq!(registry.lines().count(), 6);
    assert!(registry.lines().any(|l| l == "A,Rel_1"));
    assert!(registry.lines().any(|l| l == "E,Rel_5"));
}

#[test]
fn preprocess_accepts_an_empty_log_with_a_warning() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("raw.csv"), "").unwrap();
    let stderr = run_ok(
        dir.path(),
        &["preprocess", "--input", "raw.csv", "--output", "ds.csv"],
    );
    assert!(stderr.contains("warning"), "stderr: {stderr}");
    let ds = formats::parse_dataset(&fs::read_to_string(dir.path().join("ds.csv")).unwrap())
        .unwrap();
    assert!(ds.is_empty());
    assert_eq!(ds.schema().num_classes(), 4);
}

#[test]
fn preprocess_rejects_a_malformed_row_naming_its_line() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("raw.csv"),
        format!("{RAW_HEADER}\n2004-03-01T08:30:00,incoming,-3,A,Office,Meeting,\n"),
    )
    .unwrap();
    let stderr = run_err(
        dir.path(),
        &["preprocess", "--input", "raw.csv", "--output", "ds.csv"],
    );
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(!dir.path().join("ds.csv").exists());
}

#[test]
fn preprocess_honors_custom_segments() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("raw.csv"),
        format!("{RAW_HEADER}\n2004-03-05T09:30:00,incoming,5,A,,,\n"),
    )
    .unwrap();
    run_ok(
        dir.path(),
        &[
            "preprocess",
            "--input",
            "raw.csv",
            "--output",
            "ds.csv",
            "--segments",
            "09:00,11:00,24:00",
            "--day-granularity",
            "weekday-weekend",
        ],
    );
    let text = fs::read_to_string(dir.path().join("ds.csv")).unwrap();
    assert!(text.contains("Weekday[09:00-11:00]"), "dataset: {text}");

    let stderr = run_err(
        dir.path(),
        &[
            "preprocess",
            "--input",
            "raw.csv",
            "--output",
            "ds.csv",
            "--segments",
            "11:00,09:00",
        ],
    );
    assert!(stderr.contains("segments"), "stderr: {stderr}");
}

fn synth(dir: &Path, name: &str, size: &str, noise: &str, seed: &str) -> PathBuf {
    let ds = format!("{name}.csv");
    run_ok(
        dir,
        &[
            "synth",
            "--persona",
            "office_worker",
            "--size",
            size,
            "--noise",
            noise,
            "--seed",
            seed,
            "--output",
            &ds,
            "--mask",
            &format!("{name}.mask"),
        ],
    );
    dir.join(ds)
}

#[test]
fn detect_noise_reports_zero_on_consistent_data_and_flags_on_noisy_data() {
    let dir = TempDir::new().unwrap();
    let clean = synth(dir.path(), "clean", "400", "0.0", "5");
    let stderr = run_ok(
        dir.path(),
        &["detect-noise", "--input", "clean.csv", "--output", "clean_noise.txt"],
    );
    assert!(stderr.contains("(fraction 0)"), "stderr: {stderr}");

    synth(dir.path(), "noisy", "400", "0.1", "5");
    let stderr = run_ok(
        dir.path(),
        &["detect-noise", "--input", "noisy.csv", "--output", "noisy_noise.txt"],
    );
    assert!(!stderr.contains("(fraction 0)"), "stderr: {stderr}");
    let report = fs::read_to_string(dir.path().join("noisy_noise.txt")).unwrap();
    let flagged = report
        .lines()
        .filter(|l| l.ends_with(",true"))
        .count();
    assert!(flagged > 0);

    // Flagged rows must be real injected flips: every flagged id appears
    // in the ground-truth mask.
    let ds = formats::parse_dataset(&fs::read_to_string(&clean).unwrap()).unwrap();
    let mask = formats::parse_mask(
        &fs::read_to_string(dir.path().join("noisy.mask")).unwrap(),
        ds.schema(),
    )
    .unwrap();
    for line in report.lines().filter(|l| l.ends_with(",true")) {
        let id: usize = line.split(',').next().unwrap().parse().unwrap();
        assert!(
            mask.flips.binary_search_by_key(&id, |f| f.0).is_ok(),
            "flagged id {id} was not injected noise"
        );
    }
}

#[test]
fn detect_noise_fails_cleanly_on_missing_or_invalid_input() {
    let dir = TempDir::new().unwrap();
    let stderr = run_err(
        dir.path(),
        &["detect-noise", "--input", "nope.csv", "--output", "out.txt"],
    );
    assert!(stderr.contains("nope.csv"), "stderr: {stderr}");

    fs::write(dir.path().join("bad.csv"), "a,b\n1,2\n").unwrap();
    let stderr = run_err(
        dir.path(),
        &["detect-noise", "--input", "bad.csv", "--output", "out.txt"],
    );
    assert!(stderr.contains("behavior"), "stderr: {stderr}");
}

#[test]
fn model_dump_round_trips_through_the_file() {
    let dir = TempDir::new().unwrap();
    let ds_path = synth(dir.path(), "data", "300", "0.05", "17");
    run_ok(
        dir.path(),
        &[
            "detect-noise",
            "--input",
            "data.csv",
            "--output",
            "noise.txt",
            "--model-dump",
            "model.txt",
        ],
    );
    let ds = formats::parse_dataset(&fs::read_to_string(&ds_path).unwrap()).unwrap();
    let fitted = BayesModel::fit(&ds).unwrap();
    let dumped =
        formats::parse_model(&fs::read_to_string(dir.path().join("model.txt")).unwrap()).unwrap();
    assert_eq!(dumped, fitted);
}

#[test]
fn train_writes_equal_rules_for_both_variants_on_clean_data() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "clean", "1500", "0.0", "1");
    run_ok(
        dir.path(),
        &[
            "train", "--input", "clean.csv", "--output", "base.rules", "--variant", "base",
        ],
    );
    run_ok(
        dir.path(),
        &[
            "train", "--input", "clean.csv", "--output", "robust.rules", "--variant", "robust",
        ],
    );
    let base = fs::read_to_string(dir.path().join("base.rules")).unwrap();
    let robust = fs::read_to_string(dir.path().join("robust.rules")).unwrap();
    assert_eq!(base, robust);
    assert!(base.lines().all(|l| l.contains(" => ")));
    assert!(dir.path().join("base.rules.tree").exists());
}

#[test]
fn train_rejects_an_empty_dataset() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("empty.csv"),
        "# classes: A,B\nx,behavior\n",
    )
    .unwrap();
    let stderr = run_err(
        dir.path(),
        &["train", "--input", "empty.csv", "--output", "rules.txt"],
    );
    assert!(stderr.contains("empty"), "stderr: {stderr}");
}

#[test]
fn evaluate_requires_a_seed_and_enough_folds() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "data", "100", "0.0", "2");
    let out = callwise(
        dir.path(),
        &["evaluate", "--input", "data.csv", "--output", "eval.txt"],
    );
    assert!(!out.status.success(), "seed must be mandatory");

    let stderr = run_err(
        dir.path(),
        &[
            "evaluate", "--input", "data.csv", "--output", "eval.txt", "--seed", "1", "--folds",
            "1",
        ],
    );
    assert!(stderr.contains("folds"), "stderr: {stderr}");
}

#[test]
fn evaluate_report_has_fold_rows_means_and_a_summary() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "data", "250", "0.05", "3");
    run_ok(
        dir.path(),
        &[
            "evaluate", "--input", "data.csv", "--output", "eval.txt", "--seed", "11",
            "--variant", "robust", "--folds", "5",
        ],
    );
    let report = fs::read_to_string(dir.path().join("eval.txt")).unwrap();
    assert!(report.starts_with("# evaluation variant=robust seed=11 folds=5 score=likelihood\n"));
    for fold in 0..5 {
        assert!(report.lines().any(|l| l.starts_with(&format!("{fold},robust,(weighted),"))));
    }
    assert_eq!(
        report.lines().filter(|l| l.starts_with("mean,robust,")).count(),
        4, // three observed classes plus the weighted row
    );
    let summary = report
        .lines()
        .find(|l| l.starts_with("#summary "))
        .expect("summary line");
    for key in [
        "variant=robust",
        "accuracy=",
        "weighted_precision=",
        "weighted_recall=",
        "weighted_fmeasure=",
        "noise_fraction=",
    ] {
        assert!(summary.contains(key), "missing {key} in {summary}");
    }
}

#[test]
fn compare_reports_zero_deltas_on_clean_data() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "clean", "300", "0.0", "4");
    run_ok(
        dir.path(),
        &[
            "compare", "--input", "clean.csv", "--output", "cmp.txt", "--seed", "9",
        ],
    );
    let cmp = fs::read_to_string(dir.path().join("cmp.txt")).unwrap();
    for metric in ["weighted_precision", "weighted_recall", "weighted_fmeasure", "accuracy"] {
        let row = cmp
            .lines()
            .find(|l| l.starts_with(&format!("{metric},")))
            .unwrap();
        assert!(row.ends_with(",0"), "nonzero delta in {row}");
    }
}

#[test]
fn synth_rejects_unknown_personas_and_bad_rates() {
    let dir = TempDir::new().unwrap();
    let stderr = run_err(
        dir.path(),
        &[
            "synth", "--persona", "astronaut", "--size", "10", "--seed", "0", "--output",
            "x.csv",
        ],
    );
    assert!(stderr.contains("office_worker"), "stderr: {stderr}");

    let stderr = run_err(
        dir.path(),
        &[
            "synth", "--persona", "screener", "--size", "10", "--noise", "1.5", "--seed", "0",
            "--output", "x.csv",
        ],
    );
    assert!(stderr.contains("noise"), "stderr: {stderr}");
}
