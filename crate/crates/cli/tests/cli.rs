use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const QUICK: [&str; 6] = [
    "--mc-draws",
    "5000",
    "--resamples",
    "5000",
    "--calibration-samples",
    "200",
];

fn run(dir: &Path, args: &[&str]) -> Output {
    run_with(dir, args, &QUICK)
}

fn run_with(dir: &Path, args: &[&str], settings: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_digit-forensics"))
        .current_dir(dir)
        .env_remove("DIGIT_FORENSICS_CACHE")
        .args(args)
        .args(settings)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn gen_ref_identity_case_and_cache_hit() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen-ref", "--operator", "mean", "--n", "1"];
    let first = run(dir.path(), &args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let v = json(&first);
    let pmf: Vec<f64> = serde_json::from_value(v["pmf"].clone()).unwrap();
    assert!((pmf[0] - 2f64.log10()).abs() < 0.02);
    assert!(v["calibration_floor"].as_f64().unwrap() > 0.5);
    assert!(dir.path().join("digit-forensics-cache.json").exists());

    let second = run(dir.path(), &args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn unknown_operator_lists_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["gen-ref", "--operator", "median", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("median") && err.contains("mean, std, ols_slope"),
        "{err}"
    );
}

#[test]
fn env_var_overrides_cache_flag() {
    let dir = tempfile::tempdir().unwrap();
    let env_cache = dir.path().join("env").join("cache.json");
    let out = Command::new(env!("CARGO_BIN_EXE_digit-forensics"))
        .current_dir(dir.path())
        .env("DIGIT_FORENSICS_CACHE", &env_cache)
        .args([
            "gen-ref",
            "--operator",
            "std",
            "--n",
            "10",
            "--cache",
            "flag.json",
        ])
        .args(QUICK)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(env_cache.exists());
    assert!(!dir.path().join("flag.json").exists());
}

#[test]
fn score_dataset_reports_every_operator() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (1..=8).map(|i| format!("{i},{}\n", 2 * i)).collect();
    fs::write(dir.path().join("linear.csv"), format!("x,y\n{rows}")).unwrap();
    let out = run(
        dir.path(),
        &["score-dataset", "linear.csv", "--min-samples", "2"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    let ops: Vec<&str> = v["per_operator"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["operator"].as_str().unwrap())
        .collect();
    assert_eq!(ops, vec!["mean", "std", "ols_slope"]);
    let overall = v["overall"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&overall));
}

#[test]
fn malformed_csv_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "a,b\n1,2\n3\n").unwrap();
    let out = run(dir.path(), &["score-dataset", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn insufficient_group_exits_5_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("r.json"),
        r#"{"source_id":"p","groups":{"std":[1.5, 2.0, 3.1]}}"#,
    )
    .unwrap();
    let out = run(dir.path(), &["score-stats", "r.json", "--min-samples", "5"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).contains("std"), "{}", stderr(&out));
}

#[test]
fn schema_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("r.json"),
        r#"{"source_id":"p","groups":{"mean":[1, "x"]}}"#,
    )
    .unwrap();
    let out = run(dir.path(), &["score-stats", "r.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/groups/mean/1"));
}

#[test]
fn flagged_report_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let nines: Vec<String> = (0..40)
        .map(|i| format!("{}", 9.0 + f64::from(i) / 50.0))
        .collect();
    let nines = nines.join(",");
    fs::write(
        dir.path().join("r.json"),
        format!(r#"{{"source_id":"p","groups":{{"mean":[{nines}],"std":[{nines}]}},"metadata":{{"n":"30"}}}}"#),
    )
    .unwrap();
    // Enough resamples that p-values resolve well below the floor's gap to 1.
    let settings = [
        "--mc-draws",
        "5000",
        "--resamples",
        "200000",
        "--calibration-samples",
        "200",
    ];
    let scored = run_with(dir.path(), &["score-stats", "r.json"], &settings);
    assert_eq!(scored.status.code(), Some(0), "{}", stderr(&scored));
    assert!(json(&scored)["overall"].as_f64().unwrap() >= 0.96);

    let flagged = run_with(
        dir.path(),
        &["score-stats", "r.json", "--flag-level", "0.96"],
        &settings,
    );
    assert_eq!(flagged.status.code(), Some(4));
    assert_eq!(flagged.stdout, scored.stdout);
}

#[test]
fn odd_validation_count_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["validate", "--synthetic", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("even"), "{}", stderr(&out));

    let data = dir.path().join("data");
    fs::create_dir(&data).unwrap();
    for i in 0..3 {
        fs::write(data.join(format!("d{i}.csv")), "a,b\n1,2\n3,5\n4,9\n").unwrap();
    }
    let out = run(dir.path(), &["validate", "data"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("even"), "{}", stderr(&out));
}

#[test]
fn validate_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["validate", "--synthetic", "4", "--output", "out/v.json"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let v: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/v.json")).unwrap()).unwrap();
    let m = &v["matrix"];
    let total: u64 = ["tp", "fn", "fp", "tn"]
        .iter()
        .map(|k| m[k].as_u64().unwrap())
        .sum();
    assert_eq!(total + v["excluded"].as_array().unwrap().len() as u64, 4);
    assert_eq!(v["threshold"], 0.5);
    assert_eq!(v["per_dataset"].as_array().unwrap().len() as u64, total);
}

#[test]
fn scan_corpus_text_table() {
    let dir = tempfile::tempdir().unwrap();
    let reports = dir.path().join("reports");
    fs::create_dir(&reports).unwrap();
    fs::write(
        reports.join("a.json"),
        r#"{"source_id":"a","groups":{"mean":[]}}"#,
    )
    .unwrap();
    fs::write(
        reports.join("b.json"),
        r#"{"source_id":"b","groups":{"mean":[1.2, 3.4, 15, 0.21, 1.9, 2.6, 110, 7.2]}}"#,
    )
    .unwrap();
    let out = run(dir.path(), &["scan-corpus", "reports", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("Confidence level"), "{text}");
    assert!(text.contains("90%") && text.contains("98%"));
    assert!(text.contains("unscorable 1"));

    let bad = run(
        dir.path(),
        &["scan-corpus", "reports", "--levels", "0.95,0.9"],
    );
    assert_eq!(bad.status.code(), Some(2));
}
