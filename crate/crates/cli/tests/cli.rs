use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ensfts::data_io::{load_model, SavedModel};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ensfts"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(dir: &Path, length: usize) -> PathBuf {
    let out = run(
        dir,
        &[
            "synth",
            "--kind",
            "sine_drift",
            "--length",
            &length.to_string(),
            "--features",
            "5",
            "--seed",
            "11",
            "-o",
            "data.csv",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    dir.join("data.csv")
}

const BASE: &[&str] = &[
    "-i",
    "data.csv",
    "--timestamp-column",
    "date",
    "--target",
    "target",
    "--window-length",
    "100",
];

#[test]
fn help_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(run(dir.path(), &[]).status.code(), Some(1));
    assert_eq!(
        run(dir.path(), &["evaluate", "--bogus"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(dir.path(), &["evaluate", "--method", "svd"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn evaluate_writes_report_and_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 300);
    fs::write(
        dir.path().join("run.toml"),
        "input = \"data.csv\"\ntimestamp_column = \"date\"\ntarget = \"target\"\nmethod = \"kpca\"\nwindow_length = 100\nout_dir = \"out\"\n",
    )
    .unwrap();

    let first = run(dir.path(), &["evaluate", "-c", "run.toml"]);
    assert!(first.status.success(), "{}", stderr(&first));
    let stdout = String::from_utf8_lossy(&first.stdout);
    assert!(stdout.contains("3 windows of 100"), "{stdout}");
    assert!(stdout.contains("skill vs persistence"), "{stdout}");
    let report_a = fs::read(dir.path().join("out/report.json")).unwrap();
    let windows = fs::read_to_string(dir.path().join("out/windows.csv")).unwrap();
    assert_eq!(windows.lines().count(), 4);

    let second = run(
        dir.path(),
        &["evaluate", "-c", "run.toml", "--execution", "parallel"],
    );
    assert!(second.status.success(), "{}", stderr(&second));
    let report_b = fs::read(dir.path().join("out/report.json")).unwrap();
    assert_eq!(report_a, report_b);

    let doc: serde_json::Value = serde_json::from_slice(&report_a).unwrap();
    assert_eq!(doc["run_config"]["kappa"], 5);
    assert_eq!(doc["report"]["per_window"].as_array().unwrap().len(), 3);
}

#[test]
fn sequential_and_parallel_reports_match() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 300);
    let mut args = vec!["evaluate", "--method", "pca"];
    args.extend_from_slice(BASE);
    let seq = run(
        dir.path(),
        &[&args[..], &["--execution", "sequential", "-o", "s"]].concat(),
    );
    let par = run(
        dir.path(),
        &[&args[..], &["--execution", "parallel", "-o", "p"]].concat(),
    );
    assert!(seq.status.success() && par.status.success());
    let a = fs::read_to_string(dir.path().join("s/windows.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("p/windows.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["evaluate", "-i", "no_such_file.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("no_such_file.csv"), "{msg}");
    assert!(msg.contains("load"), "{msg}");
    assert_eq!(msg.trim().lines().count(), 1);
}

#[test]
fn invalid_kappa_fails_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "evaluate",
            "-i",
            "no_such_file.csv",
            "--kappa",
            "2",
            "-o",
            "out",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("kappa"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn gridsearch_full_table_and_best_config() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 300);
    let mut args = vec!["gridsearch", "--method", "kpca", "-o", "g"];
    args.extend_from_slice(BASE);
    let out = run(dir.path(), &args);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = fs::read_to_string(dir.path().join("g/grid.csv")).unwrap();
    assert_eq!(table.lines().count(), 46);

    let best = run(
        dir.path(),
        &["evaluate", "-c", "g/best_config.toml", "-o", "b"],
    );
    assert!(best.status.success(), "{}", stderr(&best));
}

#[test]
fn gridsearch_isolates_failed_combination() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 300);
    let mut args = vec![
        "gridsearch",
        "--method",
        "pca",
        "--kappas",
        "2,5",
        "--w-es",
        "3",
        "-o",
        "g",
    ];
    args.extend_from_slice(BASE);
    let out = run(dir.path(), &args);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = fs::read_to_string(dir.path().join("g/grid.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].contains("failed"), "{table}");

    let single = run(
        dir.path(),
        &[
            &args[..3],
            &["--kappas", "5", "--w-es", "3", "-o", "one"],
            BASE,
        ]
        .concat(),
    );
    assert!(single.status.success(), "{}", stderr(&single));
    let table = fs::read_to_string(dir.path().join("one/grid.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
}

#[test]
fn forecast_and_embed_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 200);
    let mut args = vec![
        "forecast",
        "--method",
        "pca",
        "--save-model",
        "m.json",
        "--save-embedder",
        "e.json",
        "-o",
        "f",
    ];
    args.extend_from_slice(BASE);
    let out = run(dir.path(), &args);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("f/forecast.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 50);
    assert!(matches!(
        load_model(dir.path().join("m.json")).unwrap(),
        SavedModel::Nsfts(_)
    ));
    assert!(matches!(
        load_model(dir.path().join("e.json")).unwrap(),
        SavedModel::Pca(_)
    ));

    let mut args = vec!["embed", "--method", "kpca", "-o", "e"];
    args.extend_from_slice(BASE);
    let out = run(dir.path(), &args);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("e/embedded.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201);
    assert_eq!(csv.lines().filter(|l| l.contains(",train,")).count(), 150);
}

#[test]
fn bad_cell_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "a,b\n1,2\n3,x\n4,5\n").unwrap();
    let out = run(
        dir.path(),
        &["forecast", "-i", "bad.csv", "--method", "pca"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 2"), "{}", stderr(&out));
}
