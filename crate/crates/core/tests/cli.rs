use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_shadowjob");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn classify_prints_type_and_class() {
    let o = run(&[
        "classify",
        "--message",
        "'x' was not declared in this scope",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "WasNotDeclared Dependency\n");
    let o = run(&[
        "classify",
        "--message",
        "cannot convert 'ProductError' to 'const char*'",
    ]);
    assert_eq!(stdout(&o), "CannotConvert TypeMismatch\n");
}

#[test]
fn taxonomy_lists_fourteen_types() {
    let o = run(&["classify", "--taxonomy"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("type,fragment,class"));
    assert_eq!(text.lines().count(), 15);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--top-k", "x"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn empty_input_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["analyze", "--input", p(dir.path()), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no builds found"), "{}", stderr(&o));
    let o = run(&["ingest-check", "--input", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_scenario_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"type_mixture":{"WasNotDeclared":0.4}}"#).unwrap();
    let o = run(&[
        "simulate",
        "--spec",
        p(&spec),
        "--out",
        p(&dir.path().join("c")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("type_mixture"), "{}", stderr(&o));
}

#[test]
fn simulate_analyze_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"seed": 4, "n_series": 120}"#).unwrap();
    let corpus = dir.path().join("corpus");
    let out = dir.path().join("out");

    let o = run(&["simulate", "--spec", p(&spec), "--out", p(&corpus)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(corpus.join("manifest.jsonl").exists());

    let o = run(&["ingest-check", "--input", p(&corpus)]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("ok: "));

    let o = run(&[
        "analyze",
        "--input",
        p(&corpus),
        "--out",
        p(&out),
        "--top-k",
        "2",
        "--normalize-time",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let correlations = std::fs::read_to_string(out.join("correlations.csv")).unwrap();
    assert_eq!(correlations.lines().count(), 1 + 2 + 1);
    assert!(!correlations.contains('\r'));
    let heatmaps = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with("heatmap_")
        })
        .count();
    assert_eq!(heatmaps, 2);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["options"]["normalize_time"], true);
    for s in report["per_type_summaries"].as_array().unwrap() {
        assert!(s["time"]["max"].as_f64().unwrap() <= 1.0);
    }

    let o = run(&["report", "--from", p(&out)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("AllErrors"));
    assert_eq!(
        run(&["report", "--from", p(dir.path())]).status.code(),
        Some(1)
    );
}

#[test]
fn thread_setting_is_validated() {
    let o = Command::new(BIN)
        .args(["classify", "--taxonomy"])
        .env("SHADOWJOB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
