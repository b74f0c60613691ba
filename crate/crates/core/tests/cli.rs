use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nystrompca"))
}

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(file)
}

fn run(args: &[&str]) -> std::process::Output {
    bin().args(args).output().expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect()
}

#[test]
fn methods_writes_both_splits() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "methods",
        "--data",
        data("fair.csv").to_str().unwrap(),
        "--target",
        "affairs",
        "--limit",
        "200",
        "--m",
        "30",
        "--max-d",
        "5",
        "--median-sigma",
        "--output",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.path().join("methods.csv"));
    assert_eq!(rows.len(), 10);
    for row in &rows {
        let nystrom: f64 = row[5].parse().unwrap();
        let kernel: f64 = row[6].parse().unwrap();
        assert!((0.0..=1.0 + 1e-9).contains(&nystrom));
        assert!((0.0..=1.0 + 1e-9).contains(&kernel));
    }
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(out.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(json["rows_used"], 200);
}

#[test]
fn bound_rows_are_monotone() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "bound",
        "--data",
        data("digits.csv").to_str().unwrap(),
        "--target",
        "digit",
        "--limit",
        "300",
        "--m",
        "30",
        "--samples",
        "8",
        "--output",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.path().join("bound.csv"));
    assert_eq!(rows.len(), 10);
    let bounds: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(bounds.windows(2).all(|w| w[1] >= w[0]));
    assert!(rows.iter().all(|r| r[1] == "uncentred"));
}

#[test]
fn regression_grid_and_scatter() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "regression",
        "--data",
        data("diabetes.csv").to_str().unwrap(),
        "--target",
        "progression",
        "--median-sigma",
        "--m",
        "60",
        "--d",
        "20",
        "--d-grid",
        "5,20,80",
        "--gamma-grid",
        "1e-3,1e-6",
        "--output",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = csv_rows(&out.path().join("regression_grid.csv"));
    // d = 80 exceeds m and is skipped.
    assert_eq!(grid.iter().filter(|r| r[0] == "nystrom_kpcr").count(), 2);
    assert_eq!(grid.iter().filter(|r| r[0] == "nystrom_krr").count(), 2);
    let scatter = csv_rows(&out.path().join("regression_scatter.csv"));
    assert_eq!(scatter.len(), 2 * 111);
}

#[test]
fn config_errors_exit_with_2() {
    let fair = data("fair.csv");
    let fair = fair.to_str().unwrap();
    for args in [
        vec!["methods", "--data", "/nonexistent/file.csv"],
        vec!["methods", "--data", fair, "--sigma", "-1"],
        vec!["methods", "--data", fair, "--sigma", "1", "--median-sigma"],
        vec!["bound", "--data", fair, "--kernel", "polynomial"],
        vec!["bound", "--data", fair, "--confidence", "1.5"],
        vec!["regression", "--data", fair],
        vec!["methods", "--data", fair, "--target", "nope"],
        vec!["methods", "--data", fair, "--limit", "50", "--m", "100"],
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let out = tempfile::tempdir().unwrap();
    let args = |dir: &Path| {
        vec![
            "methods".to_string(),
            "--data".into(),
            data("fair.csv").to_str().unwrap().into(),
            "--target".into(),
            "affairs".into(),
            "--limit".into(),
            "150".into(),
            "--m".into(),
            "20".into(),
            "--seed".into(),
            "11".into(),
            "--output".into(),
            dir.to_str().unwrap().into(),
        ]
    };
    let dir = out.path().join("run");
    assert!(bin().args(args(&dir)).status().unwrap().success());
    let first = std::fs::read(dir.join("methods.csv")).unwrap();
    assert!(bin().args(args(&dir)).status().unwrap().success());
    assert_eq!(first, std::fs::read(dir.join("methods.csv")).unwrap());
}

#[test]
fn tab_separated_headerless_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.tsv");
    let mut text = String::new();
    for i in 0..40 {
        let t = i as f64 / 7.0;
        text.push_str(&format!("{}\t{}\t{}\n", t.sin(), t.cos(), (2.0 * t).sin() + 0.1 * t));
    }
    std::fs::write(&path, text).unwrap();
    let o = run(&[
        "regression",
        "--data",
        path.to_str().unwrap(),
        "--no-header",
        "--delimiter",
        "tab",
        "--target",
        "column_2",
        "--m",
        "10",
        "--d",
        "5",
        "--gamma",
        "1e-6",
        "--output",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
