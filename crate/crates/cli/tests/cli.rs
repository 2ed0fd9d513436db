use std::process::{Command, Output};

use nievergelt_cli::{Cell, Report};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nievergelt"))
        .args(args)
        .env("NIEVERGELT_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> Report {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    Report::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap()
}

#[test]
fn heat_table_rows() {
    let r = report(&["heat", "--slices", "1,2,4,8", "--final-time", "2", "--precision", "full"]);
    assert_eq!(r.manifest_value("command"), Some("heat"));
    assert_eq!(r.manifest_value("slices"), Some("1,2,4,8"));
    assert_eq!(r.manifest_value("workers"), Some("2"));
    let t = r.table("runs").unwrap();
    assert_eq!(t.cell(0, "T_comm"), Some(&Cell::Empty));
    for (i, n) in [1i64, 2, 4, 8].into_iter().enumerate() {
        assert_eq!(t.cell(i, "N"), Some(&Cell::Int(n)));
        assert_eq!(t.cell(i, "messages"), Some(&Cell::Int(n - 1)));
        assert!(t.cell(i, "error_vs_serial").unwrap().as_f64().unwrap() <= 1e-10);
    }
}

#[test]
fn wave_table_is_exact() {
    let r = report(&["wave", "--slices", "1,2,4", "--wave-points", "16", "--final-time", "1"]);
    let t = r.table("runs").unwrap();
    for i in 0..3 {
        assert!(t.cell(i, "error_vs_serial").unwrap().as_f64().unwrap() <= 1e-10);
    }
}

#[test]
fn scalar_single_cell() {
    let r = report(&["scalar-table", "--dt", "1e-4", "--cheb-points", "5", "--precision", "full"]);
    let err = r.table("errors").unwrap().cell(0, "M=5").unwrap().as_f64().unwrap();
    assert!((err - 5.0e-5).abs() <= 0.15 * 5.0e-5, "{err}");
}

#[test]
fn compare_columns_per_iteration_count() {
    let r = report(&["compare", "--dt", "1e-3", "--slices", "1,2", "--iterations", "0,2"]);
    let t = r.table("errors").unwrap();
    assert_eq!(t.headers, ["N", "nievergelt", "parareal k=0", "parareal k=2"]);
    assert_eq!(t.rows.len(), 2);
}

#[test]
fn output_file_and_markdown() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("heat.md");
    let out = run(&[
        "heat",
        "--slices",
        "1,2",
        "--final-time",
        "0.5",
        "--format",
        "markdown",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("| nievergelt | --- | 1 |"), "{text}");
}

#[test]
fn costmodel_builtin_fixture() {
    let r = report(&["costmodel", "--precision", "full"]);
    let params = r.table("parameters").unwrap();
    let tau_f = params.rows.iter().find(|row| row[0] == Cell::Text("tau_f".into())).unwrap()[1]
        .as_f64()
        .unwrap();
    assert!((tau_f - 0.0375).abs() <= 0.2 * 0.0375, "{tau_f}");
    assert_eq!(r.table("observations").unwrap().rows.len(), 9);
}

#[test]
fn synthetic_fixture_has_zero_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exact.txt");
    let mut text = String::new();
    for (dt, n, m) in [(1e-3, 4, 3), (1e-3, 8, 5), (5e-4, 16, 4), (2.5e-4, 32, 6)] {
        let steps = 0.5 / dt;
        let t = 0.04 * m as f64 * steps / n as f64 + 0.7 * n as f64 + 130.0;
        text.push_str(&format!("{dt}, {n}, {m}, {t}, 1.0\n"));
    }
    std::fs::write(&path, text).unwrap();
    let r = report(&["costmodel", "--fixture", path.to_str().unwrap(), "--precision", "full"]);
    let t = r.table("observations").unwrap();
    for i in 0..t.rows.len() {
        assert!(t.cell(i, "residual").unwrap().as_f64().unwrap().abs() <= 1e-8);
    }
}

#[test]
fn empty_fixture_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.txt");
    std::fs::write(&path, "# nothing here\n").unwrap();
    let out = run(&["costmodel", "--fixture", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no observations"));
}

#[test]
fn numerical_failure_names_slice_and_sample() {
    let out = run(&[
        "scalar-table",
        "--dt",
        "1e-3",
        "--cheb-points",
        "5",
        "--slices",
        "2",
        "--space-max",
        "8",
        "--step-policy",
        "strict",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("slice 0") && err.contains("sample"), "{err}");
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(run(&["heat", "--nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["heat", "--slices", "0"]).status.code(), Some(2));
    assert_eq!(run(&["heat", "--workers", "0"]).status.code(), Some(2));
    assert_eq!(run(&["heat", "--precision", "zero"]).status.code(), Some(2));
    assert_eq!(run(&["wave", "--wave-points", "7"]).status.code(), Some(2));
    assert_eq!(run(&["scalar-table", "--final-time", "1.5"]).status.code(), Some(2));
}
