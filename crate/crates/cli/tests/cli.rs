use std::path::Path;
use std::process::Command;

use plategoal::mesh::read_mesh;
use plategoal_cli::{ConvergenceTable, CSV_HEADER};

fn plategoal(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_plategoal"))
        .args(args)
        .output()
        .unwrap()
}

fn run_into(dir: &Path, extra: &[&str]) -> std::process::Output {
    let mut args = vec!["--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    plategoal(&args)
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn missing_problem_prints_usage_and_exits_1() {
    let out = plategoal(&[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--problem"), "{err}");
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn bad_flags_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        &["--problem", "example_3"][..],
        &["--problem", "example_1", "--mode", "red"],
        &["--problem", "example_1", "--theta", "1.5"],
        &["--problem", "example_1", "--levels", "0"],
        &["--problem", "example_1", "--sigma", "-2"],
        &["--problem", "example_1", "--frobnicate"],
    ] {
        let out = run_into(dir.path(), bad);
        assert_eq!(out.status.code(), Some(1), "{bad:?}");
        assert!(!out.stderr.is_empty());
    }
    assert!(!dir.path().join("convergence.csv").exists());
}

#[test]
fn solver_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // A penalty this small loses coercivity.
    let out = run_into(
        dir.path(),
        &[
            "--problem",
            "example_1",
            "--mode",
            "uniform",
            "--levels",
            "2",
            "--sigma",
            "1e-6",
        ],
    );
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn uniform_run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(
        dir.path(),
        &[
            "--problem",
            "example_1",
            "--mode",
            "uniform",
            "--levels",
            "2",
            "--emit-meshes",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "convergence.csv");
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    let table = ConvergenceTable::parse(&csv).unwrap();
    assert_eq!(table.n_rows(), 3);
    assert_eq!(table.column("ntri").unwrap(), vec![Some(2.0), Some(8.0), Some(32.0)]);
    assert!(table.column("seconds").unwrap().iter().all(Option::is_none));
    for row in csv.lines().skip(1) {
        let q_h = row.split(',').nth(3).unwrap();
        // 17 significant digits.
        assert_eq!(
            q_h.split('e').next().unwrap().replace(['.', '-'], "").len(),
            17,
            "{q_h}"
        );
    }

    // Plot data repeats the CSV columns verbatim.
    let cells: Vec<Vec<String>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    let col = |name: &str| CSV_HEADER.iter().position(|h| *h == name).unwrap();
    for (file, name) in [("err_vs_ndof.dat", "e_goal"), ("est_abs_vs_ndof.dat", "eta_abs")] {
        let lines: Vec<String> = read(dir.path(), file).lines().map(String::from).collect();
        assert_eq!(lines.len(), 3);
        for (line, row) in lines.iter().zip(&cells) {
            assert_eq!(*line, format!("{} {}", row[col("ndof")], row[col(name)]));
        }
    }
    let res = read(dir.path(), "est_res_vs_ndof.dat");
    for (line, row) in res.lines().zip(&cells) {
        assert_eq!(
            line,
            format!("{} {}", row[col("ndof")], row[col("eta_res")].trim_start_matches('-'))
        );
    }

    let rates = read(dir.path(), "rates.txt");
    assert!(rates.lines().any(|l| l.starts_with("e_goal ")));
    assert_eq!(table.slope("e_goal", 3).unwrap().map(|s| format!("{s:.16e}")), {
        let line = rates.lines().find(|l| l.starts_with("e_goal ")).unwrap();
        Some(line.split(' ').nth(1).unwrap().to_string())
    });

    for level in 0..3 {
        let m = read_mesh(dir.path().join(format!("mesh_{level:02}.txt"))).unwrap();
        assert_eq!(m.n_triangles(), 2 * 4usize.pow(level));
    }
}

#[test]
fn timing_fills_the_seconds_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["--problem", "example_2", "--levels", "1", "--timing"]);
    assert!(out.status.success());
    let table = ConvergenceTable::read(&dir.path().join("convergence.csv")).unwrap();
    assert!(table
        .column("seconds")
        .unwrap()
        .iter()
        .all(|s| s.is_some_and(|v| v >= 0.0)));
    assert!(!dir.path().join("mesh_00.txt").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "--problem",
        "example_2",
        "--mode",
        "adaptive",
        "--theta",
        "0.25",
        "--levels",
        "5",
    ];
    assert!(run_into(a.path(), &args).status.success());
    assert!(run_into(b.path(), &args).status.success());
    for file in [
        "convergence.csv",
        "rates.txt",
        "err_vs_ndof.dat",
        "est_abs_vs_ndof.dat",
        "est_res_vs_ndof.dat",
    ] {
        assert_eq!(read(a.path(), file), read(b.path(), file), "{file}");
    }
}

#[test]
fn normalized_goal_scales_the_goal_values() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["--problem", "example_1", "--mode", "uniform", "--levels", "1"];
    assert!(run_into(a.path(), &args).status.success());
    let mut normed = args.to_vec();
    normed.push("--normalized-goal");
    assert!(run_into(b.path(), &normed).status.success());
    let qa = ConvergenceTable::read(&a.path().join("convergence.csv"))
        .unwrap()
        .column("Q_h")
        .unwrap();
    let qb = ConvergenceTable::read(&b.path().join("convergence.csv"))
        .unwrap()
        .column("Q_h")
        .unwrap();
    for (x, y) in qa.iter().zip(&qb) {
        let ratio = y.unwrap() / x.unwrap();
        assert!((ratio - 16.0 / 7.0).abs() < 1e-12, "{ratio}");
    }
}
