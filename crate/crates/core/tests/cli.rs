use std::process::{Command, Output};

use quantlab::report::{from_json, CSV_HEADER};

fn quantlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quantlab"))
        .args(args)
        .output()
        .expect("spawn quantlab")
}

fn run_u1_psh(dir: &std::path::Path, name: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    let out = quantlab(&[
        "run",
        "--model",
        "u1",
        "--suite",
        "psh",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

#[test]
fn passing_run_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = run_u1_psh(dir.path(), "r.json");
    let reports = from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(!reports.is_empty());
    assert!(reports
        .iter()
        .all(|r| r.pass && r.metadata["seed"] == 7 && r.metadata["model"] == "u1"));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read(run_u1_psh(dir.path(), "a.json")).unwrap();
    let b = std::fs::read(run_u1_psh(dir.path(), "b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn failing_check_exits_one() {
    let out = quantlab(&[
        "run",
        "--model",
        "u1",
        "--suite",
        "kahler",
        "--tol",
        "kahler.potential=1e-300",
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL kahler.potential"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["run", "--model", "e8"],
        vec!["run", "--suite", "everything"],
        vec![
            "run",
            "--tol",
            "no.such.check=1e-3",
            "--suite",
            "psh",
            "--model",
            "u1",
        ],
        vec!["run", "--tol", "missing_equals"],
        vec!["run", "--format", "xml"],
        vec!["emit", "--in", "/nonexistent/report.json"],
    ] {
        let out = quantlab(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = quantlab(&["run", "--model", "e8"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("u1"));
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# u1 psh\nmodel = u1\nsuite = psh\nseed = 3\n").unwrap();
    let out = quantlab(&["run", "--config", cfg.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let reports = from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(reports
        .iter()
        .all(|r| r.metadata["seed"] == 5 && r.check_id.starts_with("psh.")));
}

#[test]
fn emit_converts_formats() {
    let dir = tempfile::tempdir().unwrap();
    let path = run_u1_psh(dir.path(), "r.json");
    let input = path.to_str().unwrap();

    let json = quantlab(&["emit", "--in", input]);
    assert_eq!(json.stdout, std::fs::read(&path).unwrap());

    let csv =
        String::from_utf8(quantlab(&["emit", "--in", input, "--format", "csv"]).stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert!(lines.count() > 0);

    let svg = dir.path().join("r.svg");
    let out = quantlab(&[
        "emit",
        "--in",
        input,
        "--format",
        "svg",
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&svg)
        .unwrap()
        .trim_start()
        .starts_with("<svg"));
}
