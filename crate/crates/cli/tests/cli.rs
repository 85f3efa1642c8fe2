use std::path::Path;
use std::process::{Command, Output};

fn cuspwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspwave")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_names_every_experiment() {
    let o = cuspwave(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["sharpness", "dispersion", "littlewood_paley", "invariants", "suite", "sobolev_failure_cosh"] {
        assert!(text.contains(name), "missing {name} in\n{text}");
    }
}

#[test]
fn dry_run_prints_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "experiment = sharpness\nparams.p = 6\nparams.q = 3\n");
    let out = dir.path().join("never");
    let o = cuspwave(&["run", "--config", &cfg, "--dry-run", "--seed", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("experiment = sharpness"));
    assert!(text.contains("seed = 9"));
    assert!(text.contains("\"p\":6"), "{text}");
    assert!(!out.exists(), "dry run must not write output");
}

#[test]
fn unknown_experiment_exits_1_with_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "experiment = nonsense\n");
    let o = cuspwave(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("nonsense") && err.contains("finite_speed") && err.contains("suite"), "{err}");
}

#[test]
fn config_errors_and_missing_files_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "experiment = finite_speed\ngeometry.kind = power\n");
    let o = cuspwave(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let o = cuspwave(&["run", "--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn passing_run_writes_reports_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", "experiment = littlewood_paley\nparams.samples = 4\n");
    let mut csvs = vec![];
    for sub in ["one", "two"] {
        let out = dir.path().join(sub);
        let o = cuspwave(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
        assert!(stdout(&o).contains("littlewood_paley Pass"));
        let json = std::fs::read_to_string(out.join("littlewood_paley.json")).unwrap();
        let report = cuspwave::experiments::ExperimentReport::from_json(&json).unwrap();
        assert_eq!(report.parameters["samples"], 4);
        csvs.push(std::fs::read(out.join("littlewood_paley.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert!(!csvs[0].is_empty());
}

#[test]
fn failing_verdict_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "a.cfg",
        &format!("experiment = littlewood_paley\nout_dir = \"{}\"\nparams.samples = 2\nparams.max_constant = 0.01\n", dir.path().join("o").display()),
    );
    let o = cuspwave(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAILED"));
}
