use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use actionlab_cli::{check_distinct_outputs, run_scenario, Scenario, EXIT_TOLERANCE, EXIT_USAGE};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_actionlab"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn every_bundled_scenario_parses_and_kinds_are_covered() {
    let mut kinds = std::collections::BTreeSet::new();
    let mut all = Vec::new();
    for entry in std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")).unwrap() {
        let p = entry.unwrap().path();
        let s = Scenario::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        kinds.insert(s.kind.label());
        all.push(s);
    }
    check_distinct_outputs(&all).unwrap();
    let expected = [
        "algebra",
        "bound-states",
        "classical",
        "keldysh",
        "oracle-compare",
        "oscillator",
        "path-integral",
        "scatter",
    ];
    assert_eq!(kinds.into_iter().collect::<Vec<_>>(), expected);
}

#[test]
fn flagship_square_pulse() {
    let s = Scenario::load(&example("square_pulse.json")).unwrap();
    let r = run_scenario(&s, 1.0).unwrap();
    assert!(r.passed(), "{}", r.summary());
    let pers = &r.data["persistence"];
    let want = actionlab_core::Complex64::from_polar((-0.5f64).exp(), std::f64::consts::FRAC_PI_4);
    assert!((pers[0].as_f64().unwrap() - want.re).abs() < 1e-10);
    assert!((pers[1].as_f64().unwrap() - want.im).abs() < 1e-10);
    let p = r.data["probabilities"].as_array().unwrap();
    assert_eq!(p.len(), 11);
    assert!((p[2].as_f64().unwrap() - (-1.0f64).exp() / 2.0).abs() < 1e-9);
}

#[test]
fn thermal_cycle_variance() {
    let s = Scenario::load(&example("thermal_cycle.json")).unwrap();
    let r = run_scenario(&s, 1.0).unwrap();
    assert!(r.passed(), "{}", r.summary());
    assert!((r.data["variance_oracle"].as_f64().unwrap() - 2.16395).abs() < 1e-5);
}

#[test]
fn run_writes_report_and_series() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["run", example("algebra.json").to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("[PASS] algebra"), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("algebra.json")).unwrap()).unwrap();
    assert_eq!(report["checks"].as_array().unwrap().len(), 15);
    let csv = std::fs::read_to_string(tmp.path().join("algebra.csv")).unwrap();
    assert!(csv.starts_with("identity,passed,failures\n"));
    let leftovers: Vec<_> = std::fs::read_dir(tmp.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| !e.file_name().to_string_lossy().starts_with("algebra."))
        .collect();
    assert!(leftovers.is_empty(), "temporary files left behind");
}

#[test]
fn tolerance_failure_exits_two_and_scale_loosens() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"{
        "name": "tight", "kind": "bound-states",
        "parameters": {
            "potential": {"kind": "delta", "strength": -1.0, "position": 0.0}, "mass": 1.0,
            "grid": {"x_min": -20.0, "x_max": 20.0, "intervals": 400},
            "expected": [-0.25], "tolerance": 1e-6
        },
        "output": {"path": "tight", "format": "json"}
    }"#;
    let f = write(tmp.path(), "tight.json", text);
    let out = run(&["run", f.to_str().unwrap()], &tmp.path().join("a"));
    assert_eq!(out.status.code(), Some(EXIT_TOLERANCE));
    assert!(String::from_utf8(out.stdout).unwrap().contains("[FAIL] tight"));
    let out = run(
        &["run", f.to_str().unwrap(), "--tolerance-scale", "1e6"],
        &tmp.path().join("b"),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stderr).unwrap().contains("loosened"));
}

#[test]
fn usage_errors_exit_64() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_json = write(tmp.path(), "a.json", "{ not json");
    let unknown_kind = write(
        tmp.path(),
        "b.json",
        r#"{"name":"b","kind":"tea","parameters":{},"output":{"path":"b","format":"json"}}"#,
    );
    let bad_param = write(
        tmp.path(),
        "c.json",
        r#"{"name":"c","kind":"classical","parameters":{"system":{"kepler":{"eccentricity":0.5}},"dt":-1.0,"steps":10},"output":{"path":"c","format":"json"}}"#,
    );
    let escaping = write(
        tmp.path(),
        "d.json",
        r#"{"name":"d","kind":"algebra","output":{"path":"../d","format":"json"}}"#,
    );
    for f in [&bad_json, &unknown_kind, &bad_param, &escaping] {
        let out = run(&["run", f.to_str().unwrap()], &tmp.path().join("out"));
        assert_eq!(out.status.code(), Some(EXIT_USAGE), "{}", f.display());
    }
    let missing = run(&["run", "/nonexistent/scenario.json"], tmp.path());
    assert_eq!(missing.status.code(), Some(EXIT_USAGE));
    let no_args = bin().output().unwrap();
    assert_eq!(no_args.status.code(), Some(EXIT_USAGE));
    let compare_wrong = run(&["compare", example("algebra.json").to_str().unwrap()], tmp.path());
    assert_eq!(compare_wrong.status.code(), Some(EXIT_USAGE));
    let dup = run(
        &[
            "run",
            example("algebra.json").to_str().unwrap(),
            example("algebra.json").to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(dup.status.code(), Some(EXIT_USAGE));
}

#[test]
fn numerical_failure_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let f = write(
        tmp.path(),
        "unbound.json",
        r#"{"name":"u","kind":"classical","parameters":{
            "system":{"explicit":{"masses":[1.0],"interaction":{"kind":"external","potential":{"kind":"coulomb","k":1.0}},
            "positions":[[1.0,0.0,0.0]],"momenta":[[0.0,2.0,0.0]]}},
            "dt":0.01,"steps":100,"average_window":0.5},
            "output":{"path":"u","format":"json"}}"#,
    );
    let out = run(&["run", f.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("not bound"));
}

#[test]
fn compare_prints_three_way_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &["compare", example("gaussian_compare.json").to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for m in ["closed_form", "fock_oracle", "lattice", "spectral", "convergence slope"] {
        assert!(text.contains(m), "missing {m}:\n{text}");
    }
    let csv = std::fs::read_to_string(tmp.path().join("gaussian_compare.csv")).unwrap();
    assert!(csv.starts_with("method,step,re,im,abs_err,rel_err\n"));
}
