use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doublephase")).args(args).arg("--out").arg(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.split_whitespace().next() == Some(key)).unwrap();
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

#[test]
fn norm_of_the_constant_field() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["norm", "--set", "phase.q=4", "--set", "norm.field=constant:1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let gamma = ((1.0 + 5f64.sqrt()) / 2.0).sqrt();
    assert!((value(&stdout(&o), "bisection") - gamma).abs() < 1e-9);
    assert!((value(&stdout(&o), "closed_form") - gamma).abs() < 1e-9);

    let o = run(d.path(), &["norm", "--set", "norm.field=constant:0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "bisection"), 0.0);
}

#[test]
fn validation_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["norm", "--set", "phase.q=2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("p < q"));
    for args in [
        &["eig", "--set", "bogus=1"][..],
        &["experiment", "nope"],
        &["experiment", "domains", "--set", "experiment.sizes=8,4"],
        &["eig", "--set", "phase.p=0.5"],
        &["eig", "--set", "phase.weight=checkerboard"],
        &["frobnicate"],
    ] {
        let o = run(d.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn strict_mode_reports_non_convergence() {
    let d = tempfile::tempdir().unwrap();
    let args = ["eig", "--set", "solver.max_iter=2", "--set", "phase.q=2", "--resolution", "128"];
    assert_eq!(run(d.path(), &args).status.code(), Some(0));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(run(d.path(), &strict).status.code(), Some(4));
}

#[test]
fn eig_is_deterministic_and_writes_its_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["eig", "--seed", "3", "--resolution", "128", "--set", "phase.weight=ramp:0,1"];
    for d in [&a, &b] {
        assert_eq!(run(d.path(), &args).status.code(), Some(0));
    }
    for f in ["eigenfunction.csv", "eigenpair.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let json = std::fs::read_to_string(a.path().join("eigenpair.json")).unwrap();
    assert!(json.contains("\"lambda\""));
}

#[test]
fn minimax_table_is_non_decreasing() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["eigm", "--set", "eigm.m_max=4", "--resolution", "128"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.path().join("minimax.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# schema=1 kind=minimax"));
    assert_eq!(lines.next(), Some("m,upper_bound,raw"));
    let bounds: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(bounds.len(), 4);
    assert!(bounds.windows(2).all(|w| w[0] <= w[1]), "{bounds:?}");
}

#[test]
fn experiments_run_and_write_reports() {
    let d = tempfile::tempdir().unwrap();
    for name in ["weyl", "largeexp"] {
        let o = run(d.path(), &["experiment", name, "--resolution", "256"]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}{}", stdout(&o), stderr(&o));
        assert!(d.path().join(format!("{name}.csv")).exists());
        assert!(d.path().join(format!("{name}.svg")).exists());
    }
}

#[test]
fn config_files_are_read_and_flags_override_them() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, "# unit square of exponents\nphase.p = 2\nphase.q = 4\nnorm.field = constant:1\nmesh.resolution = 64\n")
        .unwrap();
    let o = run(d.path(), &["norm", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("N=64"));
    assert!((value(&stdout(&o), "bisection") - 1.2720196495).abs() < 1e-9);

    let o = run(d.path(), &["norm", "--config", cfg.to_str().unwrap(), "--set", "phase.q=3"]);
    assert!((value(&stdout(&o), "modular") - 2.0).abs() < 1e-12);
    assert!((value(&stdout(&o), "bisection") - 1.2720196495).abs() > 1e-3);

    std::fs::write(&cfg, "phase.p 2\n").unwrap();
    assert_eq!(run(d.path(), &["norm", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
