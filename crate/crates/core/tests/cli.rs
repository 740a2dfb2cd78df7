use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac-lab"))
        .args(args)
        .env("DIRAC_LAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL_SECTORS: &str = r#"
experiment = "sectors"

[potential]
family = "miller-simon"
gamma = 0.5

[sectors]
rho_max = 20.0
n = 300
k = 6
lambda = 3.0
m_sweep = [1, 4]
"#;

#[test]
fn writes_all_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_SECTORS);
    let out = dir.path().join("out");
    let o = run(&["sectors", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in ["report.json", "spectrum.csv", "gaps.csv", "residuals.csv"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["experiment"], "sectors");
    assert_eq!(report["passed"], true);
    let gaps = std::fs::read_to_string(out.join("gaps.csv")).unwrap();
    assert_eq!(gaps.lines().count(), 3);
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_SECTORS);
    let out = dir.path().join("out");
    let o = run(&[
        "sectors",
        "--config",
        &cfg,
        "--set",
        "sectors.max_gap_bound=1e-6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL max-gap-bound"));
    assert!(out.join("report.json").is_file());
}

#[test]
fn gamma_out_of_range_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_SECTORS);
    let o = run(&[
        "sectors",
        "--config",
        &cfg,
        "--set",
        "potential.gamma=1.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("potential.gamma"), "{err}");
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn unknown_experiment_and_key_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_SECTORS);
    assert_eq!(run(&["nope", "--config", &cfg]).status.code(), Some(2));
    let o = run(&["sectors", "--config", &cfg, "--set", "sectors.bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        run(&["sectors", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn rerun_from_report_reproduces_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_SECTORS);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = run(&[
        "sectors",
        "--config",
        &cfg,
        "--set",
        "sectors.k=5",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report = a.join("report.json");
    let o = run(&[
        "sectors",
        "--config",
        report.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in ["report.json", "spectrum.csv", "gaps.csv", "residuals.csv"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
}
