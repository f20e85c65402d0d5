use std::path::Path;
use std::process::{Command, Output};

fn uirecon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uirecon"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn certify_exit_code_follows_verdict() {
    for (system, code, verdict) in [
        ("stable-zeros", 0, "verdict: stable"),
        ("no-zeros", 0, "verdict: stable"),
        ("unstable-zero", 1, "verdict: unstable"),
    ] {
        let out = uirecon(&["certify", "--system", system]);
        assert_eq!(out.status.code(), Some(code), "{system}");
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.contains(verdict), "{stdout}");
    }
    let out = uirecon(&["certify", "--system", "unstable-zero"]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("|z| = 1.250000000"));
}

#[test]
fn errors_exit_with_two() {
    let out = uirecon(&["certify", "--system", "stable-zeros", "--N", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("state dimension"));
    let out = uirecon(&["run", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_is_reproducible_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "system = \"no-zeros\"\nhorizon = 500\nseed = 5\n").unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = uirecon(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--horizon",
            "30",
            "--L",
            "auto",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(report["estimates"].as_array().unwrap().len(), 30);
    assert_eq!(report["metadata"]["system"], "no-zeros");
    assert_eq!(report["metadata"]["config"]["seed"], 5);
    assert_eq!(report["metadata"]["estimation_start_step"], 10);
}

#[test]
fn parallel_batch_writes_one_report_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let status = uirecon(&[
        "run",
        "--system",
        "stable-zeros",
        "--horizon",
        "20",
        "--seed",
        "7",
        "--parallel",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    for i in 0..3 {
        let path = dir.path().join(format!("r-{i}.json"));
        let report: serde_json::Value =
            serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
        assert_eq!(report["metadata"]["config"]["seed"], 7 + i);
    }
}

#[test]
fn gen_data_and_oracle_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let oracle = dir.path().join("oracle.csv");
    let out = uirecon(&[
        "gen-data",
        "--system",
        "no-zeros",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().count(), 513);
    let out = uirecon(&[
        "invert-oracle",
        "--system",
        "no-zeros",
        "--horizon",
        "20",
        "--gain",
        "output-nulling",
        "--zero-state",
        "--out",
        oracle.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut reader = csv::Reader::from_path(Path::new(&oracle)).unwrap();
    for rec in reader.records() {
        let rec = rec.unwrap();
        let err: f64 = rec[rec.len() - 1].parse().unwrap();
        assert!(err <= 1e-8);
    }
}
