use std::path::Path;

use nalgebra::DVector;
use uirecon_cli::config::{DelayChoice, ScenarioConfig, SystemChoice};
use uirecon_cli::{
    emit_plot_data, load_trajectory, prepare, run_scenario, save_trajectory, CliError,
};
use uirecon_core::{ExampleSystem, Trajectory};

#[test]
fn trajectory_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let awkward = [
        0.1,
        -1.0 / 3.0,
        1e-300,
        6.02214076e23,
        f64::MIN_POSITIVE,
        -0.0,
        2f64.sqrt(),
    ];
    let inputs: Vec<_> = awkward
        .iter()
        .map(|&v| DVector::from_vec(vec![v, -v]))
        .collect();
    let outputs: Vec<_> = awkward
        .iter()
        .map(|&v| DVector::from_vec(vec![v * 7.0, v.sin(), 1.0]))
        .collect();
    let traj = Trajectory::new(inputs, outputs).unwrap();
    let path = dir.path().join("t.csv");
    save_trajectory(&traj, &path).unwrap();
    let back = load_trajectory(&path).unwrap();
    for (a, b) in traj
        .inputs
        .iter()
        .chain(&traj.outputs)
        .zip(back.inputs.iter().chain(&back.outputs))
    {
        let bits = |v: &DVector<f64>| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a), bits(b));
    }
    let header = std::fs::read_to_string(&path).unwrap();
    assert!(header.starts_with("k,u_1,u_2,y_1,y_2,y_3\n"));
}

#[test]
fn non_finite_values_are_not_written() {
    let dir = tempfile::tempdir().unwrap();
    let traj = Trajectory::new(
        vec![DVector::from_element(1, f64::NAN)],
        vec![DVector::from_element(1, 1.0)],
    )
    .unwrap();
    assert!(save_trajectory(&traj, &dir.path().join("nan.csv")).is_err());
}

#[test]
fn empty_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "").unwrap();
    match load_trajectory(&path) {
        Err(CliError::Parse { line, .. }) => assert_eq!(line, 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn plot_data_has_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig {
        horizon: 100,
        ..ScenarioConfig::default()
    };
    let report = run_scenario(&cfg).unwrap();
    let path = dir.path().join("plot.csv");
    emit_plot_data(&report, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 101);
    assert_eq!(
        lines[0],
        "k,u_hat_1,u_hat_2,u_1,u_2,error_norm,residual_norm"
    );
    assert!(lines[1].starts_with("10,"));
}

#[test]
fn from_file_matches_generated_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let generated = ScenarioConfig {
        system: SystemChoice::Example(ExampleSystem::StableZeros),
        horizon: 60,
        ..ScenarioConfig::default()
    };
    let prepared = prepare(&generated).unwrap();
    save_trajectory(&prepared.offline, &dir.path().join("offline.csv")).unwrap();
    save_trajectory(&prepared.online, &dir.path().join("online.csv")).unwrap();
    let cfg_path = dir.path().join("scenario.toml");
    std::fs::write(
        &cfg_path,
        "system = \"from-file\"\ndata_file = \"offline.csv\"\nonline_file = \"online.csv\"\nstate_dim = 4\nL = 1\nhorizon = 60\n",
    )
    .unwrap();
    let loaded = ScenarioConfig::load(&cfg_path).unwrap();
    assert_eq!(loaded.delay, DelayChoice::Fixed(1));
    let a = run_scenario(&generated).unwrap();
    let b = run_scenario(&loaded).unwrap();
    assert_eq!(a.estimates, b.estimates);
    assert_eq!(a.certificate, b.certificate);
}

#[test]
fn dimension_mismatch_between_files_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.csv"), "k,u_1,y_1\n0,1,2\n1,2,3\n").unwrap();
    std::fs::write(dir.path().join("b.csv"), "k,u_1,u_2,y_1\n0,1,2,3\n").unwrap();
    let cfg_path = dir.path().join("s.toml");
    std::fs::write(
        &cfg_path,
        "system = \"from-file\"\ndata_file = \"a.csv\"\nonline_file = \"b.csv\"\nstate_dim = 1\nL = 0\n",
    )
    .unwrap();
    let cfg = ScenarioConfig::load(&cfg_path).unwrap();
    assert!(matches!(run_scenario(&cfg), Err(CliError::Config(_))));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = ScenarioConfig::load(&path).unwrap();
            assert_eq!(
                path.file_stem().unwrap().to_str().unwrap(),
                cfg.system.to_string()
            );
            seen += 1;
        }
    }
    assert_eq!(seen, 3);
}
