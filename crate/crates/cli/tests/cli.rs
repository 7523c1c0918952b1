use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn glnematic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glnematic")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let out = dir.join("out");
    let text = format!(
        r#"{{ {body}, "output_dir": {:?} }}"#,
        out.to_str().unwrap()
    );
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_on_constant_config_writes_zero_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#""epsilon": 0.1, "n": 16, "dt_requested": 0.001, "t_end": 0.01,
           "init": {"name": "constant"}, "snapshot_times": [0.01]"#,
    );
    let out = glnematic(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/energy.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,kinetic,dirichlet,penalty,total,diss_v,diss_d,l4_v,max_d,penalty_l2"
    );
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[1..8].iter().chain(&v[9..]).all(|&x| x == 0.0));
        rows += 1;
    }
    assert_eq!(rows, 11);
    assert!(!csv.contains('\r'));

    let snap = dir.path().join("out/snapshot_000.elgl");
    let out = glnematic(&["analyze", "--snapshot", snap.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0 concentration points"), "{text}");
}

#[test]
fn sweep_emits_scaling_table_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#""epsilon": 0.2, "n": 16, "dt_requested": 0.001, "t_end": 0.01,
           "init": {"name": "smooth-wave"}, "sample_every": 4"#,
    );
    let out = glnematic(&["sweep", "--config", &cfg, "--eps", "0.2,0.1,0.05,0.025"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("slope = "));
    let csv = fs::read_to_string(dir.path().join("out/scaling.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epsilon,sup_penalty_l2,grad_rho_l2sq,wedge_residual_max");
    assert_eq!(lines.len(), 5);
}

#[test]
fn compare_prints_distance_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#""epsilon": 0.1, "n": 16, "dt_requested": 0.001, "t_end": 0.005,
           "init": {"name": "smooth-wave"}"#,
    );
    let out = glnematic(&["compare", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("t,d_l2,v_l2,d_max\n"));
    assert_eq!(text.lines().count(), 7);
    assert!(dir.path().join("out/compare.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(glnematic(&[]).status.code(), Some(3));
    assert_eq!(glnematic(&["run"]).status.code(), Some(3));
    assert_eq!(glnematic(&["run", "--config", "/nonexistent.json"]).status.code(), Some(3));
    assert_eq!(glnematic(&["--help"]).status.code(), Some(0));

    let cfg = write_config(
        dir.path(),
        r#""epsilon": 0.1, "n": 16, "dt_requested": 0.001, "t_end": 0.01,
           "init": {"name": "vortex"}"#,
    );
    let out = glnematic(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vortex"));

    let cfg = write_config(
        dir.path(),
        r#""epsilon": 0.001, "n": 16, "dt_requested": 0.05, "t_end": 1.0,
           "enforce_dt_guard": false, "init": {"name": "smooth-wave"}"#,
    );
    let out = glnematic(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blow-up"));

    let bad = dir.path().join("bad.elgl");
    fs::write(&bad, b"NOPE").unwrap();
    let out = glnematic(&["analyze", "--snapshot", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad magic"));
}
