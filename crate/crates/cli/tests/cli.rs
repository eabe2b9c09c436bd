use std::path::Path;
use std::process::{Command, Output};

fn smovqe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smovqe"))
        .args(args)
        .env("SMOVQE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gs_two_qubit_tfim() {
    let o = smovqe(&[
        "gs", "--model", "tfim", "--qubits", "2", "--j", "-1", "--h", "-1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let e: f64 = stdout(&o).trim().parse().unwrap();
    assert!((e + 5f64.sqrt()).abs() < 1e-10);
    assert!(stdout(&o).starts_with("-2.2360679"));
}

#[test]
fn gs_unknown_model_fails() {
    let o = smovqe(&["gs", "--model", "hubbard", "--qubits", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_names_file() {
    let o = smovqe(&["run", "--config", "missing.json"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("missing.json"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_exits_2() {
    let o = smovqe(&["run", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).to_lowercase().contains("usage"));
}

#[test]
fn invalid_config_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"seeds": [], "output_dir": "x"}"#).unwrap();
    let o = smovqe(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("seeds"), "{}", stderr(&o));
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn run_with_config_and_overrides_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"model": "tfim", "n_qubits": 3, "n_layers": 1, "shots_per_pauli": 100,
            "n_sweeps": 1, "seeds": [0, 1], "strategies": [{"variant": "BIASED"}],
            "output_dir": "unused"}"#,
    )
    .unwrap();
    let mut outs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = smovqe(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--strategies",
            "BIASED,REGULARIZED",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outs.push(out);
    }
    let metrics = read(&outs[0].join("metrics.csv"));
    assert_eq!(metrics, read(&outs[1].join("metrics.csv")));
    assert_eq!(
        read(&outs[0].join("aggregate.csv")),
        read(&outs[1].join("aggregate.csv"))
    );
    let text = String::from_utf8(metrics).unwrap();
    // 2 seeds x 2 strategies x D=12 steps
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 12);
    assert!(text.starts_with(
        "seed,strategy,t,d,estimate,true_energy,delta_energy,delta_fidelity,estimate_error,regularization_r,cumulative_shots\n"
    ));
}

#[test]
fn run_from_flags_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = smovqe(&[
        "run",
        "--qubits",
        "2",
        "--layers",
        "1",
        "--sweeps",
        "2",
        "--seeds",
        "0..3",
        "--measurement",
        "infinite",
        "--record-every",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    // D=8, 16 steps, every 4th kept: 4 rows per cell, 3 seeds x 4 strategies
    assert_eq!(text.lines().count(), 1 + 4 * 3 * 4);
}

#[test]
fn sweep_emits_one_aggregate_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid");
    let o = smovqe(&[
        "sweep",
        "--layers",
        "0",
        "--sweeps",
        "1",
        "--seeds",
        "0",
        "--strategies",
        "BIASED",
        "--grid-qubits",
        "5,7,10",
        "--grid-shots",
        "50,100,150,200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let listed: Vec<_> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(listed.len(), 12);
    for p in &listed {
        assert!(Path::new(p).is_file(), "{p}");
        assert!(p.ends_with("aggregate.csv"));
    }
}

#[test]
fn validate_small_suite_runs() {
    let o = smovqe(&["validate", "--reps", "2000"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 10, "{text}");
    assert!(text
        .lines()
        .all(|l| l.starts_with("PASS") || l.starts_with("FAIL")));
}
