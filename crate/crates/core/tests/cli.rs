use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spi-ising"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn oracle_prints_optimum() {
    let o = bin(&["oracle", "--numbers", "2,4,5,6,9"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("optimum 0"), "{text}");
    assert!(text.contains("witness +1,"), "{text}");
}

#[test]
fn export_two_spin_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e");
    let o = bin(&[
        "export-patterns",
        "--spins",
        "+1,-1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(
        fs::read_to_string(out.join("pattern.pbm")).unwrap(),
        "P1\n2 2\n0 1\n1 0\n"
    );
}

#[test]
fn partition_solve_writes_balanced_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let o = bin(&[
        "partition",
        "--numbers",
        "1,2,5,6,7,9",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&out.join("result.json"));
    assert_eq!(r["problem"], "partition");
    assert_eq!(r["n"], 6);
    assert_eq!(r["seed"], 1);
    assert_eq!(r["best"]["groups"]["sum_a"], 15);
    assert_eq!(r["best"]["groups"]["sum_b"], 15);
    assert_eq!(r["oracle"]["matched"], true);
    assert_eq!(r["history_path"], "curve.csv");
    let csv = fs::read_to_string(out.join("curve.csv")).unwrap();
    assert!(csv.starts_with("iteration,best_objective,best_intensity\n"));
    assert!(out.join("curve.gp").exists());
}

#[test]
fn unreachable_target_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&[
        "partition",
        "--numbers",
        "1,2,4",
        "--target",
        "0",
        "--max-iters",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flags_exit_one_naming_the_flag() {
    let o = bin(&["partition", "--numbers", "1,2", "--k", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("--k") && err.contains("population_k must be >= 2"),
        "{err}"
    );
    assert_eq!(bin(&["partition"]).status.code(), Some(1));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_instance_file_is_an_error() {
    let o = bin(&["maxcut", "--instance", "/nonexistent/graph.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/graph.txt"));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("g.txt");
    fs::copy("tests/golden/maxcut_n6_seed1.txt", &inst).unwrap();
    let a = dir.path().join("a");
    let o = bin(&[
        "maxcut",
        "--instance",
        inst.to_str().unwrap(),
        "--backend",
        "noisy",
        "--sigma",
        "0.01",
        "--seed",
        "9",
        "--format",
        "json",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert!(o.status.code().is_some_and(|c| c != 1));
    let b = dir.path().join("b");
    let config = a.join("result.json");
    let o = bin(&[
        "maxcut",
        "--config",
        config.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.code().is_some_and(|c| c != 1));
    for f in ["result.json", "curve.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let r = read_json(&config);
    assert_eq!(r["config"]["backend"]["kind"], "noisy");
    assert_eq!(r["config"]["backend"]["gaussian_sigma"], 0.01);
}

#[test]
fn replay_backend_drives_the_solver() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    // Too short for a second iteration: the run stops with an error.
    fs::write(&trace, "# recorded\n1\n2\n3\n4\n5\n6\n").unwrap();
    let o = bin(&[
        "partition",
        "--numbers",
        "3,5,7,11",
        "--target",
        "-1",
        "--backend",
        "replay",
        "--replay",
        trace.to_str().unwrap(),
        "--out",
        dir.path().join("r").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("replay"));
}

#[test]
fn sweep_and_noise_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s");
    let o = bin(&[
        "sweep",
        "--n-from",
        "6",
        "--n-to",
        "8",
        "--n-step",
        "2",
        "--trials",
        "3",
        "--out",
        s.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(s.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(s.join("sweep.gp").exists());

    let nz = dir.path().join("n");
    let o = bin(&[
        "noise",
        "--numbers",
        "2,4,5,6,9",
        "--sigmas",
        "0,0.01",
        "--trials",
        "10",
        "--out",
        nz.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(nz.join("noise.csv")).unwrap();
    assert!(
        csv.starts_with("sigma,success_rate,mean_iterations\n0,"),
        "{csv}"
    );
}
