use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_attractorlab"))
}

fn run_in(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    bin()
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("ATTRACTORLAB_OUT")
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

const SHORT: &str = "t_end = 2\n";

#[test]
fn simulate_writes_one_row_per_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "t_end = 2\ndt = 0.01\n", &["simulate"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "trajectory.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t, l2_sq, h1_sq, laplace_sq, ht_norm_sq, h1t_norm_sq, delay_sup_sq, a_of_lu, bound_R0_sq"
    );
    assert_eq!(lines.count(), 201);
    assert!(read(dir.path(), "report.txt").contains("run_completed: pass"));
}

#[test]
fn verify_bounds_reports_the_key_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "t_end = 4\n", &["verify-bounds"]);
    assert_eq!(out.status.code(), Some(0));
    let report = read(dir.path(), "report.txt");
    assert!(report.contains("beta1_positive: pass"));
    assert!(report.contains("absorbing_bound_holds: pass"));
    assert!(report.contains("prefactor_is_two: pass"));
}

#[test]
fn dt_adjustment_is_announced() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "delay.k = 0.5\ndt = 0.003\nt_end = 1\n", &["simulate"]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning") && stderr.contains("0.0025"), "{stderr}");
    assert!(read(dir.path(), "report.txt").contains("dt: 0.0025"));
}

#[test]
fn faults_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "a.m = -1\n", &["simulate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    let out = run_in(dir.path(), "colour = blue\n", &["simulate"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run_in(dir.path(), SHORT, &["simulate", "--log-y"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run_in(dir.path(), SHORT, &["sweep", "--param", "delay.q", "--values", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = bin().arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let file = dir.path().join("plain-file");
    std::fs::write(&file, "").unwrap();
    let out = bin()
        .args(["simulate", "--out"])
        .arg(file.join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_verdicts_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // two close start times cannot contract a thousandfold
    let out = run_in(dir.path(), "dt = 0.01\n", &["pullback", "--taus", "-1,-1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let report = read(dir.path(), "report.txt");
    assert!(report.contains("contraction_below_1e-3: fail"));
    assert!(report.contains("diameters_strictly_decreasing: pass"));
}

#[test]
fn pullback_diameters_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "dt = 0.005\n", &["pullback", "--taus", "-5,-10,-20"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(read(dir.path(), "pullback.csv").lines().count() == 4);
}

#[test]
fn sweep_gates_invalid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "t_end = 1\ndt = 0.01\n",
        &["sweep", "--param", "a.m", "--values", "1,2.5"],
    );
    assert_eq!(out.status.code(), Some(0));
    let report = read(dir.path(), "report.txt");
    assert!(report.contains("row.0.status: validation-failed"));
    assert!(report.contains("row.1.status: ok"));
}

#[test]
fn svg_output_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "t_end = 1\ndt = 0.01\n",
        &["simulate", "--svg", "--log-y", "--columns", "l2_sq,h1_sq"],
    );
    assert_eq!(out.status.code(), Some(0));
    let svg = read(dir.path(), "plot.svg");
    assert!(svg.starts_with("<svg") && svg.contains("h1_sq"));
    let out = run_in(
        dir.path(),
        "t_end = 1\ndt = 0.01\n",
        &["simulate", "--svg", "--columns", "nope"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "t_end = 1\ndt = 0.01\n").unwrap();
    let target = dir.path().join("from-env");
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .env("ATTRACTORLAB_OUT", &target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(target.join("trajectory.csv").exists());
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "t_end = 2\ndt = 0.01\nseed = 17\n").unwrap();
    let run = |threads: &str, sub: &str| {
        let out_dir = dir.path().join(format!("{sub}-{threads}"));
        let status = bin()
            .args(["sweep", "--param", "delay.b", "--values", "0,0.2,0.4"])
            .args(["--threads", threads, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        (
            std::fs::read(out_dir.join("sweep.csv")).unwrap(),
            std::fs::read(out_dir.join("report.txt")).unwrap(),
        )
    };
    assert_eq!(run("1", "a"), run("4", "b"));
}
