use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = "\
gamma = 0.5
p = 1.5
sigma = 1.0
eta = 0.5
mu = 2.0
N = 1
L = 10.0
M = 64
dt = 0.01
T_max = 1.0
record_every = 5
";

fn fracmem(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracmem"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn verify_fracops_default_passes() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let out = fracmem(&["verify-fracops", "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let csv = fs::read_to_string(out_dir.join("verify-fracops.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("run_id,mode,check,lhs,rhs,residual,pass,seconds"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 12, "{} checks", rows.len());
    assert!(rows.iter().all(|r| r.contains(",true,")));
    assert!(rows.iter().all(|r| r.contains("[tol ")));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("verify-fracops.json")).unwrap()).unwrap();
    assert_eq!(json["records"].as_array().unwrap().len(), rows.len());
    assert!(!out_dir.join("verify-fracops.csv.partial").exists());
}

#[test]
fn forced_failure_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "f.toml", "mode = \"simulate\"\nforce_failure = true\n");
    let out_dir = dir.path().join("out");
    let out = fracmem(
        &["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()],
        &[("FRACMEM_T_max", "0.2"), ("FRACMEM_M", "32"), ("FRACMEM_dt", "0.01")],
    );
    assert_eq!(out.status.code(), Some(1), "{}{}", stdout(&out), stderr(&out));
    let csv = fs::read_to_string(out_dir.join("simulate.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",false,"));
}

#[test]
fn corrupt_config_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "mode = \"simulate\"\np = = 1.5\n");
    let out = fracmem(&["run", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    let missing = fracmem(&["run", "--config", dir.path().join("nope.toml").to_str().unwrap()], &[]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn violations_cite_rules() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "g.toml", "mode = \"simulate\"\ngamma = 1.0\n");
    let out = fracmem(&["run", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("γ<1"), "{}", stderr(&out));

    let cfg = write_config(dir.path(), "v.toml", "mode = \"verify-volterra\"\nb = 1.0\nc = 2.0\n");
    let out = fracmem(&["run", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("b²−4c>0"), "{}", stderr(&out));

    let cfg = write_config(dir.path(), "m.toml", "mode = \"simulate\"\ngamma = 1.5\np = 0.5\nM = 100\n");
    let out = fracmem(&["run", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    for rule in ["γ<1", "p>1", "power of two"] {
        assert!(err.contains(rule), "{rule} missing from {err}");
    }
}

#[test]
fn unknown_keys_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "u.toml", "mode = \"simulate\"\nsigmaa = 1.0\n[extra]\nx = 1\n");
    let out = fracmem(&["run", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("sigmaa") && err.contains("extra"), "{err}");
    let out = fracmem(&["echo-config"], &[("FRACMEM_nonsense", "1"), ("FRACMEM_mode", "simulate")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn echo_round_trips_with_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.toml", &format!("mode = \"simulate\"\n{SMALL}"));
    let first = fracmem(&["echo-config", "--config", &cfg, "--seed", "7"], &[("FRACMEM_P", "1.75")]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let text = stdout(&first);
    assert!(text.contains("p = 1.75") && text.contains("seed = 7"), "{text}");
    let again = write_config(dir.path(), "again.toml", &text);
    let second = fracmem(&["echo-config", "--config", &again], &[]);
    assert_eq!(stdout(&second), text);
}

fn simulate_into(dir: &Path, cfg: &str, jobs: &str) -> Output {
    fracmem(&["simulate", "--config", cfg, "--out", dir.to_str().unwrap(), "--jobs", jobs], &[])
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.toml", &format!("run_id = \"det\"\n{SMALL}"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(simulate_into(&a, &cfg, "1").status.success());
    assert!(simulate_into(&b, &cfg, "3").status.success());
    for name in ["det.csv", "det.plot.csv"] {
        let (x, y) = (fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
        assert!(!x.is_empty());
        assert!(x == y, "{name} differs");
    }
    // the JSON mirror also echoes the output path and thread count
    let json = |d: &Path| -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(d.join("det.json")).unwrap()).unwrap()
    };
    let (ja, jb) = (json(&a), json(&b));
    assert_eq!(ja["records"], jb["records"]);
    assert_eq!(ja["simulation"], jb["simulation"]);
    let plot = fs::read_to_string(a.join("det.plot.csv")).unwrap();
    assert!(plot.starts_with("t,w,u_sup,energy_proxy\n"));
}

#[test]
fn sweep_writes_one_plot_per_p() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "sw.toml",
        &format!("run_id = \"sw\"\np_values = [1.2, 1.5, 1.9, 2.0, 2.1, 3.0]\n{}", SMALL.replace("p = 1.5\n", "")),
    );
    let out_dir = dir.path().join("out");
    let out = fracmem(&["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()], &[]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1), "{}", stderr(&out));
    let mut plots: Vec<String> = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("sw.plot."))
        .collect();
    plots.sort();
    assert_eq!(plots.len(), 6, "{plots:?}");
    let summary = fs::read_to_string(out_dir.join("sw.sweep.csv")).unwrap();
    assert_eq!(summary.lines().count(), 7);
    assert!(summary.starts_with("p,p_gamma,classification,time,final_sup,plot_file,note\n"));
}

#[test]
fn duplicate_p_values_warn() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "d.toml",
        &format!("run_id = \"dup\"\np_values = [2.5, 2.5]\nT_max = 0.2\n{}", SMALL.replace("p = 1.5\n", "").replace("T_max = 1.0\n", "")),
    );
    let out_dir = dir.path().join("out");
    let out = fracmem(&["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary = fs::read_to_string(out_dir.join("dup.sweep.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.lines().nth(1).unwrap().contains("WARNING"));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_config(dir.path(), "s.toml", SMALL);
    let out = simulate_into(&blocker, &cfg, "1");
    assert_eq!(out.status.code(), Some(2));
}
