use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn critwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critwave"))
        .args(args)
        .output()
        .unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const SMALL: &str = r#"
name = "small"
n = 1
p_c = 2.5
mu1 = "pow:0.5"
mu2 = "pow:0.5"
amplitude = 0.01
t_max = 20.0
dt = 0.1
grid_points = 1024
snapshot_dt = 10.0
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn classify_and_curve() {
    let v = json_of(&critwave(&[
        "classify", "--mu1", "logpow:2", "--mu2", "logpow:2", "--q-c", "6",
    ]));
    assert_eq!(v["verdict"]["status"], "Converges");
    let v = json_of(&critwave(&[
        "classify", "--mu1", "pow:0.5", "--mu2", "logpow:1", "--n", "1", "--p-c", "2.5",
    ]));
    assert_eq!(v["q_c"], 6.0);
    let v = json_of(&critwave(&["curve", "--n", "2", "--p-c", "1.5"]));
    assert_eq!(v["pair"]["q_c"], 4.0);
    assert_eq!(v["pair"]["sigma"], 0.5);
    let bad = critwave(&["curve", "--n", "2", "--p-c", "3"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("partner"));
}

#[test]
fn simulate_writes_outcome_probes_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("o");
    let v = json_of(&critwave(&[
        "--out",
        out.to_str().unwrap(),
        "simulate",
        "--config",
        &cfg,
    ]));
    assert_eq!(v["status"], "ReachedTmax");
    assert!(v.get("t_star").is_none());
    assert_eq!(v["config_echo"]["p_c"], 2.5);
    let run = out.join("small");
    let csv = fs::read_to_string(run.join("probes.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,unknown,l1,l2,linf,h1");
    assert!(run.join("norms.svg").exists());
    let (field, t) = critwave::spectral::read_snapshot(&run.join("snapshots/u-00002.bin")).unwrap();
    assert_eq!(t, 20.0);
    assert_eq!(field.grid.points, 1024);
    assert!(run.join("snapshots/u-00002.bin.json").exists());
}

#[test]
fn simulate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    for o in ["a", "b"] {
        let out = dir.path().join(o);
        json_of(&critwave(&[
            "--out",
            out.to_str().unwrap(),
            "--threads",
            "2",
            "simulate",
            "--config",
            &cfg,
        ]));
    }
    let read = |o: &str| fs::read(dir.path().join(o).join("small/probes.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &format!("{SMALL}\nwarp = 9\n"));
    let out = critwave(&["--out", dir.path().to_str().unwrap(), "simulate", "--config", &cfg]);
    assert!(!out.status.success());
}

#[test]
fn picard_reports_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", &SMALL.replace("0.01", "0.001"));
    let v = json_of(&critwave(&[
        "--out",
        dir.path().to_str().unwrap(),
        "picard",
        "--config",
        &cfg,
        "--horizon",
        "10",
    ]));
    assert!(v["report"]["contraction_factor"].as_f64().unwrap() < 0.9);
    assert!(dir.path().join("small/picard.csv").exists());
}

#[test]
fn blowup_scan_emits_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
name = "scan"
n = 1
p_c = 2.5
mu1 = "logpow:1"
mu2 = "logpow:1"
amplitude = 0.5
u0 = 0.0
v0 = 0.0
u1 = 1.0
v1 = 1.0
t_max = 60.0
dt = 0.05
grid_points = 2048
snapshot_dt = 0.25
"#;
    let cfg = write(dir.path(), "scan.toml", text);
    let v = json_of(&critwave(&[
        "--out",
        dir.path().to_str().unwrap(),
        "blowup-scan",
        "--config",
        &cfg,
        "--ladder",
        "3,1.25,5",
    ]));
    assert_eq!(v["admissible_data"], true);
    assert!(v["max_deriv_residual"].as_f64().unwrap() < 0.05);
    let csv = fs::read_to_string(dir.path().join("scan/ledger.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "R,I_R,J_R,g_p,g_q,G_p,G_q,res1,res2,C_emp");
    assert_eq!(csv.lines().count(), 6);
    let bad = critwave(&[
        "--out",
        dir.path().to_str().unwrap(),
        "blowup-scan",
        "--config",
        &cfg,
        "--ladder",
        "3,1.25",
    ]);
    assert!(!bad.status.success());
}

#[test]
fn sweep_and_report_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"
name = "sw"
n = 1
p_c = 2.5
mu1 = "pow:0.5"
mu2 = "pow:0.5"
amplitude = 0.01
t_max = 5.0
dt = 0.1
grid_points = 512
sweep_amplitude = [0.01, 0.1]
sweep_moduli = ["pow:0.5;pow:0.5", "logpow:1;logpow:1"]
"#;
    let path = write(dir.path(), "sweep.toml", spec);
    for o in ["a", "b"] {
        let out = dir.path().join(o);
        let v = json_of(&critwave(&[
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "11",
            "sweep",
            "--spec",
            &path,
        ]));
        assert_eq!(v["runs"], 4);
        assert_eq!(v["seed"], 11);
    }
    let read = |o: &str| fs::read(dir.path().join(o).join("summary.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    let md = critwave(&["report", "--dir", dir.path().join("a").to_str().unwrap()]);
    assert!(md.status.success());
    assert!(String::from_utf8_lossy(&md.stdout).contains("sw-003"));
    assert!(dir.path().join("a/report.md").exists());
}

#[test]
fn linear_decay_with_gn_draws() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_of(&critwave(&[
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "3",
        "linear-decay",
        "--t-max",
        "400",
        "--gn-draws",
        "5",
    ]));
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports.iter().all(|r| r["verdict"] == "Pass"));
    assert_eq!(v["gn_monte_carlo"]["ratios"].as_array().unwrap().len(), 5);
    assert!(dir.path().join("linear_decay.svg").exists());
}
