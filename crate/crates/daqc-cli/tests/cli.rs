use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use daqc::bench::{Mode, ResourceKind, XzProblem};
use daqc::executor::DqcMode;
use daqc::xz::XzOptions;
use tempfile::TempDir;

const ISING_DEMO: &str = r#"
name = "demo"
n_qubits = 3
t_final = 1.0
n_steps = [1]
modes = ["sdaqc", "bdaqc", "dqc"]
dt = [0.001]

[resource]
kind = "homogeneous"
J = 1.0

[target]
kind = "ising"
profile = { kind = "polynomial", J = 0.7, alpha = 0.5 }
"#;

const ISING_DEMO_JSON: &str = r#"{
  "name": "demo",
  "n_qubits": 3,
  "t_final": 1.0,
  "n_steps": [1],
  "modes": ["sdaqc", "bdaqc", "dqc"],
  "dt": [0.001],
  "resource": { "kind": "homogeneous", "J": 1.0 },
  "target": { "kind": "ising", "profile": { "kind": "polynomial", "J": 0.7, "alpha": 0.5 } }
}"#;

const XZ_PAPER: &str = r#"
name = "xz"
n_qubits = 5
t_final = 2.0
n_steps = [8, 12]
dt = [0.004]
initial_state = "ddudd"

[resource]
kind = "polynomial"
J = 0.5
alpha = 2.5

[target]
kind = "xz"
xx = { kind = "polynomial", J = 0.5, alpha = 0.5 }
xz = { kind = "polynomial", J = 0.5, alpha = 0.5 }
zx = { kind = "polynomial", J = 0.5, alpha = 0.5 }
zz = { kind = "polynomial", J = 0.5, alpha = 0.5 }

[noise]
seed = 3
runs = 4
"#;

fn daqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daqc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn daqc_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daqc"))
        .args(args)
        .env("DAQC_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(format!("{name}.toml"))
}

/// Data rows of a sweep CSV as `(sweep_var, mode, mean_fidelity, status)`.
fn rows(path: &Path) -> Vec<(f64, String, Option<f64>, String)> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(2)
        .map(|l| {
            let f: Vec<&str> = l.splitn(7, ',').collect();
            (f[0].parse().unwrap(), f[1].to_string(), f[2].parse().ok(), f[6].to_string())
        })
        .collect()
}

#[test]
fn compile_ising_demo() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "demo.toml", ISING_DEMO);
    let out = tmp.path().join("out");
    let o = daqc(&["compile", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let blocks = report["analog_blocks"].as_u64().unwrap();
    assert!((3..=4).contains(&blocks), "{blocks} blocks");
    assert_eq!(report["details"]["generators"].as_array().unwrap().len(), 3);
    let schedule = daqc::Schedule::from_json(&fs::read_to_string(out.join("schedule.json")).unwrap()).unwrap();
    assert_eq!(schedule.analog_count() as u64, blocks);
    assert!(out.join("config.resolved.toml").exists());
}

#[test]
fn four_qubit_corner_case_needs_fallback() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("n4");
    let o = daqc(&["compile", "--config", s(&preset("ising-n4")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    let msg = stderr(&o);
    assert!(msg.contains("N=4") && msg.contains("corner case"), "{msg}");
    assert!(msg.contains("--allow-fallback"), "{msg}");
    assert!(!out.join("schedule.json").exists());
    let o = daqc(&["compile", "--config", s(&preset("ising-n4")), "--out", s(&out), "--allow-fallback"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("schedule.json").exists());
}

#[test]
fn recompiling_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    for name in ["ising-demo", "figure6a"] {
        let (a, b) = (tmp.path().join(format!("{name}-a")), tmp.path().join(format!("{name}-b")));
        for dir in [&a, &b] {
            let o = daqc(&["compile", "--config", s(&preset(name)), "--out", s(dir)]);
            assert!(o.status.success(), "{}", stderr(&o));
        }
        for file in ["schedule.json", "report.json"] {
            assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{name}/{file}");
        }
    }
}

#[test]
fn toml_and_json_configs_agree() {
    let tmp = TempDir::new().unwrap();
    let toml_cfg = write(tmp.path(), "demo.toml", ISING_DEMO);
    let json_cfg = write(tmp.path(), "demo.json", ISING_DEMO_JSON);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(daqc(&["compile", "--config", s(&toml_cfg), "--out", s(&a)]).status.success());
    assert!(daqc(&["compile", "--config", s(&json_cfg), "--out", s(&b)]).status.success());
    for file in ["schedule.json", "report.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let ra = fs::read_to_string(a.join("config.resolved.toml")).unwrap();
    let rb = fs::read_to_string(b.join("config.resolved.toml")).unwrap();
    assert_eq!(ra.replace(s(&a), ""), rb.replace(s(&b), ""));
}

#[test]
fn invalid_configs_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        ("zero-steps.toml", ISING_DEMO.replace("n_steps = [1]", "n_steps = [0]")),
        ("bad-state.toml", ISING_DEMO.replace("dt = [0.001]", "dt = [0.001]\ninitial_state = \"udx\"")),
        ("unknown-field.toml", format!("colour = \"red\"\n{ISING_DEMO}")),
        ("bad-kind.toml", ISING_DEMO.replace("kind = \"ising\"", "kind = \"quartic\"")),
        ("not-toml.toml", "n_qubits = [".to_string()),
        ("bad-noise.toml", format!("{ISING_DEMO}\n[noise]\nr_s = -1.0\n")),
    ];
    for (name, text) in cases {
        let cfg = write(tmp.path(), name, &text);
        for cmd in ["compile", "run", "sweep"] {
            let out = tmp.path().join("out");
            let o = daqc(&[cmd, "--config", s(&cfg), "--out", s(&out)]);
            assert_eq!(o.status.code(), Some(2), "{cmd} {name}: {}", stderr(&o));
            assert!(!out.exists(), "{cmd} {name} wrote output before validating");
        }
    }
    let o = daqc(&["run", "--config", s(&tmp.path().join("missing.toml"))]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write(tmp.path(), "ok.toml", ISING_DEMO);
    let o = daqc_env(&["run", "--config", s(&cfg), "--out", s(&tmp.path().join("t"))], "zero");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_and_perturbation_is_named() {
    let o = daqc(&["verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8_lossy(&o.stdout);
    for module in [
        "pauli-core",
        "hamiltonian-models",
        "ising-compiler",
        "xz-compiler",
        "mbody-compiler",
        "executor",
        "noise-engine",
    ] {
        assert!(text.contains(&format!("[{module}]")), "no check for {module}");
    }
    let o = daqc(&["verify", "--perturb", "sign-matrix"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("verify failed: sign-spectrum"), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL sign-spectrum"));
}

#[test]
fn sweep_csv_has_versioned_header() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "demo.toml", ISING_DEMO);
    let out = tmp.path().join("out");
    let o = daqc(&["run", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("results.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# daqc sweep csv v1"));
    assert_eq!(
        lines.next(),
        Some("sweep_var,mode,mean_fidelity,stderr,total_analog_time,wall_time,status")
    );
    let r = rows(&out.join("results.csv"));
    let modes: Vec<&str> = r.iter().map(|r| r.1.as_str()).collect();
    assert_eq!(modes, ["sdaqc", "bdaqc@0.001", "dqc"]);
    assert!((r[0].2.unwrap() - 1.0).abs() < 1e-12, "commuting target is exact");
    assert!(r.iter().all(|r| r.3 == "ok"));
    assert!(out.join("config.resolved.toml").exists());
}

#[test]
fn failing_points_are_marked_and_the_sweep_continues() {
    let tmp = TempDir::new().unwrap();
    let text = ISING_DEMO
        .replace("dt = [0.001]", "dt = [0.001, 10.0]")
        .replace("n_steps = [1]", "n_steps = [1, 2]");
    let cfg = write(tmp.path(), "demo.toml", &text);
    let out = tmp.path().join("out");
    let o = daqc(&["sweep", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&out.join("results.csv"));
    assert_eq!(r.len(), 8);
    let bad: Vec<_> = r.iter().filter(|r| r.3 != "ok").collect();
    assert_eq!(bad.len(), 2);
    assert!(bad.iter().all(|r| r.1 == "bdaqc@10" && r.2.is_none() && r.3.starts_with("error: ")));
}

#[test]
fn noise_free_single_run_matches_ideal_curves() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "xz.toml", XZ_PAPER);
    let out = tmp.path().join("out");
    let o = daqc(&["sweep", "--config", s(&cfg), "--out", s(&out), "--runs", "1", "--no-noise"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let problem = XzProblem::paper(5, ResourceKind::Polynomial).unwrap();
    let r = rows(&out.join("results.csv"));
    assert_eq!(r.len(), 6);
    for (n, mode, f, status) in r {
        assert_eq!(status, "ok");
        let m = match mode.as_str() {
            "sdaqc" => Mode::Sdaqc,
            "dqc" => Mode::Dqc,
            _ => Mode::Bdaqc,
        };
        let ideal = problem
            .ideal_fidelity(m, n as usize, 0.004, DqcMode::DirectAta, &XzOptions::default())
            .unwrap();
        assert!((f.unwrap() - ideal).abs() <= 1e-12, "{mode} at {n}: {} vs {ideal}", f.unwrap());
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let tmp = TempDir::new().unwrap();
    let text = XZ_PAPER.replace("n_qubits = 5", "n_qubits = 3").replace("ddudd", "dud");
    let cfg = write(tmp.path(), "xz.toml", &text);
    let fidelities = |threads: &str| {
        let out = tmp.path().join(format!("t{threads}"));
        let o = daqc_env(&["sweep", "--config", s(&cfg), "--out", s(&out), "--seed", "17"], threads);
        assert!(o.status.success(), "{}", stderr(&o));
        rows(&out.join("results.csv"))
            .into_iter()
            .map(|r| (r.1, r.2.unwrap().to_bits()))
            .collect::<Vec<_>>()
    };
    let one = fidelities("1");
    assert_eq!(one, fidelities("3"));
    assert!(one.iter().any(|(_, f)| f64::from_bits(*f) < 1.0));
}

#[test]
fn raw_dump_and_plot_are_optional() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{ISING_DEMO}\n[noise]\nruns = 5\n\n[output]\nraw = true\nplot = true\n");
    let cfg = write(tmp.path(), "demo.toml", &text);
    let out = tmp.path().join("out");
    assert!(daqc(&["run", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    assert!(runs.starts_with("# daqc runs csv v1\nsweep_var,mode,run,fidelity\n"));
    assert_eq!(runs.lines().count(), 2 + 3 * 5);
    assert!(fs::read_to_string(out.join("results.svg")).unwrap().starts_with("<svg"));
    let plain = tmp.path().join("plain");
    let cfg = write(tmp.path(), "plain.toml", ISING_DEMO);
    assert!(daqc(&["run", "--config", s(&cfg), "--out", s(&plain)]).status.success());
    assert!(!plain.join("runs.csv").exists() && !plain.join("results.svg").exists());
}

#[test]
fn figure8_preset_compares_times_per_qubit_count() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("f8");
    let o = daqc(&["sweep", "--config", s(&preset("figure8")), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("results.csv")).unwrap();
    let mut by_n = std::collections::BTreeMap::new();
    for line in text.lines().skip(2) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[6], "ok");
        by_n.entry(f[0].parse::<f64>().unwrap() as usize)
            .or_insert_with(Vec::new)
            .push((f[1].to_string(), f[4].parse::<f64>().unwrap()));
    }
    assert_eq!(by_n.keys().copied().collect::<Vec<_>>(), [3, 5, 6, 7, 8]);
    for (n, v) in &by_n {
        let modes: Vec<&str> = v.iter().map(|x| x.0.as_str()).collect();
        assert_eq!(modes, ["daqc", "dqc-direct", "dqc-swap"]);
        assert!(v[0].1 < v[1].1 && v[0].1 < v[2].1, "N={n}: {v:?}");
    }
}

#[test]
fn every_preset_runs_its_first_point() {
    let tmp = TempDir::new().unwrap();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    let mut names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for fig in ["figure5", "figure6a", "figure6b", "figure7", "figure8", "figure9"] {
        assert!(names.contains(&format!("{fig}.toml")), "missing preset {fig}");
    }
    for name in names.iter().filter(|n| n.as_str() != "ising-n4.toml") {
        let out = tmp.path().join(name);
        let o = daqc(&["run", "--config", s(&dir.join(name)), "--out", s(&out), "--runs", "2"]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let csv = if name == "figure5.toml" { "couplings.csv" } else { "results.csv" };
        let text = fs::read_to_string(out.join(csv)).unwrap();
        assert!(text.starts_with("# daqc "), "{name}");
        assert!(!text.contains("error:"), "{name}: {text}");
        assert!(out.join("config.resolved.toml").exists());
    }
}
