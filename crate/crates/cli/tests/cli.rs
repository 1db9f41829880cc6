use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rqec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rqec")).args(args).output().expect("binary runs")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn shipped_configs() -> Vec<PathBuf> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, out);
            } else if path.extension().is_some_and(|e| e == "toml") {
                out.push(path);
            }
        }
    }
    let mut out = Vec::new();
    walk(&configs_dir(), &mut out);
    out.sort();
    out
}

fn run_small(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--config",
        config.to_str().unwrap(),
        "--traj",
        "6",
        "--rounds",
        "2",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    rqec(&args)
}

fn column(csv_text: &str, name: &str) -> Vec<f64> {
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("case.toml");
    fs::write(&path, body).unwrap();
    path
}

const NOISELESS: &str = r#"
[model]
protocol = "measured"
gamma_h = 0.0
gamma_c = 0.0
n_c = 0.0

[run]
rounds = 3
n_traj = 4
master_seed = 1
"#;

#[test]
fn every_shipped_config_runs() {
    let configs = shipped_configs();
    assert!(configs.len() >= 30, "found {} configs", configs.len());
    let tmp = tempfile::tempdir().unwrap();
    for (i, cfg) in configs.iter().enumerate() {
        let out = tmp.path().join(i.to_string());
        let res = run_small(cfg, &out, &[]);
        assert!(res.status.success(), "{}: {}", cfg.display(), String::from_utf8_lossy(&res.stderr));
        let header = "round,step,time,f2_data,f2_ancilla,s_total,s_data,s_anc,n_traj";
        for name in ["metrics.csv", "rounds.csv"] {
            let text = fs::read_to_string(out.join(name)).unwrap();
            assert_eq!(text.lines().next(), Some(header), "{name}");
        }
        let rounds = fs::read_to_string(out.join("rounds.csv")).unwrap();
        assert_eq!(rounds.lines().count(), 3, "{}", cfg.display());
        assert!(fs::read_to_string(out.join("summary.txt")).unwrap().contains("master_seed ="));
    }
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = configs_dir().join("measured/entropy-cycle/fast-cooling.toml");
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run_small(&cfg, &a, &["--seed", "12"]).status.success());
    assert!(run_small(&cfg, &b, &["--seed", "12"]).status.success());
    for name in ["metrics.csv", "rounds.csv", "summary.txt"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let c = tmp.path().join("c");
    assert!(run_small(&cfg, &c, &["--seed", "13"]).status.success());
    assert_ne!(fs::read(a.join("metrics.csv")).unwrap(), fs::read(c.join("metrics.csv")).unwrap());
}

#[test]
fn noiseless_run_has_unit_data_fidelity() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), NOISELESS);
    let out = tmp.path().join("out");
    let res = rqec(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let text = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let f2 = column(&text, "f2_data");
    assert_eq!(f2.len(), 48);
    assert!(f2.iter().all(|v| *v == 1.0), "{f2:?}");
}

#[test]
fn cold_reservoir_at_zero_temperature_resets_the_ancillas() {
    let cfg = configs_dir().join("measured/cooling-temperature/nc-0.0.toml");
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = rqec(&[
        "run", "--config", cfg.to_str().unwrap(), "--traj", "200", "--rounds", "5", "--out", out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let text = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let steps = column(&text, "step");
    let anc = column(&text, "f2_ancilla");
    let cooled: Vec<f64> = steps.iter().zip(&anc).filter(|(s, _)| **s == 1.0).map(|(_, a)| *a).collect();
    assert_eq!(cooled.len(), 5);
    assert!(cooled.iter().all(|a| *a > 0.95), "{cooled:?}");
}

#[test]
fn oracle_run_reports_trace_distance() {
    let cfg = configs_dir().join("measured/entropy-cycle/fast-cooling.toml");
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = rqec(&[
        "run", "--config", cfg.to_str().unwrap(), "--traj", "40", "--rounds", "1", "--oracle", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    let line = summary.lines().find(|l| l.starts_with("oracle_trace_distance_max")).unwrap();
    let d: f64 = line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!(d > 0.0 && d <= 5.0 / 40f64.sqrt(), "{d}");
    let oracle = fs::read_to_string(out.join("oracle.csv")).unwrap();
    assert_eq!(oracle.lines().count(), 17);
}

#[test]
fn invalid_configs_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    for body in [
        NOISELESS.replace("n_c = 0.0", "n_c = 0.0\ngama_c = 1.0"),
        NOISELESS.replace("gamma_h = 0.0", "gamma_h = -1.0"),
        NOISELESS.replace("rounds = 3", "rounds = 0"),
        "not toml at all".to_string(),
    ] {
        let cfg = write_config(tmp.path(), &body);
        let res = rqec(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(2), "{body}");
    }
    let res = rqec(&["run", "--config", "/nonexistent/config.toml"]);
    assert_eq!(res.status.code(), Some(2));
    assert_eq!(rqec(&["run"]).status.code(), Some(2));
    assert_eq!(rqec(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verify_gates_reports_step_counts_and_passes() {
    let res = rqec(&["verify-gates"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    let steps: Vec<&str> = text
        .lines()
        .filter(|l| l.contains("_round"))
        .map(|l| l.split_whitespace().nth(2).unwrap())
        .collect();
    assert_eq!(steps, ["16", "68"]);
    assert!(text.contains("0 of 5 over"));
}

#[test]
fn perturbed_gates_fail_verification() {
    let res = rqec(&["verify-gates", "--perturb", "1e-3"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8(res.stdout).unwrap().contains("FAIL"));
}

#[test]
fn chain_report_gives_decay_constant() {
    let res = rqec(&["rate-model", "chain", "--alpha", "1e-3"]);
    assert!(res.status.success());
    let report = String::from_utf8(res.stderr).unwrap();
    let line = report.lines().find(|l| l.starts_with("fitted delta0 - 1:")).unwrap();
    let d: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((d - 4.2e-5).abs() < 1e-6, "{d}");
    let csv = String::from_utf8(res.stdout).unwrap();
    assert_eq!(column(&csv, "p0").len(), 400);
}

#[test]
fn ancilla_sweep_matches_the_thermal_formula() {
    let res = rqec(&["rate-model", "ancilla", "--n-c", "0,0.01,0.1,2"]);
    assert!(res.status.success());
    let csv = String::from_utf8(res.stdout).unwrap();
    let n_c = column(&csv, "n_c");
    for name in ["closed_form", "rate_steady_state", "integrated"] {
        for (n, f) in n_c.iter().zip(column(&csv, name)) {
            let expected = ((n + 1.0) / (2.0 * n + 1.0)).powi(3);
            assert!((f - expected).abs() < 1e-10, "{name} n_c={n}: {f}");
        }
    }
}

#[test]
fn rate_model_writes_files_with_out() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("rm");
    for model in ["cooling", "ancilla", "fss", "chain"] {
        let res = rqec(&["rate-model", model, "--out", out.to_str().unwrap()]);
        assert!(res.status.success(), "{model}");
        assert!(out.join(format!("{model}.csv")).exists());
    }
    assert!(out.join("chain_report.txt").exists());
    assert_eq!(rqec(&["rate-model", "chain", "--alpha", "2"]).status.code(), Some(2));
    assert_eq!(rqec(&["rate-model", "cooling", "--initial", "9"]).status.code(), Some(2));
}

#[test]
fn compare_overlays_trajectories_and_chain() {
    let cfg = configs_dir().join("measured/rate-comparison/gh-1e-3.toml");
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cmp");
    let res = rqec(&[
        "compare", "--config", cfg.to_str().unwrap(), "--traj", "20", "--rounds", "4", "--out", out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(out.join("compare.csv")).unwrap();
    let p0 = column(&text, "p0_chain");
    assert_eq!(p0.len(), 4);
    assert!(p0.windows(2).all(|w| w[1] < w[0]));

    let mf = configs_dir().join("measurement-free/entropy-cycle/fast-cooling.toml");
    let res = rqec(&["compare", "--config", mf.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}
