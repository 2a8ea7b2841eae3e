use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BASELINE: &str = r#"{
  "system": {"lambda": 1, "mu": 0.1, "gamma": 0.025, "q": 1, "p": 0.75, "f_new": 0.8},
  "protocol": {"jump": {"a": 0.3333333333333333, "b": 0.6}},
  "simulation": {"t_sim": 50, "samples": 2000, "seed": 7}
}"#;

const CATALOGUE: &str = r#"{
  "system": {"lambda": 1, "mu": 0.1, "gamma": 0.05, "q": 0.5},
  "protocol": {"id": 3, "rho": [0.8, 0.1, 0.1, 0.0]}
}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn entbuffer(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entbuffer"))
        .arg(args[0])
        .arg(config)
        .args(&args[1..])
        .env_remove("ENTBUFFER_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

#[test]
fn analyze_reports_closed_forms() {
    let dir = TempDir::new().unwrap();
    let out = entbuffer(&["analyze"], &write(&dir, "c.json", BASELINE));
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "availability"), "0.740740741");
    assert_eq!(field(&text, "avg_fidelity"), "0.841428571");
    assert_eq!(field(&text, "noise_threshold"), "always-beneficial");
    assert_eq!(field(&text, "pi_empty"), "0.259259259");
}

#[test]
fn analyze_fidelity_dependent_protocol_reports_bounds() {
    let dir = TempDir::new().unwrap();
    let out = entbuffer(&["analyze"], &write(&dir, "c.json", CATALOGUE));
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(field(&text, "availability").starts_with("n/a"));
    assert_eq!(field(&text, "availability_range"), "0.740740741,0.869565217");
}

#[test]
fn bad_configs_exit_with_code_2() {
    let dir = TempDir::new().unwrap();
    let missing = write(&dir, "m.json", r#"{"system": {"lambda": 1, "gamma": 0, "q": 1, "p": 0.5}, "protocol": {"name": "replacement"}}"#);
    let out = entbuffer(&["analyze"], &missing);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu"));

    let unknown = BASELINE.replace("\"q\": 1", "\"q\": 1, \"qq\": 2");
    let out = entbuffer(&["analyze"], &write(&dir, "u.json", &unknown));
    assert_eq!(out.status.code(), Some(2));

    let out = entbuffer(&["analyze"], &dir.path().join("absent.json"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_over_q_starts_at_no_pumping() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", BASELINE);
    let out = entbuffer(&["sweep", "--param", "q", "--from", "0", "--to", "1", "--steps", "11"], &cfg);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param_value,availability,avg_fidelity"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 11);
    // q = 0: every link is consumed or decays, F = (Γ/4 + μ F_new) / (Γ + μ)
    assert!((rows[0][2] - (0.025 / 4.0 + 0.08) / 0.125).abs() < 1e-9);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
    assert_eq!(rows[10][0], 1.0);

    let out = entbuffer(&["sweep", "--param", "q", "--from", "1", "--to", "0"], &cfg);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn regimes_band_and_trailer() {
    let dir = TempDir::new().unwrap();
    let out = entbuffer(&["regimes", "--steps", "5"], &write(&dir, "c.json", CATALOGUE));
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "q,avail_lower_p,f_lower,avail_upper_p,f_upper");
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[2], first[4]);
    assert_eq!(lines.len(), 1 + 5 + 3);
    assert!(text.contains("# universal_cap,0.95\n"));
    assert!(text.contains("# replacement_point,0.909090909,0.776086957\n"));
}

#[test]
fn simulate_is_reproducible_and_writes_levels() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", BASELINE);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = entbuffer(&["simulate", "--out", path.to_str().unwrap()], &cfg);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let d = dir.path().join("d.csv");
    let out = entbuffer(&["simulate", "--diagnostics", "--out", d.to_str().unwrap()], &cfg);
    assert!(out.status.success());
    let levels = std::fs::read_to_string(dir.path().join("d_levels.csv")).unwrap();
    assert!(levels.starts_with("level,empirical,stationary\nempty,"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("level_tv_distance"));
}

#[test]
fn simulate_without_arrivals_is_degenerate() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &BASELINE.replace("\"lambda\": 1", "\"lambda\": 0"));
    let out_path = dir.path().join("o.csv");
    let out = entbuffer(&["simulate", "--out", out_path.to_str().unwrap()], &cfg);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out_path.exists());
}

#[test]
fn invalid_thread_count_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_entbuffer"))
        .arg("simulate")
        .arg(write(&dir, "c.json", BASELINE))
        .env("ENTBUFFER_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

fn verify(fault: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_entbuffer"));
    cmd.arg("verify");
    if let Some(f) = fault {
        cmd.args(["--inject-fault", f]);
    }
    cmd.output().unwrap()
}

#[test]
fn verify_passes_clean_and_names_injected_faults() {
    let out = verify(None);
    assert_eq!(out.status.code(), Some(0));
    assert!(!stdout(&out).contains("FAIL"));

    let out = verify(Some("lower-slope"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bound-sandwich"));

    let out = verify(Some("bell-order"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("catalogue-vs-engine"));
}
