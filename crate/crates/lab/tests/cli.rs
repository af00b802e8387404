use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"
seed = 3
realizations = 6

[lattice]
dimension = 1
linear_size = 32
boundary = "periodic"

[disorder]
lambda = 1.0

[thermo]
temperature = 1.0
fermi_level = 0.0
"#;

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn acsigma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acsigma")).args(args).output().unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn sigma_writes_versioned_files_once() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("run");
    let args = ["sigma", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let o = acsigma(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = fs::read_to_string(out.join("sigma.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# format_version=1"));
    assert!(lines.next().unwrap().starts_with("# config="));
    assert!(lines.next().unwrap().starts_with("bin_left,bin_right,bin_center,sigma"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("sigma.json")).unwrap()).unwrap();
    assert_eq!(json["format_version"], 1);
    assert_eq!(json["config"]["lattice"]["linear_size"], 32);

    let again = acsigma(&args);
    assert_eq!(again.status.code(), Some(2));
    assert_eq!(stderr_json(&again)["error"]["kind"], "io");
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let mut tables = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = acsigma(&[
            "sigma",
            "--config",
            cfg.to_str().unwrap(),
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        tables.push(fs::read(out.join("sigma.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn invalid_config_names_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &SMALL.replace("linear_size = 32", "linear_size = 1"));
    let o = acsigma(&["sigma", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr_json(&o);
    assert_eq!(err["error"]["kind"], "config");
    assert!(err["error"]["field"].as_str().unwrap().contains("linear_size"), "{err}");

    let cfg = write_config(dir.path(), "typo.toml", &SMALL.replace("seed = 3", "sede = 3"));
    let o = acsigma(&["sigma", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_and_catches_injected_fault() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "small.toml", SMALL);
    let o = acsigma(&["verify", "--config", cfg.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("PASS") && l.contains("sum_rule")), "{stdout}");
    assert!(stdout.lines().any(|l| l.starts_with("SKIP") && l.contains("velocity_position")), "{stdout}");

    let faulty = format!("{SMALL}\n[verify]\nfault = \"negated_pair_weight\"\n");
    let cfg = write_config(dir.path(), "faulty.toml", &faulty);
    let o = acsigma(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr_json(&o);
    let failed = err["error"]["failed"].as_array().unwrap();
    assert!(failed.iter().any(|c| c["check"] == "positivity"), "{err}");
}

#[test]
fn absorb_requires_open_boundary() {
    let dir = TempDir::new().unwrap();
    let body = format!("{SMALL}\n[pulse]\namplitude = 1.0\nwidth = 4.0\ncarrier = 2.0\n");
    let cfg = write_config(dir.path(), "pulse.toml", &body);
    let o = acsigma(&["absorb", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "precondition");
}

#[test]
fn two_site_absorb_matches_golden_rule() {
    let dir = TempDir::new().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/two_site.toml");
    let out = dir.path().join("abs");
    let o = acsigma(&["absorb", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("absorb.json")).unwrap()).unwrap();
    let w_lin = json["result"]["report"]["w_lin"].as_f64().unwrap();
    // Golden rule for the single resonant pair at this pulse: 2π.
    assert!((w_lin / (2.0 * std::f64::consts::PI) - 1.0).abs() < 5e-3, "{w_lin}");
    assert!(out.join("trace.csv").exists());
}
