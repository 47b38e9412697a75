use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_weylext"));
    c.env_remove("WEYLEXT_OUT");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &TempDir, body: &str) -> PathBuf {
    let p = dir.path().join("config.json");
    fs::write(&p, body).unwrap();
    p
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg(sub).arg("--config").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(out: &Path, sub: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(format!("{sub}.json"))).unwrap()).unwrap()
}

#[test]
fn shipped_configs_pass() {
    let tmp = TempDir::new().unwrap();
    for sub in ["ho-spectrum", "covariance", "shubin", "witness", "landau"] {
        let o = run(sub, &configs().join(format!("{sub}.json")), tmp.path(), &[]);
        assert_eq!(code(&o), 0, "{sub}: {}", String::from_utf8_lossy(&o.stderr));
        let r = report(tmp.path(), sub);
        assert_eq!(r["pass"], Value::Bool(true));
        assert_eq!(r["scenario"], Value::String(sub.into()));
        for key in ["tool", "version", "seed", "config", "grids", "tolerances", "checks", "details"] {
            assert!(r.get(key).is_some(), "{sub} report lacks {key}");
        }
    }
}

#[test]
fn empty_config_uses_defaults() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "{}");
    let o = run("ho-spectrum", &cfg, tmp.path(), &[]);
    assert_eq!(code(&o), 0);
    let r = report(tmp.path(), "ho-spectrum");
    assert_eq!(r["config"]["N"], 64);
    assert_eq!(r["grids"]["x"]["axes"][0]["points"], 64);
    assert_eq!(r["tolerances"]["max_eigenvalue_error"], 1e-6);
    let csv = fs::read_to_string(tmp.path().join("ho-spectrum_eigenvalues.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "j,eigenvalue,target,error");
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn zero_eigenvalues_is_an_empty_pass() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, r#"{"n_eigs": 0}"#);
    let o = run("ho-spectrum", &cfg, tmp.path(), &[]);
    assert_eq!(code(&o), 0);
    let r = report(tmp.path(), "ho-spectrum");
    assert_eq!(r["checks"].as_array().unwrap().len(), 0);
    assert_eq!(r["pass"], Value::Bool(true));
}

#[test]
fn unreachable_tolerance_exits_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, r#"{"tolerance": 1e-15}"#);
    let o = run("ho-spectrum", &cfg, tmp.path(), &[]);
    assert_eq!(code(&o), 1);
    let r = report(tmp.path(), "ho-spectrum");
    assert_eq!(r["pass"], Value::Bool(false));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn usage_and_config_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cases = [
        ("ho-spectrum", r#"{"N": 64, "bogus": 1}"#),
        ("ho-spectrum", "not json"),
        ("ho-spectrum", r#"{"N": 0}"#),
        ("ho-spectrum", r#"{"tolerance": -1}"#),
        ("ho-spectrum", r#"{"n_eigs": 1000}"#),
        ("covariance", r#"{"theta_range": [2.0, 1.0]}"#),
        ("shubin", r#"{"radii": [1.0, 2.0]}"#),
        ("witness", r#"{"chi": {"kind": "plane_wave", "offset": 99}}"#),
        ("witness", r#"{"spec": {"kind": "nope"}}"#),
    ];
    for (sub, body) in cases {
        let cfg = write_config(&tmp, body);
        let o = run(sub, &cfg, &out, &[]);
        assert_eq!(code(&o), 2, "{sub} {body}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run("ho-spectrum", &tmp.path().join("missing.json"), &out, &[]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&bin().arg("ho-spectrum").output().unwrap()), 2);
    assert_eq!(code(&bin().arg("no-such-subcommand").output().unwrap()), 2);
    let cfg = write_config(&tmp, "{}");
    assert_eq!(code(&run("ho-spectrum", &cfg, &out, &["--jobs", "0"])), 2);
    assert_eq!(code(&run("ho-spectrum", &cfg, &out, &["--seed", "-3"])), 2);
    assert!(!out.join("ho-spectrum.json").exists());
}

#[test]
fn reports_are_deterministic_per_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("covariance.json");
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert_eq!(code(&run("covariance", &cfg, &a, &["--seed", "42"])), 0);
    assert_eq!(code(&run("covariance", &cfg, &b, &["--seed", "42"])), 0);
    assert_eq!(code(&run("covariance", &cfg, &c, &["--seed", "43"])), 0);
    for f in ["covariance.json", "covariance_residuals.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
        assert_ne!(fs::read(a.join(f)).unwrap(), fs::read(c.join(f)).unwrap(), "{f}");
    }
    assert_eq!(report(&a, "covariance")["seed"], 42);
}

#[test]
fn environment_overrides_out() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "{}");
    let (flag, env) = (tmp.path().join("flag"), tmp.path().join("env"));
    let o = bin()
        .args(["ho-spectrum", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&flag)
        .env("WEYLEXT_OUT", &env)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(env.join("ho-spectrum.json").exists());
    assert!(!flag.exists());
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&bin().arg("--help").output().unwrap()), 0);
    assert_eq!(code(&bin().arg("--version").output().unwrap()), 0);
}

#[test]
fn custom_extension_matrix() {
    let tmp = TempDir::new().unwrap();
    let landau = r#"{"spec": {"kind": "custom", "n": 1, "k": 1,
        "s": {"half_dim": 2, "rows": [[0.5, 0, 0, -1], [0, 0.5, -1, 0], [0, 0.5, 1, 0], [0.5, 0, 0, 1]]}}}"#;
    let o = run("witness", &write_config(&tmp, landau), tmp.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(tmp.path(), "witness")["details"]["spec"]["s"]["half_dim"], 2);
    let shear = r#"{"spec": {"kind": "custom", "n": 1, "k": 1,
        "s": {"half_dim": 2, "rows": [[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]}}}"#;
    assert_eq!(code(&run("witness", &write_config(&tmp, shear), tmp.path(), &[])), 2);
}
