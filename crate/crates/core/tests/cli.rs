use affine_cs::cli::{resolve_out, OUT_ENV};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin(out: Option<&Path>, args: &[&str]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_affine-cs"));
    c.env_remove(OUT_ENV);
    if let Some(o) = out {
        c.arg("--out").arg(o);
    }
    c.args(args).output().unwrap()
}

fn runs(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

fn manifest(run: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn su11_success() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(Some(dir.path()), &["su11", "--q", "2", "--p", "1"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = runs(dir.path());
    assert_eq!(r.len(), 1);
    let m = manifest(&r[0]);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["exit_code"], 0);
    assert!(m["run_id"].as_str().unwrap().starts_with("su11-"));
    assert!(m["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
    let csv = std::fs::read_to_string(r[0].join("su11.csv")).unwrap();
    assert!(csv.starts_with("quantity,re,im\n"));
    assert!(csv.contains("alpha,1.2500000000000000e0,-1.0000000000000000e0"));
    assert!(!csv.contains('\r'));
}

#[test]
fn invalid_input_exits_one_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(Some(dir.path()), &["fiducial", "--nu", "0.4"]);
    assert_eq!(o.status.code(), Some(1));
    let m = manifest(&runs(dir.path())[0]);
    assert_eq!(m["status"], "failed");
    assert_eq!(m["failure"]["kind"], "invalid_input");
    assert!(m["failure"]["message"].as_str().unwrap().contains("nu"));
}

#[test]
fn parse_error_still_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(Some(dir.path()), &["evolve", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    let r = runs(dir.path());
    assert_eq!(r.len(), 1);
    let m = manifest(&r[0]);
    assert_eq!(m["command"], "evolve");
    assert_eq!(m["exit_code"], 1);
    let o = bin(Some(dir.path()), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(runs(dir.path()).len(), 2);
}

#[test]
fn help_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(Some(dir.path()), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for sub in [
        "fiducial", "figures", "evolve", "quantize", "su11", "identity",
    ] {
        assert!(String::from_utf8_lossy(&o.stdout).contains(sub));
    }
    assert!(runs(dir.path()).is_empty());
}

#[test]
fn failed_check_exits_two() {
    // a reference scale far from the states' widths leaves targets unresolved at N=32
    let dir = tempfile::tempdir().unwrap();
    let o = bin(
        Some(dir.path()),
        &[
            "evolve", "--size", "32", "--xi-ref", "3.758", "--times", "0,2",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    let m = manifest(&runs(dir.path())[0]);
    assert_eq!(m["failure"]["kind"], "check_failed");
    assert!(runs(dir.path())[0].join("fidelity.csv").exists());
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["fiducial", "--nu", "3", "--n", "1"];
    assert_eq!(bin(Some(dir.path()), &args).status.code(), Some(0));
    assert_eq!(bin(Some(dir.path()), &args).status.code(), Some(0));
    let r = runs(dir.path());
    assert_eq!(r.len(), 2);
    assert_ne!(r[0], r[1]);
    let name = "c_gamma_n1.csv";
    assert_eq!(
        std::fs::read(r[0].join(name)).unwrap(),
        std::fs::read(r[1].join(name)).unwrap()
    );
}

#[test]
fn out_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"out": "from-config"}"#).unwrap();
    let flag = Path::new("from-flag");
    assert_eq!(
        resolve_out(Some(flag), Some("from-env".into()), Some(&cfg)).unwrap(),
        flag
    );
    assert_eq!(
        resolve_out(None, Some("from-env".into()), Some(&cfg)).unwrap(),
        Path::new("from-env")
    );
    assert_eq!(
        resolve_out(None, Some("".into()), Some(&cfg)).unwrap(),
        Path::new("from-config")
    );
    assert_eq!(resolve_out(None, None, None).unwrap(), Path::new("runs"));
    std::fs::write(&cfg, r#"{"out": "x", "extra": 1}"#).unwrap();
    assert!(resolve_out(None, None, Some(&cfg)).is_err());

    let env_dir = dir.path().join("env");
    let o = Command::new(env!("CARGO_BIN_EXE_affine-cs"))
        .env(OUT_ENV, &env_dir)
        .args(["su11", "--q", "1", "--p", "0"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(runs(&env_dir).len(), 1);
}
