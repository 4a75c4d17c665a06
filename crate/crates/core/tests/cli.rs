use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use iamcf::config::{DomainSpec, ExperimentConfig, MeshSpec, NormSpec, TGridSpec};
use iamcf::estimates::{BoundaryProfile, Resolution};
use serde_json::Value;

fn iamcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iamcf")).args(args).output().unwrap()
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_json().unwrap()).unwrap();
    path
}

fn small_wulff(norm: NormSpec) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(norm, DomainSpec::Wulff { radius: 1.0 });
    c.mesh = MeshSpec { layers: 32, rays: 128, segments: 128 };
    c.t_grid = TGridSpec::Auto { count: 8, lo_fraction: 0.05 };
    c
}

fn run_in(dir: &Path, cfg: &ExperimentConfig, cmd: &str, out: &str) -> Output {
    let config = write_config(dir, cfg);
    let out = dir.join(out);
    iamcf(&[cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--quiet"])
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn error_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn norm_info_for_euclidean() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), &small_wulff(NormSpec::Euclidean {}), "norm-info", "out");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let r = report(&tmp.path().join("out"));
    assert_eq!(r["command"], "norm-info");
    assert!(r["result"]["identities"]["max_violation"].as_f64().unwrap() <= 1e-12);
    assert!(r["result"]["c1"].as_f64().unwrap() <= 1e-12);
    assert!((r["result"]["wulff_perimeter"].as_f64().unwrap() - std::f64::consts::TAU).abs() <= 1e-6);
    assert!(tmp.path().join("out/wulff.svg").exists());
}

#[test]
fn solve_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_wulff(NormSpec::BlendLq { q: 4.0, lambda: 0.5 });
    cfg.solver.p = Some(1.3);
    for out in ["a", "b"] {
        let o = run_in(tmp.path(), &cfg, "solve", out);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["report.json", "iters.csv", "field.csv", "solve.svg"] {
        let (a, b) = (std::fs::read(tmp.path().join("a").join(file)).unwrap(), std::fs::read(tmp.path().join("b").join(file)).unwrap());
        assert!(!a.is_empty() && a == b, "{file} differs");
    }
}

#[test]
fn flow_recovers_the_radial_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_in(tmp.path(), &small_wulff(NormSpec::Euclidean {}), "flow", "out");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dir = tmp.path().join("out");
    let r = report(&dir);
    // u = log F° for Ω = 𝒲₁, so γ = 0.
    assert!(r["result"]["asymptotics"]["gamma_estimate"].as_f64().unwrap().abs() <= 2e-2);
    for f in ["levels.csv", "iters.csv", "levels.svg", "perimeter.svg"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let mut levels = csv::Reader::from_path(dir.join("levels.csv")).unwrap();
    assert_eq!(levels.headers().unwrap(), vec!["t", "R", "r", "theta", "perimeter_F", "components", "trusted"]);
    assert_eq!(levels.records().count(), 8);
}

#[test]
fn estimates_and_seed_override() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_wulff(NormSpec::Euclidean {});
    cfg.estimates.profiles = vec![BoundaryProfile::Constant, BoundaryProfile::Tilted { direction: [1.0, 0.0], contrast: 4.0 }];
    cfg.estimates.p_list = vec![2.0, 1.5];
    cfg.estimates.resolution = Resolution { layers: 12, rays: 48 };
    let config = write_config(tmp.path(), &cfg);
    let out = tmp.path().join("out");
    let o = iamcf(&["estimates", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "17"]);
    assert!(o.status.success());
    assert!(!o.stdout.is_empty());
    assert_eq!(report(&out)["rng_seed"], 17);
    assert_eq!(csv::Reader::from_path(out.join("estimates.csv")).unwrap().records().count(), 4);
}

#[test]
fn config_errors_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{ "schema": "iamcf.experiment/1", "norm": { "family": "octagon" }, "domain": { "kind": "wulff", "radius": 1 } }"#).unwrap();
    let cases = [
        vec!["solve", "--config", bad.to_str().unwrap()],
        vec!["solve", "--config", "/nonexistent/config.json"],
        vec!["flow"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = iamcf(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let e = error_json(&o);
        assert_eq!(e["exit_code"], 2);
        assert!(e["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
}

#[test]
fn solver_failure_exits_with_code_3() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_wulff(NormSpec::Euclidean {});
    cfg.solver.p = Some(1.1);
    cfg.solver.max_iter = 1;
    let o = run_in(tmp.path(), &cfg, "solve", "out");
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["error"], "NoConvergence");
}

#[test]
fn help_succeeds() {
    let o = iamcf(&["--help"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("norm-info"));
}
