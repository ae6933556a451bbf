use std::path::Path;
use std::process::{Command, Output};

use pleg_core::duality::VerifyReport;
use pleg_core::legendre::PairManifest;
use pleg_core::solver::SolutionManifest;
use pleg_core::torus_field::io;
use serde_json::Value;

fn pleg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pleg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn error_line(o: &Output) -> Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "stderr: {text}");
    serde_json::from_str(text.trim()).unwrap()
}

#[test]
fn solve_constant_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let o = pleg(&[
        "--command", "solve", "--boundary", "const:0.3", "--epsilon", "0.25", "--nx", "64", "--nt", "64", "--out",
        &out_arg(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: SolutionManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert!(m.residual_ma <= 1e-12);
    assert_eq!(m.margin_min, 1.0);
    assert_eq!((m.n, m.m), (64, 64));
    let u = io::read_strip(&dir.path().join("u.csv")).unwrap();
    let f = io::read_strip(&dir.path().join("f.csv")).unwrap();
    assert_eq!((u.intervals(), f.intervals()), (64, 64));
    assert!((u.at(32, 5) - (0.3 + 0.125 * (0.25 - 0.5))).abs() < 1e-12);
}

#[test]
fn verify_quadratic_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = pleg(&["--command", "verify", "--boundary", "quadratic", "--nx", "16", "--nt", "16", "--out", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: VerifyReport = serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(r.0.len(), 11);
    for (name, e) in &r.0 {
        if name != "laplace_as_printed" {
            assert!(e.sup_norm <= 1e-10, "{name}: {}", e.sup_norm);
        }
    }
}

#[test]
fn transform_bundle_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = pleg(&["--command", "transform", "--boundary", "cos:0.1", "--nx", "32", "--out", &out_arg(dir.path())]);
    assert!(o.status.success());
    let m: PairManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!((m.n, m.sizes.clone()), (1, vec![32]));
    assert!((m.margin_u - (1.0 - 0.2 * std::f64::consts::PI)).abs() < 1e-12);
    for name in ["u.csv", "f.csv", "det_g.csv", "det_h.csv", "x_of_y_0.csv"] {
        let path = dir.path().join(name);
        let field = io::read_field(&path).unwrap();
        assert_eq!(field.grid().len(), 32);
        assert_eq!(io::field_to_string(&field), std::fs::read_to_string(&path).unwrap());
    }
}

#[test]
fn sweep_cosine_is_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let o = pleg(&["--command", "sweep", "--boundary", "cosine01", "--out", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["uniform"], Value::Bool(true));
    assert!(s["factor"].as_f64().unwrap() <= 2.0);
    let norms = std::fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    assert!(norms.starts_with("epsilon,a,b,norm\n"));
    // 4 values of ε, 10 pairs with a+b ≤ 3
    assert_eq!(norms.lines().count(), 1 + 4 * 10);
    let margins = std::fs::read_to_string(dir.path().join("margins.csv")).unwrap();
    assert_eq!(margins.lines().count(), 5);
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = pleg(&["--command", "solve", "--boundary", "cos:0.05", "--nx", "32", "--out", &out_arg(d.path())]);
        assert!(o.status.success());
    }
    for name in ["u.csv", "f.csv", "manifest.json"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("res");
    std::fs::write(
        &cfg,
        format!(r#"{{"command": "solve", "boundary": "const:0", "epsilon": 0.5, "nx": 16, "out": {:?}}}"#, out),
    )
    .unwrap();
    let o = pleg(&["--config", cfg.to_str().unwrap(), "--epsilon", "0.2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: SolutionManifest = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.epsilon, 0.2);
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["--command", "solve", "--boundary", "cos:0.2"],
        vec!["--command", "solve", "--nx", "7"],
        vec!["--command", "solve", "--epsilon", "1.5"],
        vec!["--command", "frobnicate"],
        vec!["--command", "transform", "--boundary", "missing.csv"],
    ] {
        let mut args = args.clone();
        let out = out_arg(dir.path());
        args.extend(["--out", &out]);
        let o = pleg(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let e = error_line(&o);
        assert_eq!(e["exit_code"], 1);
        assert!(e["error"].is_string());
    }
    let e = error_line(&pleg(&["--command", "solve", "--boundary", "cos:0.2"]));
    assert_eq!(e["error"], "NotConvex");
}

#[test]
fn invariant_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // at N=16 the recovered cosine slices miss the data by far more than 1e-15
    let o = pleg(&[
        "--command", "solve", "--boundary", "cos:0.1", "--nx", "16", "--boundary-tolerance", "1e-15", "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_line(&o)["error"], "InvariantViolation");
}

#[test]
fn residual_bound_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = pleg(&[
        "--command", "solve", "--boundary", "cos:0.1", "--nx", "32", "--epsilon", "0.5", "--residual-bound", "1e-14",
        "--boundary-tolerance", "1e-3", "--out", &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "ResidualTooLarge");
}

#[test]
fn thread_cap_gives_same_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (d, threads) in [(&a, "1"), (&b, "4")] {
        let o = Command::new(env!("CARGO_BIN_EXE_pleg"))
            .env("PLEG_THREADS", threads)
            .args(["--command", "transform", "--boundary", "cos:0.1", "--nx", "32", "--out", &out_arg(d.path())])
            .output()
            .unwrap();
        assert!(o.status.success());
    }
    assert_eq!(
        std::fs::read(a.path().join("f.csv")).unwrap(),
        std::fs::read(b.path().join("f.csv")).unwrap()
    );
}
