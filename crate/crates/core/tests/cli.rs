mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;
use paf_core::cli::{GammaDoc, SignalsDoc};
use paf_core::correlate;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn paf() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_paf"));
    for var in [
        "PAF_TOL_ROOT",
        "PAF_TOL_CIRCLE",
        "PAF_TOL_RANK",
        "PAF_TOL_RESIDUAL",
    ] {
        cmd.env_remove(var);
    }
    cmd
}

fn run(cmd: &mut Command) -> (i32, Value, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().unwrap();
    let doc = serde_json::from_slice(&stdout).unwrap_or(Value::Null);
    (
        status.code().unwrap(),
        doc,
        String::from_utf8_lossy(&stderr).into_owned(),
    )
}

fn write_json(dir: &Path, name: &str, v: &impl serde::Serialize) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

#[test]
fn enumerate_example_fixture() {
    let (code, doc, err) = run(paf().arg("enumerate").arg(fixture("example_gamma.json")));
    assert_eq!(code, 0, "{err}");
    assert_eq!(doc["count"], 8);
    assert_eq!(doc["solutions"].as_array().unwrap().len(), 8);

    let pairs = doc["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 2);
    assert_eq!(pairs[0]["outer"], "inf");
    assert_eq!(pairs[0]["multiplicity"], 3);
    assert!((pairs[1]["outer"][0].as_f64().unwrap() + 2.0).abs() < 1e-9);
    assert!((pairs[1]["inner"][0].as_f64().unwrap() + 0.5).abs() < 1e-9);
    assert_eq!(pairs[1]["multiplicity"], 1);

    let circle = doc["circle"].as_array().unwrap();
    assert_eq!(circle.len(), 1);
    assert!((circle[0]["root"][0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(circle[0]["multiplicity"], 2);
}

#[test]
fn count_and_uniqueness() {
    let (code, doc, _) = run(paf().arg("count").arg(fixture("coprime_gamma.json")));
    assert_eq!(code, 0);
    assert_eq!(doc["count"], 1);

    let (code, doc, _) = run(paf().arg("count").arg(fixture("example_gamma.json")));
    assert_eq!(code, 0);
    assert_eq!(doc["count"], 8);
    assert_eq!(doc["multiplicities"], serde_json::json!([3, 1]));

    let (code, doc, _) = run(paf().arg("check-unique").arg(fixture("example_gamma.json")));
    assert_eq!(code, 0);
    assert_eq!(doc["unique"], false);
    let roots = doc["roots"].as_array().unwrap();
    assert!(roots.iter().any(|r| r["on_circle"] == true));

    let (code, doc, _) = run(paf().arg("check-unique").arg(fixture("coprime_gamma.json")));
    assert_eq!(code, 0);
    assert_eq!(doc["unique"], true);
}

#[test]
fn correlate_then_factorize_recovers_signals() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = rng(11);
    for trial in 0..5 {
        let x = random_signals(&mut rng, 2 + trial % 2, 4 + trial);
        let sig = write_json(dir.path(), "x.json", &SignalsDoc::from_signals(&x));
        let gamma = dir.path().join("g.json");
        let (code, _, err) = run(paf().arg("correlate").arg(&sig).arg("-o").arg(&gamma));
        assert_eq!(code, 0, "{err}");

        let (code, doc, err) = run(paf().arg("factorize").arg(&gamma));
        assert_eq!(code, 0, "{err}");
        assert!(doc["residual"].as_f64().unwrap() < 1e-8);
        let y: SignalsDoc = serde_json::from_value(doc.clone()).unwrap();
        let d = y.to_signals().unwrap().phase_distance(&x).unwrap();
        assert!(d < 1e-8, "trial {trial}: {d:e}");

        let out = dir.path().join("y.json");
        std::fs::write(&out, serde_json::to_string(&doc).unwrap()).unwrap();
        let (code, doc, err) = run(paf().arg("verify").arg(&gamma).arg(&out));
        assert_eq!(code, 0, "{err}");
        assert_eq!(doc["ok"], true);
    }
}

#[test]
fn gamma_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = rng(12);
    let x = random_signals(&mut rng, 3, 7);
    let sig = write_json(dir.path(), "x.json", &SignalsDoc::from_signals(&x));
    let (code, doc, _) = run(paf().arg("correlate").arg(&sig));
    assert_eq!(code, 0);
    let parsed: GammaDoc = serde_json::from_value(doc).unwrap();
    let g = parsed.to_gamma().unwrap();
    let expected = correlate(&x);
    for (a, b) in g.entries().iter().zip(expected.entries()) {
        for (u, v) in a.coeffs().iter().zip(b.coeffs()) {
            assert_eq!(u.re.to_bits(), v.re.to_bits());
            assert_eq!(u.im.to_bits(), v.im.to_bits());
        }
    }
}

#[test]
fn roots_and_gcd_commands() {
    let dir = tempfile::tempdir().unwrap();
    let a = serde_json::json!({"coeffs": [[0,0],[-1,0],[0.5,0],[0.5,0],[0,0],[0,0]]});
    let p = write_json(dir.path(), "a.json", &a);
    let (code, doc, err) = run(paf().arg("roots").arg(&p));
    assert_eq!(code, 0, "{err}");
    assert!((doc["leading"][0].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let roots = doc["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 4);
    assert!(roots
        .iter()
        .any(|r| r["root"] == "inf" && r["multiplicity"] == 2));

    // (z-1)(z+2) and (z-1)(z-3) share (z-1)
    let polys = serde_json::json!({"polys": [[[-2,0],[1,0],[1,0]], [[3,0],[-4,0],[1,0]]]});
    let p = write_json(dir.path(), "ps.json", &polys);
    let (code, doc, err) = run(paf().arg("gcd").arg(&p));
    assert_eq!(code, 0, "{err}");
    let g = doc["gcd"].as_array().unwrap();
    assert_eq!(g.len(), 2);
    assert!((g[0][0].as_f64().unwrap() + 1.0).abs() < 1e-9);
    assert!((g[1][0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(doc["sylvester_coprime"], false);

    let polys = serde_json::json!({"polys": [[[-2,0],[1,0],[1,0]], [[3,0],[-5,0],[1,0]]]});
    let p = write_json(dir.path(), "ps2.json", &polys);
    let (code, doc, _) = run(paf().arg("gcd").arg(&p));
    assert_eq!(code, 0);
    assert_eq!(doc["degree_bound"], 0);
    assert_eq!(doc["sylvester_coprime"], true);
}

#[test]
fn malformed_documents_exit_2() {
    for bad in [
        "malformed_truncated.json",
        "malformed_shape.json",
        "malformed_value.json",
    ] {
        let (code, _, err) = run(paf().arg("correlate").arg(fixture(bad)));
        assert_eq!(code, 2, "{bad}");
        assert!(err.starts_with("error:"), "{err}");
    }
    let (code, _, _) = run(paf().arg("correlate").arg(fixture("does_not_exist.json")));
    assert_eq!(code, 2);
    // a signals document is not a gamma document
    let (code, _, _) = run(paf().arg("enumerate").arg(fixture("coprime_signals.json")));
    assert_eq!(code, 2);
    let (code, _, _) = run(paf()
        .arg("--tol-root")
        .arg("-1")
        .arg("count")
        .arg(fixture("coprime_gamma.json")));
    assert_eq!(code, 2);
}

#[test]
fn math_errors_exit_3() {
    let (code, _, err) = run(paf()
        .arg("enumerate")
        .arg(fixture("non_palindromic_gamma.json")));
    assert_eq!(code, 3);
    assert!(err.contains("palindromic"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let zero = serde_json::json!({"coeffs": [[0,0],[0,0]]});
    let p = write_json(dir.path(), "z.json", &zero);
    let (code, _, _) = run(paf().arg("roots").arg(&p));
    assert_eq!(code, 3);
}

#[test]
fn budget_exceeded_exits_4() {
    let (code, _, err) = run(paf()
        .arg("oracle")
        .arg("--budget")
        .arg("3")
        .arg(fixture("example_gamma.json")));
    assert_eq!(code, 4, "{err}");
    let (code, doc, _) = run(paf().arg("oracle").arg(fixture("example_gamma.json")));
    assert_eq!(code, 0);
    assert_eq!(doc["count"], 8);
}

#[test]
fn tolerance_precedence_flag_over_env_over_default() {
    let dir = tempfile::tempdir().unwrap();
    let sols = dir.path().join("s.json");
    let gamma = fixture("example_gamma.json");
    let (code, _, _) = run(paf().arg("enumerate").arg(&gamma).arg("-o").arg(&sols));
    assert_eq!(code, 0);

    let (code, doc, _) = run(paf().arg("verify").arg(&gamma).arg(&sols));
    assert_eq!(code, 0);
    assert_eq!(doc["tolerance"], 1e-8);

    // env below the achievable residual makes verify fail
    let (code, _, _) = run(paf()
        .env("PAF_TOL_RESIDUAL", "1e-30")
        .arg("verify")
        .arg(&gamma)
        .arg(&sols));
    assert_eq!(code, 3);

    // the flag wins over the env
    let (code, doc, _) = run(paf()
        .env("PAF_TOL_RESIDUAL", "1e-30")
        .arg("--tol-residual")
        .arg("1e-6")
        .arg("verify")
        .arg(&gamma)
        .arg(&sols));
    assert_eq!(code, 0);
    assert_eq!(doc["tolerance"], 1e-6);
}

#[test]
fn output_is_deterministic() {
    let gamma = fixture("example_gamma.json");
    let a = paf().arg("enumerate").arg(&gamma).output().unwrap().stdout;
    let b = paf()
        .arg("--threads")
        .arg("1")
        .arg("enumerate")
        .arg(&gamma)
        .output()
        .unwrap()
        .stdout;
    assert_eq!(a, b);
}
