use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> (Value, i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_superlift")).args(args).output().expect("binary runs");
    let text = String::from_utf8(out.stdout).unwrap();
    let v = serde_json::from_str(&text).unwrap_or(Value::Null);
    (v, out.status.code().unwrap(), text)
}

fn f(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn classify_sphere_reports_degree() {
    let (v, code, _) = run(&["classify-sphere", &f("sphere_z3.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["degree"], 3);
    assert_eq!(v["command"], "classify-sphere");
}

#[test]
fn torus_check_jacobi_has_chern_one() {
    let (v, code, _) = run(&["torus-check", &f("jacobi_type.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["chern"], 1);
    assert_eq!(v["trivial"], false);
}

#[test]
fn ns_verify_counts_pairs() {
    let (v, code, _) = run(&["ns-verify", "--family", "n1", "--max-n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["checked"], 55);
    let (v, code, _) = run(&["ns-verify", "--family", "n2-homogeneous", "--max-n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["mismatch_count"], 0);
}

#[test]
fn unknown_family_is_an_input_error() {
    let (v, code, _) = run(&["ns-verify", "--family", "n3", "--max-n", "1"]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "error");
    assert_eq!(v["operation"], "parse");
}

#[test]
fn verify_superconformal_pass_and_fail() {
    let (v, code, _) = run(&["verify-superconformal", &f("shift.json")]);
    assert_eq!((code, v["status"].as_str()), (0, Some("pass")));
    let (v, code, _) = run(&["verify-superconformal", &f("not_superconformal.json")]);
    assert_eq!((code, v["status"].as_str()), (1, Some("fail")));
}

#[test]
fn compose_and_functors_emit_maps() {
    let (v, code, _) = run(&["compose", &f("shift.json"), &f("shift.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["map"]["kind"], "n2");
    let dir = tempfile::tempdir().unwrap();
    let (v, code, _) = run(&["f1", &f("shift.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["map"]["kind"], "n1");
    let n1 = dir.path().join("n1.json");
    std::fs::write(&n1, serde_json::to_string(&v["map"]).unwrap()).unwrap();
    let (v, code, _) = run(&["f2", n1.to_str().unwrap()]);
    assert_eq!(code, 0);
    let orig: Value = serde_json::from_str(&std::fs::read_to_string(fixture("shift.json")).unwrap()).unwrap();
    assert_eq!(v["map"]["f"], orig["f"]);
}

#[test]
fn uniformize_writes_changes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("changes.json");
    let (v, code, _) = run(&["uniformize", &f("sphere_deformed.json"), "--emit-changes", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["degree"], 1);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["canonical"]["kind"], "n2");
    assert!(doc["steps"].is_array());
}

#[test]
fn torus_equiv_distinguishes_spin_from_zero() {
    let (v, code, _) = run(&["torus-equiv", &f("zero_type.json"), &f("spin_type.json")]);
    assert_eq!(code, 1);
    assert_eq!(v["equivalent"], false);
    let (v, code, _) = run(&["torus-equiv", &f("spin_type.json"), &f("spin_type.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["equivalent"], true);
}

#[test]
fn loop_exp_matches_operator_form() {
    let (v, code, _) = run(&["loop-exp", &f("loop.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["operator_difference"], 0.0);
    assert_eq!(v["max_residual"], 0.0);
}

#[test]
fn syntax_errors_report_lines() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"kind\": \"n2\",\n  \"f\": \n}").unwrap();
    let (v, code, _) = run(&["verify-superconformal", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(v["field"].as_str().unwrap().starts_with("line 4"), "{v}");
}

#[test]
fn schema_errors_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(fixture("shift.json")).unwrap()).unwrap();
    doc["g_plus"]["coeffs"]["0"]["terms"][0]["idx"] = serde_json::json!([2, 1]);
    std::fs::write(&p, doc.to_string()).unwrap();
    let (v, code, _) = run(&["verify-superconformal", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(v["field"], "$.g_plus.coeffs.0.terms[0].idx");
}

#[test]
fn generator_override_embeds_inputs() {
    let (v, code, _) = run(&["--L", "4", "classify-sphere", &f("sphere_deformed.json")]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["degree"], 1);
    let (_, code, _) = run(&["--L", "1", "classify-sphere", &f("sphere_deformed.json")]);
    assert_eq!(code, 2);
}

#[test]
fn reports_are_deterministic() {
    let a = run(&["torus-check", &f("jacobi_type.json")]).2;
    let b = run(&["torus-check", &f("jacobi_type.json")]).2;
    assert_eq!(a, b);
}
