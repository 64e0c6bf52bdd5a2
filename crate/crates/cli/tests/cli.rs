use std::path::PathBuf;
use std::process::{Command, Output};

fn spec(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cayley")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn with_spec(cmd: &str, name: &str, extra: &[&str]) -> Output {
    let p = spec(name);
    let mut args = vec![cmd, "--spec", p.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn verify_forms_exact_and_float() {
    for extra in [&["--exact"][..], &[][..]] {
        let mut args = vec!["verify-forms"];
        args.extend_from_slice(extra);
        let o = run(&args);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        assert!(stdout(&o).contains("PASS    phi-wedge-phi-is-14-vol"));
    }
}

#[test]
fn verify_forms_exports_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("forms.json");
    let o = run(&["verify-forms", "--exact", "--json", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.ends_with('\n'));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "verify-forms");
    let phi = v["data"]["tables"]["forms"]["Phi"].as_array().unwrap();
    assert_eq!(phi.len(), 14);
    assert_eq!(phi[0]["indices"], serde_json::json!([1, 2, 3, 4]));
    assert_eq!(phi[0]["coeff"], 1);
    for c in v["checks"].as_array().unwrap() {
        for key in ["name", "sup", "mean", "samples", "verdict"] {
            assert!(c.get(key).is_some(), "{key} missing in {c}");
        }
    }
}

#[test]
fn verify_symbolic_single_identity() {
    let o = run(&["verify-symbolic", "--identity", "kappa_skew_hermitian"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("PASS    kappa_skew_hermitian"));
    assert!(out.contains("1 checks, 0 failed"));
}

#[test]
fn unknown_identity_is_a_usage_error() {
    let o = run(&["verify-symbolic", "--identity", "no_such_identity"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unknown identity"));
}

#[test]
fn json_on_stdout_is_the_only_stdout() {
    let o = run(&["verify-symbolic", "--identity", "dd_generators", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["checks"][0]["verdict"], "pass");
    assert!(stderr(&o).contains("dd_generators"));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["comass", "--samples", "many"])), 2);
    assert_eq!(code(&run(&["comass", "--samples", "0"])), 2);
    assert_eq!(code(&run(&["check-curve"])), 2);
}

#[test]
fn malformed_spec_points_at_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"schema": 1, "curve": {"kind": "fiber_polynomial", "coeffs": [[[1,0]], [["x",0]], [], []]}}"#,
    )
    .unwrap();
    let o = run(&["check-curve", "--spec", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("curve.coeffs[1]"), "{}", stderr(&o));

    std::fs::write(&path, r#"{"schema": 1, "search": {"n_starts": 2, "iters": 3}}"#).unwrap();
    let o = run(&["search-orbit", "--spec", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("search.iters"), "{}", stderr(&o));

    std::fs::write(&path, r#"{"schema": 7}"#).unwrap();
    let o = run(&["check-curve", "--spec", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("schema"));
}

#[test]
fn check_curve_on_the_line() {
    let o = with_spec("check-curve", "line.json", &["--samples", "4"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("PASS    pseudoholomorphic"));
    assert!(out.contains("I1 vanishes; image a point"));
}

#[test]
fn degree_of_the_conic() {
    // coarse quadrature: the defect is above 1e-6 but the degree is clear
    let o = with_spec("degree", "conic.json", &["--samples", "48", "--tol", "1e-3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("degree = -2 (integrality defect"));
    let o = with_spec("degree", "conic.json", &["--samples", "48"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn degree_needs_a_closed_curve() {
    let o = with_spec("degree", "orbit.json", &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn deform_refuses_fiber_curves() {
    let o = with_spec("deform", "line.json", &["--samples", "3"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("REFUSED I1-section"));
}

#[test]
fn deform_with_sections() {
    let o = with_spec("deform", "line_holomorphic_section.json", &["--samples", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("BothSmall"));
    let o = with_spec("deform", "line_antiholomorphic_section.json", &["--samples", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("BothLarge"));
    // the anti-holomorphic deformation is not Cayley
    let o = with_spec("check-cone", "line_antiholomorphic_section.json", &["--samples", "3"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn orbit_spec_is_cayley() {
    let o = with_spec("check-cone", "orbit.json", &["--samples", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn comass_is_reproducible() {
    let a = run(&["comass", "--samples", "16", "--seed", "3", "--json"]);
    let b = run(&["comass", "--samples", "16", "--seed", "3", "--json"]);
    assert_eq!(code(&a), 0);
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
        v.as_object_mut().unwrap().remove("timings_ms");
        v
    };
    assert_eq!(strip(&a), strip(&b));
}
