use std::path::{Path, PathBuf};

use minimax_cert::certify::Conclusion;
use minimax_cert::cones::ConstraintKind;
use minimax_cert::oracle::Tri;
use minimax_cert_cli::{load_problem, run, RunReport, EXIT_INPUT, EXIT_OK};

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["minimax-cert"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn write_problem(dir: &tempfile::TempDir, body: &str) -> PathBuf {
    let path = dir.path().join("p.json");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn loads_bundled_examples() {
    let l = load_problem(&example("sextic.json")).unwrap();
    assert_eq!(l.problem.f.to_string(), "-x1^2 + 2*x1*y1^3 - y1^6");
    assert_eq!(
        (l.point.x.as_slice(), l.point.y.as_slice()),
        (&[0.0][..], &[0.0][..])
    );
    let fair = load_problem(&example("fair.json")).unwrap();
    let cs = fair.problem.y_constraints.constraints();
    assert_eq!(cs.len(), 2);
    assert!(cs.iter().all(|c| c.kind == ConstraintKind::Le));
    assert_eq!(
        fair.problem.bounding_box,
        Some(vec![(-1.0, 1.0), (0.0, 1.0)])
    );
}

#[test]
fn candidate_dimension_mismatch_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(
        &dir,
        r#"{"n":1,"m":1,"objective":"x1*y1","candidate":{"x":[0,0],"y":[0]}}"#,
    );
    let (code, _, err) = invoke(&["certify", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("candidate has dimensions (2, 1)"), "{err}");
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(
        &dir,
        r#"{"n":1,"m":1,"objective":"x1","candidate":{"x":[0],"y":[0]},"extra":1}"#,
    );
    let (code, _, err) = invoke(&["certify", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(
        err.contains("unknown field `extra`") && err.contains("line 1"),
        "{err}"
    );
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        r#"{"n":1,"m":1,"objective":"x1 +* y1","candidate":{"x":[0],"y":[0]}}"#,
        r#"{"n":1,"m":1,"objective":"x2","candidate":{"x":[0],"y":[0]}}"#,
        r#"{"n":1,"m":1,"objective":"x1","y_constraints":[{"expr":"y1 - 1","kind":"le"}],"candidate":{"x":[0],"y":[2]}}"#,
        r#"{"n":1,"m":1,"objective":"x1","candidate":{"x":[0],"y":[0]},"box":[[1,-1],[0,1]]}"#,
        r#"{"n":1,"m":1,"objective":"x1","candidate":{"x":[0],"y":[0]},"options":{"grid":{"mesh_per_axis":4}}}"#,
    ] {
        let p = write_problem(&dir, body);
        assert_eq!(
            invoke(&["certify", p.to_str().unwrap()]).0,
            EXIT_INPUT,
            "{body}"
        );
    }
    assert_eq!(
        invoke(&["certify", "/nonexistent/problem.json"]).0,
        EXIT_INPUT
    );
    assert_eq!(invoke(&["frobnicate"]).0, EXIT_INPUT);
}

#[test]
fn certify_text_starts_with_conclusion() {
    let (code, out, _) = invoke(&["certify", example("cubic_quarter.json").to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out.lines().next(),
        Some("REFUTED (necessary condition fails: schur_necessary)")
    );
    assert!(out.contains("witness value -2.500000e-1"));
    let (_, out, _) = invoke(&["certify", example("cubic.json").to_str().unwrap()]);
    assert_eq!(
        out.lines().next(),
        Some("CERTIFIED (sufficient conditions proved)")
    );
}

#[test]
fn json_round_trips_and_is_deterministic() {
    let p = example("quartic.json");
    let args = ["--json", "--seed", "3", "oracle", p.to_str().unwrap()];
    let (code, a, _) = invoke(&args);
    assert_eq!(code, EXIT_OK);
    let (_, b, _) = invoke(&args);
    assert_eq!(a, b);
    let report: RunReport = serde_json::from_str(&a).unwrap();
    assert_eq!(report.seed, 3);
    assert!(report.input_digest.starts_with("sha256:") && report.input_digest.len() == 7 + 64);
    let again: RunReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);
    assert_eq!(
        report.certificate.unwrap().conclusion,
        Conclusion::Consistent
    );
    assert!(!report.assumptions.is_empty());
}

#[test]
fn tau_profile_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let (code, out, _) = invoke(&[
        "tau-profile",
        example("xy.json").to_str().unwrap(),
        "--mesh",
        "21",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("verdict calm"));
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta,tau_min,ratio");
    assert_eq!(lines.len(), 1 + 13 + 1);
    assert_eq!(lines[14], "# exponent=nan verdict=calm");
}

#[test]
fn tau_profile_rejects_non_max_side_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(
        &dir,
        r#"{"n":1,"m":1,"objective":"y1^2","candidate":{"x":[0],"y":[0]}}"#,
    );
    let (code, _, err) = invoke(&["tau-profile", p.to_str().unwrap(), "--mesh", "21"]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("not a local maximizer"), "{err}");
}

#[test]
fn box_only_classification() {
    let (code, out, _) = invoke(&[
        "--json",
        "classify",
        example("saddle.json").to_str().unwrap(),
        "--box-only",
    ]);
    assert_eq!(code, EXIT_OK);
    let r: RunReport = serde_json::from_str(&out).unwrap();
    let c = r.classification.unwrap();
    assert_eq!(c.nash.verdict, Tri::True);
    assert_eq!(c.local_minimax.verdict, Tri::Undetermined);
    assert!(c.tau_profile.is_none());
}
