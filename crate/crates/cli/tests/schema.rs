use chabauty_cli::fixtures;
use chabauty_cli::problem::{element_label, parse_rational, ProblemFile, SchemaError};
use chabauty_core::field::Field;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn c1_json() -> Value {
    serde_json::from_str(fixtures::get("c_1").unwrap()).unwrap()
}

fn load(v: &Value) -> Result<chabauty_cli::problem::Problem, SchemaError> {
    ProblemFile::from_json(&v.to_string())?.validate()
}

#[test]
fn fixtures_are_canonical_and_hashed_by_their_bytes() {
    for (stem, text) in fixtures::ALL {
        let file = ProblemFile::from_json(text).unwrap();
        assert_eq!(file.to_canonical(), text, "{stem} is not in canonical form");
        let problem = file.validate().unwrap();
        assert_eq!(problem.hash, hex::encode(Sha256::digest(text.as_bytes())));
    }
}

#[test]
fn fixture_shapes() {
    let c1 = load(&c1_json()).unwrap();
    assert_eq!(c1.mw.ngens(), 3);
    assert_eq!(c1.mw.points.len(), 5);
    assert_eq!(c1.mw.nf.degree(), 3);
    let i1 = fixtures::problem_file("case_i1").unwrap().validate().unwrap();
    assert_eq!(i1.mw.free.len(), 0);
    assert_eq!(i1.mw.torsion.len(), 1);
    assert_eq!(i1.mw.nf.degree(), 1);
}

#[test]
fn zero_denominator_is_rejected() {
    assert!(matches!(parse_rational("1/0", "x"), Err(SchemaError::Invalid { .. })));
    assert!(parse_rational("-5/4", "x").is_ok());
    let mut v = c1_json();
    v["curve"][0][0] = Value::String("1/0".into());
    assert!(matches!(load(&v), Err(SchemaError::Invalid { .. })));
}

#[test]
fn unknown_keys_are_rejected() {
    let mut v = c1_json();
    v["rank"] = Value::from(3);
    let err = load(&v).unwrap_err();
    assert!(matches!(err, SchemaError::Syntax { .. }), "{err}");
    assert!(err.to_string().contains("rank"));
}

#[test]
fn points_off_the_curve_are_rejected() {
    let mut v = c1_json();
    let pts = v["points"].as_array_mut().unwrap();
    let affine = pts.iter_mut().find(|p| p["at"].get("affine").is_some()).unwrap();
    affine["at"]["affine"]["y"][0] = Value::String("12345".into());
    let err = load(&v).unwrap_err();
    assert!(err.to_string().contains("not on the curve"), "{err}");
}

#[test]
fn wrong_coordinates_are_rejected() {
    let mut v = c1_json();
    let pts = v["points"].as_array_mut().unwrap();
    let last = pts.last_mut().unwrap();
    last["coords"][0] = Value::String("7".into());
    assert!(load(&v).is_err());
}

#[test]
fn labels_use_a_common_denominator() {
    let c0 = fixtures::problem_file("c_0").unwrap().validate().unwrap();
    let labels: Vec<String> = c0
        .mw
        .points
        .iter()
        .map(|kp| chabauty_cli::problem::point_label(&c0.mw.nf, &kp.point))
        .collect();
    assert!(labels.contains(&"∞".to_string()));
    assert!(labels.iter().any(|l| l.starts_with("((θ^2 + 2θ + 1)/3, ")), "{labels:?}");
    let nf = &c0.mw.nf;
    assert_eq!(element_label(nf, &nf.from_i64(-3)), "-3");
}
