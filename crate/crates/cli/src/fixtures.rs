//! The bundled problem files for the curves of the `x² + y³ = z¹⁰` descent.

use crate::problem::{ProblemFile, SchemaError};

/// `(file stem, contents)`, ordered `C_−2, …, C_2`, Case I.1, Case I.2.
pub const ALL: [(&str, &str); 7] = [
    ("c_minus2", include_str!("../fixtures/c_minus2.json")),
    ("c_minus1", include_str!("../fixtures/c_minus1.json")),
    ("c_0", include_str!("../fixtures/c_0.json")),
    ("c_1", include_str!("../fixtures/c_1.json")),
    ("c_2", include_str!("../fixtures/c_2.json")),
    ("case_i1", include_str!("../fixtures/case_i1.json")),
    ("case_i2", include_str!("../fixtures/case_i2.json")),
];

pub fn get(stem: &str) -> Option<&'static str> {
    ALL.iter().find(|(s, _)| *s == stem).map(|(_, c)| *c)
}

pub fn problem_file(stem: &str) -> Result<ProblemFile, SchemaError> {
    let text = get(stem).ok_or_else(|| SchemaError::Invalid { field: "fixture".into(), message: format!("no fixture {stem:?}") })?;
    ProblemFile::from_json(text)
}
