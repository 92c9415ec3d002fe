//! Problem files: a curve over a number field, a basis of a finite-index
//! subgroup of its Mordell–Weil group, the known points, and run settings.
//!
//! Files are JSON. Integers and rationals are strings (`"-3"`, `"5/4"`),
//! number field elements are coefficient arrays in the power basis, and
//! Mumford pairs are coefficient arrays of `u` and `v`, lowest degree first.

use std::path::Path;

use chabauty_core::mumford::{Curve, CurvePoint, Divisor};
use chabauty_core::mwsieve::{AbstractMW, KnownPoint, PlaceKey};
use chabauty_core::numberfield::{NfElement, NumberField};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError::Invalid { field: field.into(), message: message.into() }
}

/// An element of `K` as rational coordinates in the power basis.
pub type ElementSpec = Vec<String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorSpec {
    pub u: Vec<ElementSpec>,
    pub v: Vec<ElementSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorsionSpec {
    pub divisor: DivisorSpec,
    pub order: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PointAt {
    Infinity,
    Affine { x: ElementSpec, y: ElementSpec },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub at: PointAt,
    /// `ȷ(Q)` on the free generators followed by the torsion generators.
    pub coords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimeBounds {
    /// Primes tried by the criterion, in order.
    pub criterion_pool: Vec<u64>,
    pub sieve_max: u64,
    pub saturation_max: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    pub residue_field: u64,
    pub cosets: usize,
    pub steps: usize,
}

/// How points of the curve map back to `x² + y³ = z¹⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FermatSpec {
    /// `Y² = 3(4ε^(−s)X⁵ − ε^(2s))` over `Q(∛2)`, `y` even.
    Family { s: i64 },
    /// `Y² = 3(X⁵ − 1)`, `y` odd and `3 ∤ z`.
    CaseI1,
    /// `Y² = X⁵ − 3⁷`, `y` odd and `3 | z`.
    CaseI2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    /// Monic integer defining polynomial of `K`, lowest degree first.
    pub field: Vec<String>,
    /// Coefficients of `f`, lowest degree first.
    pub curve: Vec<ElementSpec>,
    pub basis: Vec<DivisorSpec>,
    pub torsion: Vec<TorsionSpec>,
    pub points: Vec<PointSpec>,
    /// Index into `points` of the Abel–Jacobi base point.
    pub base_point: usize,
    pub smoothness_bound: u64,
    pub precision: i64,
    pub primes: PrimeBounds,
    pub caps: Caps,
    /// `[p, index]` pairs overriding the greedy sieve schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<[u64; 2]>>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fermat: Option<FermatSpec>,
}

/// A validated problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub file: ProblemFile,
    pub mw: AbstractMW,
    /// SHA-256 of the canonical encoding.
    pub hash: String,
}

impl Problem {
    pub fn schedule(&self) -> Option<Vec<PlaceKey>> {
        self.file
            .schedule
            .as_ref()
            .map(|s| s.iter().map(|&[p, index]| PlaceKey { p, index: index as usize }).collect())
    }
}

pub fn parse_rational(s: &str, field: &str) -> Result<BigRational, SchemaError> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num.trim().parse().map_err(|_| invalid(field, format!("bad integer in {s:?}")))?;
    let den: BigInt = den.trim().parse().map_err(|_| invalid(field, format!("bad denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(invalid(field, format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_element(nf: &NumberField, e: &ElementSpec, field: &str) -> Result<NfElement, SchemaError> {
    if e.len() > nf.degree() {
        return Err(invalid(field, format!("{} coordinates for a field of degree {}", e.len(), nf.degree())));
    }
    let coeffs = e
        .iter()
        .enumerate()
        .map(|(i, s)| parse_rational(s, &format!("{field}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(nf.from_coeffs(&coeffs))
}

pub fn format_element(nf: &NumberField, e: &NfElement) -> ElementSpec {
    let mut c: Vec<String> = e.coeffs().iter().map(format_rational).collect();
    c.resize(nf.degree(), "0".into());
    c
}

fn parse_poly(nf: &NumberField, p: &[ElementSpec], field: &str) -> Result<Vec<NfElement>, SchemaError> {
    p.iter().enumerate().map(|(i, e)| parse_element(nf, e, &format!("{field}[{i}]"))).collect()
}

pub fn parse_divisor(curve: &Curve<NumberField>, d: &DivisorSpec, field: &str) -> Result<Divisor<NfElement>, SchemaError> {
    let u = parse_poly(&curve.k, &d.u, &format!("{field}.u"))?;
    let v = parse_poly(&curve.k, &d.v, &format!("{field}.v"))?;
    curve.make_divisor(&u, &v).map_err(|e| invalid(field, e.to_string()))
}

pub fn format_divisor(nf: &NumberField, d: &Divisor<NfElement>) -> DivisorSpec {
    DivisorSpec {
        u: d.u.iter().map(|c| format_element(nf, c)).collect(),
        v: d.v.iter().map(|c| format_element(nf, c)).collect(),
    }
}

pub fn parse_point(nf: &NumberField, at: &PointAt, field: &str) -> Result<CurvePoint<NfElement>, SchemaError> {
    Ok(match at {
        PointAt::Infinity => CurvePoint::Infinity,
        PointAt::Affine { x, y } => {
            CurvePoint::Affine(parse_element(nf, x, &format!("{field}.x"))?, parse_element(nf, y, &format!("{field}.y"))?)
        }
    })
}

pub fn format_point(nf: &NumberField, pt: &CurvePoint<NfElement>) -> PointAt {
    match pt {
        CurvePoint::Infinity => PointAt::Infinity,
        CurvePoint::Affine(x, y) => PointAt::Affine { x: format_element(nf, x), y: format_element(nf, y) },
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        serde_json::from_str(text).map_err(|e| SchemaError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// The canonical encoding: pretty JSON with a trailing newline.
    pub fn to_canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem files serialize");
        s.push('\n');
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_canonical().as_bytes()))
    }

    /// Build the number field, curve and subgroup, verifying every
    /// decomposition exactly.
    pub fn validate(self) -> Result<Problem, SchemaError> {
        let poly = self
            .field
            .iter()
            .enumerate()
            .map(|(i, s)| s.parse::<BigInt>().map_err(|_| invalid(format!("field[{i}]"), format!("bad integer {s:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let nf = NumberField::new(&poly).map_err(|e| invalid("field", e.to_string()))?;
        let f = parse_poly(&nf, &self.curve, "curve")?;
        let curve = Curve::new(nf.clone(), f).map_err(|e| invalid("curve", e.to_string()))?;
        let free = self
            .basis
            .iter()
            .enumerate()
            .map(|(i, d)| parse_divisor(&curve, d, &format!("basis[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let torsion = self
            .torsion
            .iter()
            .enumerate()
            .map(|(i, t)| Ok((parse_divisor(&curve, &t.divisor, &format!("torsion[{i}].divisor"))?, t.order)))
            .collect::<Result<Vec<_>, SchemaError>>()?;
        let mut points = Vec::with_capacity(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            let field = format!("points[{i}]");
            let point = parse_point(&nf, &p.at, &field)?;
            if !curve.is_on_curve(&point).map_err(|e| invalid(&field, e.to_string()))? {
                return Err(invalid(&field, "not on the curve"));
            }
            let coords = p
                .coords
                .iter()
                .map(|s| s.parse::<BigInt>().map_err(|_| invalid(format!("{field}.coords"), format!("bad integer {s:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            points.push(KnownPoint { point, coords });
        }
        let base = points
            .get(self.base_point)
            .ok_or_else(|| invalid("base_point", format!("no point with index {}", self.base_point)))?
            .point
            .clone();
        if self.smoothness_bound < 2 {
            return Err(invalid("smoothness_bound", "must be at least 2"));
        }
        if self.precision < 4 {
            return Err(invalid("precision", "must be at least 4"));
        }
        let hash = self.hash();
        let mw = AbstractMW::new(nf, curve, free, torsion, base, points).map_err(|e| invalid("points", e.to_string()))?;
        Ok(Problem { file: self, mw, hash })
    }
}

pub fn load_problem(path: &Path) -> Result<Problem, SchemaError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SchemaError::Io { path: path.display().to_string(), source })?;
    ProblemFile::from_json(&text)?.validate()
}

/// Human-readable rendering of a point.
pub fn point_label(nf: &NumberField, pt: &CurvePoint<NfElement>) -> String {
    match pt {
        CurvePoint::Infinity => "∞".into(),
        CurvePoint::Affine(x, y) => format!("({}, {})", element_label(nf, x), element_label(nf, y)),
    }
}

/// `(a + bθ + cθ²)/d` style rendering over a common denominator.
pub fn element_label(nf: &NumberField, e: &NfElement) -> String {
    let c = e.coeffs();
    if nf.degree() == 1 {
        return format_rational(&c[0]);
    }
    let den = e.denominator();
    let mut terms = Vec::new();
    for (i, q) in c.iter().enumerate().rev() {
        let n = (q * BigRational::from_integer(den.clone())).to_integer();
        if n.is_zero() {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "θ".into(),
            _ => format!("θ^{i}"),
        };
        let coef = n.to_string();
        terms.push(match (mono.is_empty(), coef.as_str()) {
            (true, _) => coef,
            (false, "1") => mono,
            (false, "-1") => format!("-{mono}"),
            _ => format!("{coef}{mono}"),
        });
    }
    if terms.is_empty() {
        return "0".into();
    }
    let num = terms.join(" + ").replace("+ -", "- ");
    if den == BigInt::from(1) {
        num
    } else if terms.len() == 1 {
        format!("{num}/{den}")
    } else {
        format!("({num})/{den}")
    }
}
