//! Back-substitution from rational points of the descent curves to
//! coprime solutions of `x² + y³ = z¹⁰`.

use std::collections::BTreeSet;

use chabauty_core::field::Field;
use chabauty_core::mumford::CurvePoint;
use chabauty_core::numberfield::{NfElement, NumberField};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::problem::{format_rational, point_label, FermatSpec};

/// A solution `(x, y, z)` of `x² + y³ = z¹⁰`.
pub type Solution = (BigInt, BigInt, BigInt);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Recovery {
    Accepted { solutions: Vec<[String; 3]> },
    Rejected { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FermatCandidate {
    pub curve: String,
    pub point: String,
    /// `u/v` for the `y`-even family, `"∞"` on the `v = 0` branch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<String>,
    pub recovery: Recovery,
}

pub fn satisfies(s: &Solution) -> bool {
    let (x, y, z) = s;
    x * x + y * y * y == z.pow(10)
}

/// `(x, y, z)` together with `(−x, y, z)`, `(x, y, −z)` and `(−x, y, −z)`.
pub fn sign_orbit(s: &Solution) -> Vec<Solution> {
    let (x, y, z) = s;
    let mut out = BTreeSet::new();
    for sx in [1, -1] {
        for sz in [1, -1] {
            out.insert((x * sx, y.clone(), z * sz));
        }
    }
    out.into_iter().collect()
}

fn exact_fifth_root(n: &BigInt) -> Option<BigInt> {
    let r = n.nth_root(5);
    (r.pow(5) == *n).then_some(r)
}

/// The rational number `q` when `e = q ∈ Q ⊂ K`.
fn as_rational(e: &NfElement) -> Option<BigRational> {
    let c = e.coeffs();
    c[1..].iter().all(Zero::is_zero).then(|| c[0].clone())
}

fn accepted(sols: Vec<Solution>) -> Recovery {
    let mut all = BTreeSet::new();
    for s in &sols {
        assert!(satisfies(s), "back-substitution produced a non-solution {s:?}");
        all.extend(sign_orbit(s));
    }
    Recovery::Accepted { solutions: all.iter().map(solution_strings).collect() }
}

pub fn solution_strings(s: &Solution) -> [String; 3] {
    [s.0.to_string(), s.1.to_string(), s.2.to_string()]
}

/// `(u, v)` coprime with `u³ − 2v³ = z⁵`, `u` and `z` odd; gives
/// `(x, y, z) = (u³ + 2v³, −2uv, z)`.
fn family_solution(u: &BigInt, v: &BigInt) -> Result<Solution, String> {
    if u.is_even() {
        return Err(format!("u = {u} is even"));
    }
    if !u.gcd(v).is_one() {
        return Err(format!("gcd(u, v) = {} ≠ 1", u.gcd(v)));
    }
    let w = u.pow(3) - BigInt::from(2) * v.pow(3);
    let z = exact_fifth_root(&w).ok_or_else(|| format!("u³ − 2v³ = {w} is not a fifth power"))?;
    Ok((u.pow(3) + BigInt::from(2) * v.pow(3), BigInt::from(-2) * u * v, z))
}

fn family_candidate(nf: &NumberField, s: i64, pt: &CurvePoint<NfElement>) -> (Option<String>, Recovery) {
    let CurvePoint::Affine(_, y) = pt else {
        // α = 0 forces z = 0, so u³ = 2v³ with u, v coprime: impossible.
        return (None, Recovery::Rejected { reason: "point at infinity: α = 0 has no coprime solution".into() });
    };
    let eps = nf.from_i64_coeffs(&[1, -1]);
    let eps_s = if s >= 0 {
        nf.pow(&eps, s as u64)
    } else {
        nf.pow(&nf.inv(&eps).expect("ε is a unit"), s.unsigned_abs())
    };
    let c = nf.mul(&nf.from_i64(3), &eps_s);
    let num = nf.add(y, &c);
    let den = nf.sub(y, &c);
    if den == nf.zero() {
        // v = 0: u = ±1 and x = z⁵ = u³.
        let sols = [1, -1].iter().map(|&u| (BigInt::from(u), BigInt::zero(), BigInt::from(u))).collect();
        return (Some("∞".into()), accepted(sols));
    }
    let theta = nf.gen();
    let ratio = nf.mul(&theta, &nf.mul(&num, &nf.inv(&den).expect("nonzero")));
    let Some(q) = as_rational(&ratio) else {
        return (None, Recovery::Rejected { reason: "u/v is not rational".into() });
    };
    let label = format_rational(&q);
    let (u, v) = (q.numer().clone(), q.denom().clone());
    let mut sols = Vec::new();
    let mut reasons = Vec::new();
    for sign in [1, -1] {
        match family_solution(&(&u * sign), &(&v * sign)) {
            Ok(sol) => sols.push(sol),
            Err(r) => reasons.push(r),
        }
    }
    let rec = if sols.is_empty() { Recovery::Rejected { reason: reasons.join("; ") } } else { accepted(sols) };
    (Some(label), rec)
}

/// Case I: `u − v = 2·m·a⁵`, `u + v = c`, `X = b/a²` with `Y = k·c/(2a⁵)`,
/// `z = t·a·b`, `x = (u³ + v³)/2`, `y = −uv`. For Case I.1 `(m, k, t) = (1, 3, 1)`,
/// for Case I.2 `(m, k, t) = (3⁴, 1, 3)`.
fn case_i_candidate(pt: &CurvePoint<NfElement>, m: i64, k: i64, t: i64, three_divides_z: bool) -> Recovery {
    let pairs: Vec<(BigInt, BigInt, BigInt, BigInt)> = match pt {
        CurvePoint::Infinity => {
            // a = 0 and b = 1: z = 0, u = v = ±1.
            if !three_divides_z {
                return Recovery::Rejected { reason: "point at infinity gives z = 0, but 3 ∤ z in this case".into() };
            }
            [1, -1].iter().map(|&u| (BigInt::from(u), BigInt::from(u), BigInt::zero(), BigInt::one())).collect()
        }
        CurvePoint::Affine(x, y) => {
            let (Some(x), Some(y)) = (as_rational(x), as_rational(y)) else {
                return Recovery::Rejected { reason: "point is not rational".into() };
            };
            let a0 = x.denom().sqrt();
            if &(&a0 * &a0) != x.denom() {
                return Recovery::Rejected { reason: "denominator of X is not a square".into() };
            }
            let b = x.numer().clone();
            let mut out = Vec::new();
            for a in [a0.clone(), -a0] {
                let c = y.clone() * BigRational::from_integer(BigInt::from(2) * a.pow(5)) / BigRational::from_integer(k.into());
                if !c.is_integer() {
                    continue;
                }
                let c = c.to_integer();
                let d = BigInt::from(2 * m) * a.pow(5);
                let (u2, v2) = (&c + &d, &c - &d);
                if u2.is_odd() || v2.is_odd() {
                    continue;
                }
                out.push((u2 / 2, v2 / 2, a.clone(), b.clone()));
            }
            out
        }
    };
    let mut sols = Vec::new();
    let mut reasons = Vec::new();
    for (u, v, a, b) in pairs {
        let z = BigInt::from(t) * &a * &b;
        if u.is_even() || v.is_even() || !u.gcd(&v).is_one() {
            reasons.push(format!("(u, v) = ({u}, {v}) not odd and coprime"));
            continue;
        }
        if BigInt::from(2) * z.pow(5) != u.pow(3) - v.pow(3) {
            reasons.push(format!("2z⁵ ≠ u³ − v³ for (u, v, z) = ({u}, {v}, {z})"));
            continue;
        }
        let x = (u.pow(3) + v.pow(3)) / 2;
        sols.push((x, -(&u * &v), z));
    }
    if sols.is_empty() {
        Recovery::Rejected { reason: if reasons.is_empty() { "no integral (u, v)".into() } else { reasons.join("; ") } }
    } else {
        accepted(sols)
    }
}

/// Recover candidates for every point of a certified point set.
pub fn recover_all(nf: &NumberField, spec: FermatSpec, name: &str, points: &[CurvePoint<NfElement>]) -> Vec<FermatCandidate> {
    points
        .iter()
        .map(|pt| {
            let (ratio, recovery) = match spec {
                FermatSpec::Family { s } => family_candidate(nf, s, pt),
                FermatSpec::CaseI1 => (None, case_i_candidate(pt, 1, 3, 1, false)),
                FermatSpec::CaseI2 => (None, case_i_candidate(pt, 81, 1, 3, true)),
            };
            FermatCandidate { curve: name.into(), point: point_label(nf, pt), ratio, recovery }
        })
        .collect()
}

/// The union of all accepted solutions, sorted.
pub fn solution_set(cands: &[FermatCandidate]) -> Vec<[String; 3]> {
    let mut all: BTreeSet<Solution> = BTreeSet::new();
    for c in cands {
        if let Recovery::Accepted { solutions } = &c.recovery {
            for s in solutions {
                let p = |t: &String| t.parse::<BigInt>().expect("integers");
                all.insert((p(&s[0]), p(&s[1]), p(&s[2])));
            }
        }
    }
    all.iter().map(solution_strings).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chabauty_core::numberfield::cube_root_two;

    fn aff(nf: &NumberField, x: &[i64], y: &[i64]) -> CurvePoint<NfElement> {
        CurvePoint::Affine(nf.from_i64_coeffs(x), nf.from_i64_coeffs(y))
    }

    #[test]
    fn p1_gives_ratio_one() {
        let nf = cube_root_two();
        let (ratio, rec) = family_candidate(&nf, 1, &aff(&nf, &[-1], &[3, 3]));
        assert_eq!(ratio.as_deref(), Some("1"));
        let Recovery::Accepted { solutions } = rec else { panic!("rejected") };
        let want: Vec<[String; 3]> =
            [(-3, -2, -1), (-3, -2, 1), (3, -2, -1), (3, -2, 1)].iter().map(|&(a, b, c)| [a, b, c].map(|x: i64| x.to_string())).collect();
        assert_eq!(solutions, want);
    }

    #[test]
    fn p0_gives_five_quarters_and_is_rejected() {
        let nf = cube_root_two();
        let (ratio, rec) = family_candidate(&nf, 1, &aff(&nf, &[-1, -1, -1], &[67, 53, 40]));
        assert_eq!(ratio.as_deref(), Some("5/4"));
        assert!(matches!(rec, Recovery::Rejected { .. }));
    }

    #[test]
    fn v_zero_branch_on_c0() {
        let nf = cube_root_two();
        let (ratio, rec) = family_candidate(&nf, 0, &aff(&nf, &[1], &[3]));
        assert_eq!(ratio.as_deref(), Some("∞"));
        let Recovery::Accepted { solutions } = rec else { panic!("rejected") };
        assert_eq!(solutions.len(), 4);
        assert!(solutions.contains(&["1".into(), "0".into(), "1".into()]));
    }

    #[test]
    fn case_i1_torsion_point() {
        let q = NumberField::new(&[BigInt::zero(), BigInt::one()]).unwrap();
        let pt = CurvePoint::Affine(q.one(), q.zero());
        let Recovery::Accepted { solutions } = case_i_candidate(&pt, 1, 3, 1, false) else { panic!("rejected") };
        assert_eq!(solutions, vec![["0".to_string(), "1".into(), "-1".into()], ["0".into(), "1".into(), "1".into()]]);
    }

    #[test]
    fn case_i2_infinity() {
        let Recovery::Accepted { solutions } = case_i_candidate(&CurvePoint::Infinity, 81, 1, 3, true) else { panic!("rejected") };
        assert_eq!(solutions, vec![["-1".to_string(), "-1".into(), "0".into()], ["1".into(), "-1".into(), "0".into()]]);
    }
}
