//! Point counts over `F_q` and `F_{q²}` and the order of `J(F_q)` from the
//! zeta function.

use crate::field::Field;
use crate::mumford::{Curve, CurvePoint, Divisor};
use crate::par::{self, Execution};
use crate::poly;

use super::fq::{pow_u128, FiniteField, Fq, QuadExt};
use super::FiniteGeomError;

/// Largest `q` for which `#C(F_{q²})` is counted by enumeration.
pub const DEFAULT_ORDER_CAP: u64 = 1 << 13;

fn horner(k: &FiniteField, f: &[Fq], x: &Fq) -> Fq {
    let mut acc = k.zero();
    for c in f.iter().rev() {
        acc = k.add(&k.mul(&acc, x), c);
    }
    acc
}

/// `#C(F_q)` including the point at infinity.
pub fn count_n1(curve: &Curve<FiniteField>, exec: Execution) -> u64 {
    let k = &curve.k;
    let affine = par::sum_range(exec, k.size(), |i| {
        let x = k.from_index(i);
        (1 + k.chi(&horner(k, &curve.f, &x))) as u64
    });
    affine + 1
}

/// `#C(F_{q²})` including the point at infinity. Conjugate pairs
/// `a ± b√n` have the same character value, so only half of the
/// non-rational abscissae are visited.
pub fn count_n2(curve: &Curve<FiniteField>, exec: Execution) -> u64 {
    let k = &curve.k;
    let ext = QuadExt::degree_two(k);
    let f2: Vec<(Fq, Fq)> = curve.f.iter().map(|c| (*c, Fq::default())).collect();
    let q = k.size();
    let rational: u64 = (0..q)
        .map(|i| if horner(k, &curve.f, &k.from_index(i)) == Fq::default() { 1 } else { 2 })
        .sum();
    let halves: Vec<u64> = (1..q)
        .filter(|&i| {
            let b = k.from_index(i);
            i < k.index(&k.neg(&b))
        })
        .collect();
    let paired = par::map_slice(exec, &halves, |&bi| {
        let b = k.from_index(bi);
        let mut acc = 0u64;
        for ai in 0..q {
            let x = (k.from_index(ai), b);
            let y = poly::eval(&ext, &f2, &x);
            acc += (1 + k.chi(&ext.norm(&y))) as u64;
        }
        acc
    });
    1 + rational + 2 * paired.iter().sum::<u64>()
}

/// Frobenius data of a genus-2 curve over `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZetaData {
    pub q: u64,
    pub n1: u64,
    pub n2: u64,
    /// `L(T) = 1 − a1 T + a2 T² − q a1 T³ + q² T⁴`.
    pub a1: i64,
    pub a2: i64,
}

impl ZetaData {
    pub fn from_counts(q: u64, n1: u64, n2: u64) -> Self {
        let qi = q as i128;
        let a1 = qi + 1 - n1 as i128;
        let power_sum2 = qi * qi + 1 - n2 as i128;
        let a2 = (a1 * a1 - power_sum2) / 2;
        ZetaData { q, n1, n2, a1: a1 as i64, a2: a2 as i64 }
    }

    /// `#J(F_q) = L(1)`.
    pub fn jacobian_order(&self) -> u64 {
        let q = self.q as i128;
        let a1 = self.a1 as i128;
        let a2 = self.a2 as i128;
        (1 - a1 + a2 - q * a1 + q * q) as u64
    }
}

pub fn zeta_data(curve: &Curve<FiniteField>, cap: u64, exec: Execution) -> Result<ZetaData, FiniteGeomError> {
    let q = curve.k.size();
    if q > cap {
        return Err(FiniteGeomError::FieldTooLarge { q, cap });
    }
    Ok(ZetaData::from_counts(q, count_n1(curve, exec), count_n2(curve, exec)))
}

/// `(a, b)` when the curve is `y² = a x⁵ + b`.
pub fn binomial_coefficients(curve: &Curve<FiniteField>) -> Option<(Fq, Fq)> {
    let f = &curve.f;
    let zero = Fq::default();
    if f.len() != 6 || f[1..5].iter().any(|c| *c != zero) || f[0] == zero {
        return None;
    }
    Some((f[5], f[0]))
}

/// Elements of `Z[ζ₅]` as coefficient vectors modulo `x⁵ − 1`.
type Cyclo = [i128; 5];

fn cyclo_mul(a: &Cyclo, b: &Cyclo) -> Cyclo {
    let mut out = [0i128; 5];
    for i in 0..5 {
        for j in 0..5 {
            out[(i + j) % 5] += a[i] * b[j];
        }
    }
    out
}

fn cyclo_conjugate(a: &Cyclo, j: usize) -> Cyclo {
    let mut out = [0i128; 5];
    for (i, c) in a.iter().enumerate() {
        out[(i * j) % 5] += c;
    }
    out
}

/// `#J(F_q)` for `y² = a x⁵ + b`, where the Jacobian has CM by `Z[ζ₅]`.
///
/// For `q ≡ 1 (mod 5)` the Frobenius is `−χ₂(b) χ₅(−b/a) J(χ₅, χ₂)` and the
/// order is its norm from `Q(ζ₅)`, computed with `O(q)` character
/// evaluations. Otherwise the curve is supersingular with
/// `L(T) = 1 + q²T⁴` (`q ≡ 2, 3`) or `(1 + qT²)²` (`q ≡ 4`).
pub fn binomial_jacobian_order(k: &FiniteField, a: &Fq, b: &Fq, exec: Execution) -> u64 {
    let q = k.size();
    match q % 5 {
        2 | 3 => return q * q + 1,
        4 => return (q + 1) * (q + 1),
        _ => {}
    }
    assert_eq!(q % 5, 1, "characteristic 5 is not supported");
    let e = ((q - 1) / 10) as u128;
    let one = k.one();
    // η of exact order 10 fixes a generator-compatible pair (χ₂, χ₅).
    let eta = (2..q)
        .map(|i| pow_u128(k, &k.from_index(i), e))
        .find(|h| pow_u128(k, h, 5) != one && pow_u128(k, h, 2) != one)
        .expect("F_q* has elements of order 10");
    let mut roots = Vec::with_capacity(10);
    let mut r = one;
    for _ in 0..10 {
        roots.push(r);
        r = k.mul(&r, &eta);
    }
    let log10 = |w: &Fq| -> usize {
        let h = pow_u128(k, w, e);
        roots.iter().position(|x| *x == h).expect("10th root of unity")
    };
    let chunk = 1 << 12;
    let chunks = (q as usize).div_ceil(chunk);
    let partial = par::map_range(exec, chunks, |c| {
        let mut acc: Cyclo = [0; 5];
        let lo = (c * chunk) as u64;
        let hi = (lo + chunk as u64).min(q);
        for i in lo..hi {
            let w = k.from_index(i);
            if w == Fq::default() || w == one {
                continue;
            }
            let s = log10(&k.sub(&one, &w));
            acc[log10(&w) % 5] += if s % 2 == 0 { 1 } else { -1 };
        }
        acc
    });
    let mut jac: Cyclo = [0; 5];
    for p in &partial {
        for i in 0..5 {
            jac[i] += p[i];
        }
    }
    let twist = log10(&k.neg(&k.mul(b, &k.inv(a).expect("a ≠ 0")))) % 5;
    let sign = if log10(b) % 2 == 0 { -1 } else { 1 };
    // 1 − α with α = sign · ζ^twist · J.
    let mut z: Cyclo = [0; 5];
    for i in 0..5 {
        z[(i + twist) % 5] -= sign * jac[i];
    }
    z[0] += 1;
    let mut norm = z;
    for j in 2..5 {
        norm = cyclo_mul(&norm, &cyclo_conjugate(&z, j));
    }
    let value = norm[0] - norm[1];
    debug_assert!(norm[1..].iter().all(|c| *c == norm[1]));
    u64::try_from(value).expect("Jacobian order is positive")
}

/// `#J(F_q)`, using the CM formula for binomial curves and the zeta
/// function (subject to `cap`) otherwise.
pub fn jacobian_order(curve: &Curve<FiniteField>, cap: u64, exec: Execution) -> Result<u64, FiniteGeomError> {
    if curve.k.p() != 5 {
        if let Some((a, b)) = binomial_coefficients(curve) {
            return Ok(binomial_jacobian_order(&curve.k, &a, &b, exec));
        }
    }
    Ok(zeta_data(curve, cap, exec)?.jacobian_order())
}

/// Affine points of `C(F_q)`, sorted by `(x, y)` index.
pub fn affine_points(curve: &Curve<FiniteField>, exec: Execution) -> Vec<CurvePoint<Fq>> {
    let k = &curve.k;
    let per_x = par::map_range(exec, k.size() as usize, |i| {
        let x = k.from_index(i as u64);
        let fx = horner(k, &curve.f, &x);
        match k.sqrt(&fx) {
            None => Vec::new(),
            Some(y) if y == Fq::default() => vec![CurvePoint::Affine(x, y)],
            Some(y) => {
                let ny = k.neg(&y);
                let (a, b) = if k.index(&y) < k.index(&ny) { (y, ny) } else { (ny, y) };
                vec![CurvePoint::Affine(x, a), CurvePoint::Affine(x, b)]
            }
        }
    });
    per_x.into_iter().flatten().collect()
}

/// Every reduced Mumford pair over `F_q`, found by brute force over all
/// monic `u` of degree ≤ 2 and all `v` with `deg v < deg u`. Only meant for
/// very small fields.
pub fn enumerate_jacobian(curve: &Curve<FiniteField>) -> Vec<Divisor<Fq>> {
    let k = &curve.k;
    let q = k.size();
    let mut out = vec![curve.identity()];
    let divides = |u: &Vec<Fq>, v: &Vec<Fq>| -> bool {
        let v2 = poly::mul(k, v, v);
        let t = poly::sub(k, &v2, &curve.f).expect("finite field");
        poly::rem(k, &t, u).expect("finite field").is_empty()
    };
    for a in 0..q {
        let u = vec![k.from_index(a), k.one()];
        for b in 0..q {
            let v = poly::constant(k, k.from_index(b));
            if divides(&u, &v) {
                out.push(Divisor { u: u.clone(), v });
            }
        }
    }
    for a0 in 0..q {
        for a1 in 0..q {
            let u = vec![k.from_index(a0), k.from_index(a1), k.one()];
            for b0 in 0..q {
                for b1 in 0..q {
                    let mut v = vec![k.from_index(b0), k.from_index(b1)];
                    poly::trim(k, &mut v).expect("finite field");
                    if divides(&u, &v) {
                        out.push(Divisor { u: u.clone(), v });
                    }
                }
            }
        }
    }
    out
}
