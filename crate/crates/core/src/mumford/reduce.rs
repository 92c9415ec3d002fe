//! Reduction of curves, points and divisor classes from `K` to the residue
//! field of a place.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::field::Field;
use crate::finitegeom::{FiniteField, Fq};
use crate::localfield::{LocalElement, LocalError, LocalRing, INF};
use crate::numberfield::{NfElement, NumberField, Place};
use crate::poly::{self, Poly};

use super::{Curve, CurvePoint, Divisor, MumfordError};

/// Working precision for reductions that need a detour through `K_v`.
pub const REDUCTION_PRECISION: i64 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("bad reduction at the place above {0}")]
    BadReduction(u64),
    #[error("coefficient is not integral at the place")]
    NonIntegral,
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Mumford(#[from] MumfordError),
}

/// Residue field of the finite field attached to a place, built the same
/// way as the residue field of [`LocalRing::lift_place`].
pub fn residue_field(v: &Place) -> FiniteField {
    if v.residue_degree == 1 {
        FiniteField::prime(v.p)
    } else {
        FiniteField::new(v.p, &v.factor)
    }
}

/// The map `O_v → k_v` restricted to `K`.
#[derive(Debug)]
pub struct ResidueMap {
    nf: NumberField,
    place: Place,
    field: FiniteField,
    theta_powers: Vec<Fq>,
    local: OnceLock<LocalRing>,
}

impl ResidueMap {
    pub fn new(nf: &NumberField, v: &Place) -> Self {
        let field = residue_field(v);
        let theta = if v.residue_degree == 1 {
            field.neg(&field.from_u64(v.factor[0]))
        } else {
            field.from_coords(&[0, 1])
        };
        let mut theta_powers = Vec::with_capacity(nf.degree());
        let mut cur = field.one();
        for _ in 0..nf.degree() {
            theta_powers.push(cur);
            cur = field.mul(&cur, &theta);
        }
        ResidueMap { nf: nf.clone(), place: v.clone(), field, theta_powers, local: OnceLock::new() }
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn place(&self) -> &Place {
        &self.place
    }

    pub fn number_field(&self) -> &NumberField {
        &self.nf
    }

    /// The completion at modest precision, built on first use.
    pub fn local(&self) -> &LocalRing {
        self.local.get_or_init(|| LocalRing::lift_place(&self.nf, &self.place, REDUCTION_PRECISION))
    }

    /// Reduction of `x` when its denominator is prime to `p`.
    pub fn reduce(&self, x: &NfElement) -> Option<Fq> {
        let p = BigInt::from(self.place.p);
        let den = x.denominator();
        if (&den % &p).is_zero() {
            return None;
        }
        let k = &self.field;
        let den_inv = k.inv(&k.from_u64(den.mod_floor(&p).to_u64()?)).ok()?;
        let mut acc = k.zero();
        for (c, t) in x.coeffs().iter().zip(&self.theta_powers) {
            if c.is_zero() {
                continue;
            }
            let n = (c * num_rational::BigRational::from_integer(den.clone())).to_integer();
            let cm = k.from_u64(n.mod_floor(&p).to_u64()?);
            acc = k.add(&acc, &k.mul(&cm, t));
        }
        Some(k.mul(&acc, &den_inv))
    }

    /// Reduction of a `v`-integral element, going through `K_v` when the
    /// denominator is divisible by `p`.
    pub fn reduce_integral(&self, x: &NfElement) -> Result<Fq, ReductionError> {
        if let Some(r) = self.reduce(x) {
            return Ok(r);
        }
        let ring = self.local();
        let e = ring.embed(x)?;
        if e.valuation() < 0 {
            return Err(ReductionError::NonIntegral);
        }
        Ok(ring.residue(&e)?)
    }

    fn reduce_poly(&self, p: &Poly<NfElement>) -> Result<Poly<Fq>, ReductionError> {
        let mut out = p.iter().map(|c| self.reduce_integral(c)).collect::<Result<Vec<_>, _>>()?;
        poly::trim(&self.field, &mut out).expect("finite field");
        Ok(out)
    }
}

/// Reduce a curve with `v`-integral coefficients, checking good reduction.
pub fn reduce_curve(curve: &Curve<NumberField>, rm: &ResidueMap) -> Result<Curve<FiniteField>, ReductionError> {
    let f = rm.reduce_poly(&curve.f)?;
    Curve::new(rm.field.clone(), f).map_err(|_| ReductionError::BadReduction(rm.place.p))
}

/// Reduction of a point; points with non-integral `x` reduce to `∞`.
pub fn reduce_point(pt: &CurvePoint<NfElement>, rm: &ResidueMap) -> Result<CurvePoint<Fq>, ReductionError> {
    match pt {
        CurvePoint::Infinity => Ok(CurvePoint::Infinity),
        CurvePoint::Affine(x, y) => {
            if let (Some(xr), Some(yr)) = (rm.reduce(x), rm.reduce(y)) {
                return Ok(CurvePoint::Affine(xr, yr));
            }
            let ring = rm.local();
            let ex = ring.embed(x)?;
            if ex.valuation() < 0 {
                return Ok(CurvePoint::Infinity);
            }
            Ok(CurvePoint::Affine(ring.residue(&ex)?, rm.reduce_integral(y)?))
        }
    }
}

fn val(e: &LocalElement) -> i64 {
    if e.is_exact_zero() {
        INF
    } else {
        e.valuation()
    }
}

/// The image of a class under `J(K) → J(k_v)`.
pub fn reduce_divisor(
    d: &Divisor<NfElement>,
    curve_v: &Curve<FiniteField>,
    rm: &ResidueMap,
) -> Result<Divisor<Fq>, ReductionError> {
    if d.is_identity() {
        return Ok(curve_v.identity());
    }
    let fast: Option<(Vec<Fq>, Vec<Fq>)> = (|| {
        let u = d.u.iter().map(|c| rm.reduce(c)).collect::<Option<Vec<_>>>()?;
        let v = d.v.iter().map(|c| rm.reduce(c)).collect::<Option<Vec<_>>>()?;
        Some((u, v))
    })();
    if let Some((u, v)) = fast {
        return Ok(curve_v.make_divisor(&u, &v)?);
    }
    let ring = rm.local();
    let eu = d.u.iter().map(|c| ring.embed(c).or_else(|e| zero_or(c, ring, e))).collect::<Result<Vec<_>, _>>()?;
    let ev = d.v.iter().map(|c| ring.embed(c).or_else(|e| zero_or(c, ring, e))).collect::<Result<Vec<_>, _>>()?;
    reduce_local_divisor(&eu, &ev, curve_v, ring)
}

fn zero_or(c: &NfElement, ring: &LocalRing, e: LocalError) -> Result<LocalElement, LocalError> {
    if c.is_zero() {
        Ok(ring.exact_zero())
    } else {
        Err(e)
    }
}

/// Reduce a Mumford pair with coefficients in `K_v`. Support points whose
/// abscissa has negative valuation reduce to `∞` and are dropped.
pub fn reduce_local_divisor(
    u: &[LocalElement],
    v: &[LocalElement],
    curve_v: &Curve<FiniteField>,
    ring: &LocalRing,
) -> Result<Divisor<Fq>, ReductionError> {
    let coeff = |i: usize| v.get(i).cloned().unwrap_or_else(|| ring.exact_zero());
    let integral = |e: &LocalElement| val(e) >= 0;
    let point = |x: &LocalElement, y: &LocalElement| -> Result<Divisor<Fq>, ReductionError> {
        if !integral(y) {
            return Err(ReductionError::NonIntegral);
        }
        let pt = CurvePoint::Affine(ring.residue(x)?, ring.residue(y)?);
        Ok(curve_v.point_class(&pt))
    };
    match u.len() {
        1 => Ok(curve_v.identity()),
        2 => {
            if !integral(&u[0]) {
                return Ok(curve_v.identity());
            }
            point(&ring.neg(&u[0]), &coeff(0))
        }
        3 => {
            let (a, b) = (val(&u[0]), val(&u[1]));
            if a >= 0 && b >= 0 {
                if v.iter().all(integral) {
                    let ur = u.iter().map(|c| ring.residue(c)).collect::<Result<Vec<_>, _>>()?;
                    let mut vr = v.iter().map(|c| ring.residue(c)).collect::<Result<Vec<_>, _>>()?;
                    poly::trim(&curve_v.k, &mut vr).expect("finite field");
                    return Ok(curve_v.make_divisor(&ur, &vr)?);
                }
                // Both points share a residue disc and cancel modulo v.
                return Ok(curve_v.identity());
            }
            if a < 0 && b > a {
                return Ok(curve_v.identity());
            }
            // One root of valuation b < 0 and one integral root x1.
            let mut x1 = ring.neg(&ring.div(&u[0], &u[1]).map_err(LocalError::from)?);
            for _ in 0..(ring.precision() + 2) {
                let next = ring.neg(&ring.div(&u[0], &ring.add(&u[1], &x1)).map_err(LocalError::from)?);
                if next == x1 {
                    break;
                }
                x1 = next;
            }
            let y1 = ring.add(&ring.mul(&coeff(1), &x1), &coeff(0));
            point(&x1, &y1)
        }
        _ => Err(ReductionError::Mumford(MumfordError::NotOnJacobian)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::cube_root_two;
    use num_rational::BigRational;

    #[test]
    fn residue_map_is_a_ring_map() {
        let k = cube_root_two();
        for p in [5u64, 109] {
            for v in k.split_prime(p).unwrap() {
                let rm = ResidueMap::new(&k, &v);
                let a = k.from_i64_coeffs(&[1, 2, 3]);
                let b = k.from_i64_coeffs(&[-4, 0, 7]);
                let ab = k.mul(&a, &b);
                let f = rm.field();
                assert_eq!(rm.reduce(&ab).unwrap(), f.mul(&rm.reduce(&a).unwrap(), &rm.reduce(&b).unwrap()));
                let theta3 = k.pow(&k.gen(), 3);
                assert_eq!(rm.reduce(&theta3).unwrap(), f.from_u64(2));
                // agrees with the completion
                let ring = rm.local();
                assert_eq!(ring.residue(&ring.embed(&ab).unwrap()).unwrap(), rm.reduce(&ab).unwrap());
            }
        }
    }

    #[test]
    fn non_integral_abscissa_reduces_to_infinity() {
        let k = cube_root_two();
        let v = &k.split_prime(5).unwrap()[0];
        let rm = ResidueMap::new(&k, v);
        let x = k.from_rational(BigRational::new(1.into(), 5.into()));
        let y = k.one();
        assert_eq!(reduce_point(&CurvePoint::Affine(x, y), &rm).unwrap(), CurvePoint::Infinity);
    }
}
