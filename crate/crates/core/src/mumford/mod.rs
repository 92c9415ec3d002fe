//! Genus-2 curves `y² = f(x)` with `deg f = 5` and Cantor arithmetic on
//! Mumford pairs, generic over the coefficient field.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::field::{ArithError, Field, ZeroTest};
use crate::poly::{self, Poly};

pub mod reduce;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MumfordError {
    #[error("curve polynomial must have degree exactly 5")]
    WrongDegree,
    #[error("curve model is singular (f has a repeated root)")]
    SingularModel,
    #[error("u does not divide v^2 - f")]
    NotOnJacobian,
    #[error("point does not lie on the curve")]
    NotOnCurve,
    #[error("arithmetic error: {0}")]
    Arith(#[from] ArithError),
}

/// A point on the curve: the unique point at infinity or an affine point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CurvePoint<E> {
    Infinity,
    Affine(E, E),
}

/// Reduced Mumford pair: `u` monic of degree ≤ 2, `deg v < deg u`.
/// The identity is `u = 1, v = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Divisor<E> {
    pub u: Poly<E>,
    pub v: Poly<E>,
}

impl<E: Clone> Divisor<E> {
    pub fn is_identity(&self) -> bool {
        self.u.len() == 1
    }
    pub fn degree(&self) -> usize {
        self.u.len() - 1
    }
}

/// `y² = f(x)` with `deg f = 5`.
#[derive(Debug, Clone)]
pub struct Curve<F: Field> {
    pub k: F,
    pub f: Poly<F::Elem>,
}

impl<F: Field> Curve<F> {
    /// Validate degree and squarefreeness.
    pub fn new(k: F, f: Poly<F::Elem>) -> Result<Self, MumfordError> {
        let mut f = f;
        poly::trim(&k, &mut f)?;
        if f.len() != 6 {
            return Err(MumfordError::WrongDegree);
        }
        let df = poly::derivative(&k, &f);
        let mut dft = df.clone();
        poly::trim(&k, &mut dft)?;
        let (g, _, _) = poly::xgcd(&k, &f, &dft)?;
        if g.len() != 1 {
            return Err(MumfordError::SingularModel);
        }
        Ok(Curve { k, f })
    }

    /// Build without validation (for reductions already known to be good).
    pub fn new_unchecked(k: F, f: Poly<F::Elem>) -> Self {
        Curve { k, f }
    }

    pub fn field(&self) -> &F {
        &self.k
    }

    pub fn discriminant(&self) -> Result<F::Elem, ArithError> {
        let df = poly::derivative(&self.k, &self.f);
        poly::resultant(&self.k, &self.f, &df)
    }

    pub fn identity(&self) -> Divisor<F::Elem> {
        Divisor { u: vec![self.k.one()], v: Vec::new() }
    }

    pub fn eval_f(&self, x: &F::Elem) -> F::Elem {
        poly::eval(&self.k, &self.f, x)
    }

    pub fn is_on_curve(&self, pt: &CurvePoint<F::Elem>) -> Result<bool, ArithError> {
        match pt {
            CurvePoint::Infinity => Ok(true),
            CurvePoint::Affine(x, y) => {
                let k = &self.k;
                let d = k.sub(&k.mul(y, y), &self.eval_f(x));
                match k.zero_test(&d) {
                    ZeroTest::Zero | ZeroTest::Ambiguous => Ok(true),
                    ZeroTest::NonZero => Ok(false),
                }
            }
        }
    }

    /// The hyperelliptic involution on points.
    pub fn involution(&self, pt: &CurvePoint<F::Elem>) -> CurvePoint<F::Elem> {
        match pt {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine(x, y) => CurvePoint::Affine(x.clone(), self.k.neg(y)),
        }
    }

    /// `[P − ∞]`.
    pub fn point_class(&self, pt: &CurvePoint<F::Elem>) -> Divisor<F::Elem> {
        match pt {
            CurvePoint::Infinity => self.identity(),
            CurvePoint::Affine(x, y) => Divisor {
                u: vec![self.k.neg(x), self.k.one()],
                v: poly::constant(&self.k, y.clone()),
            },
        }
    }

    /// Abel-Jacobi map `P ↦ [P − P0]`.
    pub fn abel_jacobi(
        &self,
        pt: &CurvePoint<F::Elem>,
        base: &CurvePoint<F::Elem>,
    ) -> Result<Divisor<F::Elem>, ArithError> {
        let a = self.point_class(pt);
        let b = self.point_class(base);
        self.add(&a, &self.neg(&b))
    }

    /// Class of a (possibly non-monic, possibly unreduced) pair `(u, v)`.
    pub fn make_divisor(&self, u: &Poly<F::Elem>, v: &Poly<F::Elem>) -> Result<Divisor<F::Elem>, MumfordError> {
        let k = &self.k;
        let mut u = u.clone();
        poly::trim(k, &mut u)?;
        if u.is_empty() {
            return Err(MumfordError::NotOnJacobian);
        }
        let u = poly::make_monic(k, &u)?;
        let mut v = v.clone();
        poly::trim(k, &mut v)?;
        let v2f = poly::sub(k, &poly::mul(k, &v, &v), &self.f)?;
        if !poly::rem(k, &v2f, &u)?.is_empty() {
            return Err(MumfordError::NotOnJacobian);
        }
        let v = poly::rem(k, &v, &u)?;
        Ok(self.reduce(u, v)?)
    }

    pub fn neg(&self, d: &Divisor<F::Elem>) -> Divisor<F::Elem> {
        Divisor { u: d.u.clone(), v: poly::neg(&self.k, &d.v) }
    }

    /// Cantor composition followed by reduction.
    pub fn add(&self, a: &Divisor<F::Elem>, b: &Divisor<F::Elem>) -> Result<Divisor<F::Elem>, ArithError> {
        if a.is_identity() {
            return Ok(b.clone());
        }
        if b.is_identity() {
            return Ok(a.clone());
        }
        let k = &self.k;
        let one = vec![k.one()];
        let (d1, e1, e2) = if poly::same_repr(k, &a.u, &b.u) {
            (a.u.clone(), one.clone(), Vec::new())
        } else {
            poly::xgcd(k, &a.u, &b.u)?
        };
        let (d, s1, s2, s3) = if d1.len() == 1 {
            (d1, e1, e2, Vec::new())
        } else {
            let vs = poly::add(k, &a.v, &b.v)?;
            let (d, c1, c2) = poly::xgcd(k, &d1, &vs)?;
            (d, poly::mul(k, &c1, &e1), poly::mul(k, &c1, &e2), c2)
        };
        let dd = poly::mul(k, &d, &d);
        let u = poly::div_exact(k, &poly::mul(k, &a.u, &b.u), &dd)?;
        if u.len() == 1 {
            return Ok(self.identity());
        }
        let t1 = poly::mul(k, &poly::mul(k, &s1, &a.u), &b.v);
        let t2 = poly::mul(k, &poly::mul(k, &s2, &b.u), &a.v);
        let vv = poly::add_raw(k, &poly::mul(k, &a.v, &b.v), &self.f);
        let t3 = poly::mul(k, &s3, &vv);
        let num = poly::add_raw(k, &poly::add_raw(k, &t1, &t2), &t3);
        let num = if d.len() == 1 { num } else { poly::div_exact(k, &num, &d)? };
        let v = poly::rem(k, &num, &u)?;
        self.reduce(u, v)
    }

    fn reduce(&self, mut u: Poly<F::Elem>, mut v: Poly<F::Elem>) -> Result<Divisor<F::Elem>, ArithError> {
        let k = &self.k;
        while u.len() > 3 {
            let t = poly::sub(k, &self.f, &poly::mul(k, &v, &v))?;
            let u2 = poly::make_monic(k, &poly::div_exact(k, &t, &u)?)?;
            v = poly::rem(k, &poly::neg(k, &v), &u2)?;
            u = u2;
        }
        if u.len() == 1 {
            return Ok(self.identity());
        }
        let v = if v.len() >= u.len() { poly::rem(k, &v, &u)? } else { v };
        Ok(Divisor { u, v })
    }

    pub fn double(&self, a: &Divisor<F::Elem>) -> Result<Divisor<F::Elem>, ArithError> {
        self.add(a, a)
    }

    pub fn sub(&self, a: &Divisor<F::Elem>, b: &Divisor<F::Elem>) -> Result<Divisor<F::Elem>, ArithError> {
        self.add(a, &self.neg(b))
    }

    pub fn mul_u128(&self, a: &Divisor<F::Elem>, n: u128) -> Result<Divisor<F::Elem>, ArithError> {
        if n == 0 || a.is_identity() {
            return Ok(self.identity());
        }
        let bits = 128 - n.leading_zeros();
        let mut acc = a.clone();
        for i in (0..bits - 1).rev() {
            acc = self.double(&acc)?;
            if (n >> i) & 1 == 1 {
                acc = self.add(&acc, a)?;
            }
        }
        Ok(acc)
    }

    pub fn mul_i128(&self, a: &Divisor<F::Elem>, n: i128) -> Result<Divisor<F::Elem>, ArithError> {
        let r = self.mul_u128(a, n.unsigned_abs())?;
        Ok(if n < 0 { self.neg(&r) } else { r })
    }

    pub fn mul_bigint(&self, a: &Divisor<F::Elem>, n: &BigInt) -> Result<Divisor<F::Elem>, ArithError> {
        if let Some(small) = n.to_i128() {
            return self.mul_i128(a, small);
        }
        let mag = n.abs();
        let mut acc = self.identity();
        let bits = mag.bits();
        for i in (0..bits).rev() {
            acc = self.double(&acc)?;
            if mag.bit(i) {
                acc = self.add(&acc, a)?;
            }
        }
        Ok(if n.is_negative() { self.neg(&acc) } else { acc })
    }

    /// `Σ c_i D_i`.
    pub fn combination(
        &self,
        coeffs: &[BigInt],
        gens: &[Divisor<F::Elem>],
    ) -> Result<Divisor<F::Elem>, ArithError> {
        let mut acc = self.identity();
        for (c, g) in coeffs.iter().zip(gens) {
            if c.is_zero() {
                continue;
            }
            acc = self.add(&acc, &self.mul_bigint(g, c)?)?;
        }
        Ok(acc)
    }

    /// Check `u | v² − f` for a reduced pair.
    pub fn is_valid(&self, d: &Divisor<F::Elem>) -> Result<bool, ArithError> {
        let k = &self.k;
        let v2f = poly::sub(k, &poly::mul(k, &d.v, &d.v), &self.f)?;
        Ok(poly::rem(k, &v2f, &d.u)?.is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use crate::numberfield::cube_root_two;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn validates_models() {
        assert!(Curve::new(Rationals, vec![q(-3), q(0), q(0), q(0), q(0), q(3)]).is_ok());
        assert!(Curve::new(Rationals, vec![q(-2187), q(0), q(0), q(0), q(0), q(1)]).is_ok());
        assert_eq!(
            Curve::new(Rationals, vec![q(0), q(0), q(0), q(0), q(0), q(1)]).unwrap_err(),
            MumfordError::SingularModel
        );
        assert_eq!(
            Curve::new(Rationals, vec![q(1), q(0), q(0), q(1)]).unwrap_err(),
            MumfordError::WrongDegree
        );
    }

    #[test]
    fn case_one_discriminant_factors() {
        let c = Curve::new(Rationals, vec![q(-3), q(0), q(0), q(0), q(0), q(3)]).unwrap();
        // disc(3x^5 - 3) up to sign and the leading-coefficient normalization
        let r = c.discriminant().unwrap();
        let n = r.numer().clone();
        let mut m = if n < BigInt::zero() { -n } else { n };
        for pr in [2u32, 3, 5] {
            let pb = BigInt::from(pr);
            while (&m % &pb).is_zero() {
                m /= &pb;
            }
        }
        assert_eq!(m, BigInt::from(1));
    }

    #[test]
    fn torsion_point_of_order_two() {
        let c = Curve::new(Rationals, vec![q(-3), q(0), q(0), q(0), q(0), q(3)]).unwrap();
        let t = c.point_class(&CurvePoint::Affine(q(1), q(0)));
        assert!(c.is_valid(&t).unwrap());
        assert!(c.double(&t).unwrap().is_identity());
    }

    #[test]
    fn table_divisor_over_cube_root_two() {
        let k = cube_root_two();
        // C_{-2}: Y² = 12ε²X⁵ − 3ε⁻⁴, ε = 1 − θ.
        let eps = k.from_i64_coeffs(&[1, -1]);
        let eps_inv = k.inv(&eps).unwrap();
        let c5 = k.mul(&k.from_i64(12), &k.pow(&eps, 2));
        let c0 = k.neg(&k.mul(&k.from_i64(3), &k.pow(&eps_inv, 4)));
        let mut f = vec![k.zero(); 6];
        f[5] = c5;
        f[0] = c0;
        let curve = Curve::new(k.clone(), f).unwrap();
        let x = k.from_i64_coeffs(&[1, 1, 1]);
        let y = k.from_i64_coeffs(&[1, 2, 1]);
        let pt = CurvePoint::Affine(x, y);
        assert!(curve.is_on_curve(&pt).unwrap());
        let d = curve.point_class(&pt);
        assert!(curve.is_valid(&d).unwrap());
        // D + ι(D) = 0
        let e = curve.point_class(&curve.involution(&pt));
        assert!(curve.add(&d, &e).unwrap().is_identity());
        // (2D) − D = D
        let two = curve.double(&d).unwrap();
        assert!(curve.is_valid(&two).unwrap());
        assert_eq!(curve.sub(&two, &d).unwrap(), d);
        let three = curve.mul_i128(&d, 3).unwrap();
        assert_eq!(curve.add(&two, &d).unwrap(), three);
        assert_eq!(curve.mul_i128(&d, -3).unwrap(), curve.neg(&three));
    }
}
