//! Field abstraction shared by every coefficient domain in the crate.
//!
//! A [`Field`] value is the ring object; elements are plain data and every
//! operation goes through the ring. This lets the same Cantor arithmetic run
//! over `Q(θ)`, over finite fields and over capped-precision p-adic rings.
//! Zero tests are three-valued because a p-adic element known only to
//! `O(p^k)` cannot be declared zero or nonzero.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Outcome of asking whether an element is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroTest {
    Zero,
    NonZero,
    /// Inexact element whose known digits are all zero.
    Ambiguous,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: a decision depends on digits that were not computed")]
    PrecisionLoss,
    #[error("element has no square root in this field")]
    NotASquare,
}

pub trait Field: Sync {
    type Elem: Clone + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, ArithError>;
    fn zero_test(&self, a: &Self::Elem) -> ZeroTest;

    /// Structural identity of two representations. Used to detect doubling
    /// in group laws without a zero test on a difference.
    fn same_repr(&self, a: &Self::Elem, b: &Self::Elem) -> bool;

    fn is_zero(&self, a: &Self::Elem) -> Result<bool, ArithError> {
        match self.zero_test(a) {
            ZeroTest::Zero => Ok(true),
            ZeroTest::NonZero => Ok(false),
            ZeroTest::Ambiguous => Err(ArithError::PrecisionLoss),
        }
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, ArithError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    fn from_bigint(&self, n: &BigInt) -> Self::Elem {
        let base = self.from_i64(1 << 32);
        let (sign, digits) = n.to_u32_digits();
        let mut acc = self.zero();
        for d in digits.iter().rev() {
            acc = self.mul(&acc, &base);
            acc = self.add(&acc, &self.from_i64(*d as i64));
        }
        if sign == num_bigint::Sign::Minus {
            self.neg(&acc)
        } else {
            acc
        }
    }
}

/// The rational numbers with exact arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> Result<BigRational, ArithError> {
        if a.is_zero() {
            Err(ArithError::DivisionByZero)
        } else {
            Ok(a.recip())
        }
    }
    fn zero_test(&self, a: &BigRational) -> ZeroTest {
        if a.is_zero() {
            ZeroTest::Zero
        } else {
            ZeroTest::NonZero
        }
    }
    fn same_repr(&self, a: &BigRational, b: &BigRational) -> bool {
        a == b
    }
    fn from_bigint(&self, n: &BigInt) -> BigRational {
        BigRational::from_integer(n.clone())
    }
}

/// Parse `"a"` or `"a/b"` into a rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
    }
}

/// Render a rational as `"a"` or `"a/b"` in lowest terms.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// p-adic valuation of a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&n, &p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a rational, `None` for zero.
pub fn rat_valuation(q: &BigRational, p: u64) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    Some(int_valuation(q.numer(), p) as i64 - int_valuation(q.denom(), p) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_bigint_roundtrip() {
        let big: BigInt = "-123456789012345678901234567890".parse().unwrap();
        let q = Rationals.from_bigint(&big);
        assert_eq!(q, BigRational::from_integer(big));
        // The default Horner path must agree with the direct override.
        struct Wrap;
        impl Field for Wrap {
            type Elem = BigRational;
            fn zero(&self) -> BigRational { Rationals.zero() }
            fn one(&self) -> BigRational { Rationals.one() }
            fn from_i64(&self, n: i64) -> BigRational { Rationals.from_i64(n) }
            fn add(&self, a: &BigRational, b: &BigRational) -> BigRational { a + b }
            fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational { a - b }
            fn neg(&self, a: &BigRational) -> BigRational { -a }
            fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational { a * b }
            fn inv(&self, a: &BigRational) -> Result<BigRational, ArithError> { Rationals.inv(a) }
            fn zero_test(&self, a: &BigRational) -> ZeroTest { Rationals.zero_test(a) }
            fn same_repr(&self, a: &BigRational, b: &BigRational) -> bool { a == b }
        }
        let big2: BigInt = "98765432109876543210987654321".parse().unwrap();
        assert_eq!(Wrap.from_bigint(&big2), BigRational::from_integer(big2.clone()));
        assert_eq!(Wrap.from_bigint(&-big2.clone()), BigRational::from_integer(-big2));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("-3/6"), Some(BigRational::new((-1).into(), 2.into())));
        assert_eq!(parse_rational("7"), Some(BigRational::from_integer(7.into())));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(format_rational(&BigRational::new(4.into(), (-6).into())), "-2/3");
    }

    #[test]
    fn valuations() {
        let q = BigRational::new(BigInt::from(50), BigInt::from(3));
        assert_eq!(rat_valuation(&q, 5), Some(2));
        assert_eq!(rat_valuation(&q, 3), Some(-1));
        assert_eq!(rat_valuation(&BigRational::zero(), 3), None);
    }
}
