//! Dense univariate polynomials over a [`Field`], stored low degree first.
//!
//! The zero polynomial is the empty vector. Trimming is strict: a leading
//! coefficient whose zero test is ambiguous is an error rather than a guess,
//! so p-adic callers never silently drop a possibly nonzero term.

use crate::field::{ArithError, Field, ZeroTest};

pub type Poly<E> = Vec<E>;

/// Drop leading zero coefficients.
pub fn trim<F: Field>(k: &F, p: &mut Poly<F::Elem>) -> Result<(), ArithError> {
    while let Some(c) = p.last() {
        match k.zero_test(c) {
            ZeroTest::Zero => {
                p.pop();
            }
            ZeroTest::NonZero => return Ok(()),
            ZeroTest::Ambiguous => return Err(ArithError::PrecisionLoss),
        }
    }
    Ok(())
}

pub fn degree<E>(p: &Poly<E>) -> Option<usize> {
    p.len().checked_sub(1)
}

pub fn constant<F: Field>(k: &F, c: F::Elem) -> Poly<F::Elem> {
    match k.zero_test(&c) {
        ZeroTest::Zero => Vec::new(),
        _ => vec![c],
    }
}

pub fn add<F: Field>(k: &F, a: &Poly<F::Elem>, b: &Poly<F::Elem>) -> Result<Poly<F::Elem>, ArithError> {
    let mut out = add_raw(k, a, b);
    trim(k, &mut out)?;
    Ok(out)
}

/// Coefficientwise sum without trimming.
pub fn add_raw<F: Field>(k: &F, a: &Poly<F::Elem>, b: &Poly<F::Elem>) -> Poly<F::Elem> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => k.add(x, y),
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

pub fn neg<F: Field>(k: &F, a: &Poly<F::Elem>) -> Poly<F::Elem> {
    a.iter().map(|c| k.neg(c)).collect()
}

pub fn sub<F: Field>(k: &F, a: &Poly<F::Elem>, b: &Poly<F::Elem>) -> Result<Poly<F::Elem>, ArithError> {
    add(k, a, &neg(k, b))
}

/// Product. The leading coefficient is the product of leading coefficients,
/// so no trimming is needed when both inputs are trimmed.
pub fn mul<F: Field>(k: &F, a: &Poly<F::Elem>, b: &Poly<F::Elem>) -> Poly<F::Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![k.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = k.add(&out[i + j], &k.mul(x, y));
        }
    }
    out
}

pub fn scale<F: Field>(k: &F, a: &Poly<F::Elem>, c: &F::Elem) -> Poly<F::Elem> {
    a.iter().map(|x| k.mul(x, c)).collect()
}

/// Euclidean division `a = q b + r` with `deg r < deg b`. The remainder is
/// trimmed strictly; the quotient keeps its formal length.
pub fn divrem<F: Field>(
    k: &F,
    a: &Poly<F::Elem>,
    b: &Poly<F::Elem>,
) -> Result<(Poly<F::Elem>, Poly<F::Elem>), ArithError> {
    let (q, mut r) = divrem_formal(k, a, b)?;
    trim(k, &mut r)?;
    Ok((q, r))
}

/// Quotient of a division known to be exact; the formal remainder is dropped.
pub fn div_exact<F: Field>(k: &F, a: &Poly<F::Elem>, b: &Poly<F::Elem>) -> Result<Poly<F::Elem>, ArithError> {
    Ok(divrem_formal(k, a, b)?.0)
}

fn divrem_formal<F: Field>(
    k: &F,
    a: &Poly<F::Elem>,
    b: &Poly<F::Elem>,
) -> Result<(Poly<F::Elem>, Poly<F::Elem>), ArithError> {
    let db = degree(b).ok_or(ArithError::DivisionByZero)?;
    let lead_inv = k.inv(&b[db])?;
    if a.len() <= db {
        return Ok((Vec::new(), a.clone()));
    }
    let mut r = a.clone();
    let mut q = vec![k.zero(); a.len() - db];
    for i in (0..q.len()).rev() {
        let c = k.mul(&r[i + db], &lead_inv);
        for (j, bj) in b.iter().enumerate().take(db) {
            r[i + j] = k.sub(&r[i + j], &k.mul(&c, bj));
        }
        q[i] = c;
    }
    r.truncate(db);
    Ok((q, r))
}

pub fn rem<F: Field>(k: &F, a: &Poly<F::Elem>, b: &Poly<F::Elem>) -> Result<Poly<F::Elem>, ArithError> {
    Ok(divrem(k, a, b)?.1)
}

pub fn make_monic<F: Field>(k: &F, a: &Poly<F::Elem>) -> Result<Poly<F::Elem>, ArithError> {
    let lead = a.last().ok_or(ArithError::DivisionByZero)?;
    let inv = k.inv(lead)?;
    let mut out = scale(k, a, &inv);
    if let Some(last) = out.last_mut() {
        *last = k.one();
    }
    Ok(out)
}

/// Extended gcd: returns monic `d` with `s a + t b = d`.
/// When both inputs are zero, `d = 0` and `s = t = 0`.
#[allow(clippy::type_complexity)]
pub fn xgcd<F: Field>(
    k: &F,
    a: &Poly<F::Elem>,
    b: &Poly<F::Elem>,
) -> Result<(Poly<F::Elem>, Poly<F::Elem>, Poly<F::Elem>), ArithError> {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (vec![k.one()], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![k.one()]);
    while !r1.is_empty() {
        let (q, r) = divrem(k, &r0, &r1)?;
        let s2 = sub(k, &s0, &mul(k, &q, &s1))?;
        let t2 = sub(k, &t0, &mul(k, &q, &t1))?;
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    match r0.last() {
        None => Ok((Vec::new(), Vec::new(), Vec::new())),
        Some(lead) => {
            let inv = k.inv(lead)?;
            Ok((make_monic(k, &r0)?, scale(k, &s0, &inv), scale(k, &t0, &inv)))
        }
    }
}

pub fn eval<F: Field>(k: &F, p: &Poly<F::Elem>, x: &F::Elem) -> F::Elem {
    let mut acc = k.zero();
    for c in p.iter().rev() {
        acc = k.add(&k.mul(&acc, x), c);
    }
    acc
}

pub fn derivative<F: Field>(k: &F, p: &Poly<F::Elem>) -> Poly<F::Elem> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| k.mul(c, &k.from_i64(i as i64)))
        .collect()
}

/// Resultant of two trimmed polynomials by the Euclidean algorithm.
pub fn resultant<F: Field>(k: &F, a: &Poly<F::Elem>, b: &Poly<F::Elem>) -> Result<F::Elem, ArithError> {
    if a.is_empty() || b.is_empty() {
        return Ok(k.zero());
    }
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut acc = k.one();
    loop {
        let da = a.len() - 1;
        let db = b.len() - 1;
        if db == 0 {
            return Ok(k.mul(&acc, &k.pow(&b[0], da as u64)));
        }
        let r = rem(k, &a, &b)?;
        if r.is_empty() {
            return Ok(k.zero());
        }
        let dr = r.len() - 1;
        if (da * db) % 2 == 1 {
            acc = k.neg(&acc);
        }
        acc = k.mul(&acc, &k.pow(&b[db], (da - dr) as u64));
        a = b;
        b = r;
    }
}

/// Structural equality of two polynomials.
pub fn same_repr<F: Field>(k: &F, a: &Poly<F::Elem>, b: &Poly<F::Elem>) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| k.same_repr(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use num_rational::BigRational;

    fn q(v: &[i64]) -> Poly<BigRational> {
        v.iter().map(|&c| BigRational::from_integer(c.into())).collect()
    }

    #[test]
    fn division_identity() {
        let k = Rationals;
        let a = q(&[3, -2, 0, 5, 1]);
        let b = q(&[1, 0, 2]);
        let (qq, r) = divrem(&k, &a, &b).unwrap();
        assert!(r.len() < b.len());
        let back = add(&k, &mul(&k, &qq, &b), &r).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn xgcd_bezout() {
        let k = Rationals;
        // (x-1)(x+2) and (x-1)(x^2+1)
        let a = mul(&k, &q(&[-1, 1]), &q(&[2, 1]));
        let b = mul(&k, &q(&[-1, 1]), &q(&[1, 0, 1]));
        let (d, s, t) = xgcd(&k, &a, &b).unwrap();
        assert_eq!(d, q(&[-1, 1]));
        let lhs = add(&k, &mul(&k, &s, &a), &mul(&k, &t, &b)).unwrap();
        assert_eq!(lhs, d);
    }
}
