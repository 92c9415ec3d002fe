//! Truncated power series over a [`Field`], stored as coefficient vectors
//! of a fixed length `n` (terms `t^0 … t^(n-1)`).

use crate::field::{ArithError, Field};

pub type Series<E> = Vec<E>;

pub fn zero<F: Field>(k: &F, n: usize) -> Series<F::Elem> {
    vec![k.zero(); n]
}

/// `c + t`.
pub fn shifted_t<F: Field>(k: &F, c: &F::Elem, n: usize) -> Series<F::Elem> {
    let mut s = zero(k, n);
    if n > 0 {
        s[0] = c.clone();
    }
    if n > 1 {
        s[1] = k.one();
    }
    s
}

pub fn add<F: Field>(k: &F, a: &Series<F::Elem>, b: &Series<F::Elem>) -> Series<F::Elem> {
    a.iter().zip(b).map(|(x, y)| k.add(x, y)).collect()
}

pub fn sub<F: Field>(k: &F, a: &Series<F::Elem>, b: &Series<F::Elem>) -> Series<F::Elem> {
    a.iter().zip(b).map(|(x, y)| k.sub(x, y)).collect()
}

pub fn scale<F: Field>(k: &F, a: &Series<F::Elem>, c: &F::Elem) -> Series<F::Elem> {
    a.iter().map(|x| k.mul(x, c)).collect()
}

pub fn mul<F: Field>(k: &F, a: &Series<F::Elem>, b: &Series<F::Elem>) -> Series<F::Elem> {
    let n = a.len().min(b.len());
    let mut out = zero(k, n);
    for (i, x) in a.iter().enumerate().take(n) {
        if k.zero_test(x) == crate::field::ZeroTest::Zero {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] = k.add(&out[i + j], &k.mul(x, y));
        }
    }
    out
}

/// Multiplicative inverse; the constant term must be invertible.
pub fn inv<F: Field>(k: &F, a: &Series<F::Elem>) -> Result<Series<F::Elem>, ArithError> {
    let n = a.len();
    let mut out = zero(k, n);
    if n == 0 {
        return Ok(out);
    }
    let c0 = k.inv(&a[0])?;
    out[0] = c0.clone();
    for m in 1..n {
        let mut acc = k.zero();
        for i in 1..=m {
            acc = k.add(&acc, &k.mul(&a[i], &out[m - i]));
        }
        out[m] = k.neg(&k.mul(&acc, &c0));
    }
    Ok(out)
}

pub fn div<F: Field>(k: &F, a: &Series<F::Elem>, b: &Series<F::Elem>) -> Result<Series<F::Elem>, ArithError> {
    Ok(mul(k, a, &inv(k, b)?))
}

/// `t · d/dt`, which keeps the length.
pub fn euler_derivative<F: Field>(k: &F, a: &Series<F::Elem>) -> Series<F::Elem> {
    a.iter().enumerate().map(|(i, c)| k.mul(c, &k.from_i64(i as i64))).collect()
}

/// `d/dt`, padded with a zero so the length is kept.
pub fn derivative<F: Field>(k: &F, a: &Series<F::Elem>) -> Series<F::Elem> {
    let mut out: Series<F::Elem> = a.iter().enumerate().skip(1).map(|(i, c)| k.mul(c, &k.from_i64(i as i64))).collect();
    out.push(k.zero());
    out
}

/// Multiply by `t^s`, dropping terms past the length.
pub fn shift<F: Field>(k: &F, a: &Series<F::Elem>, s: usize) -> Series<F::Elem> {
    let n = a.len();
    let mut out = zero(k, n);
    for i in 0..n.saturating_sub(s) {
        out[i + s] = a[i].clone();
    }
    out
}

/// `p(s)` for a polynomial `p` (low degree first).
pub fn compose_poly<F: Field>(k: &F, p: &[F::Elem], s: &Series<F::Elem>) -> Series<F::Elem> {
    let n = s.len();
    let mut acc = zero(k, n);
    for c in p.iter().rev() {
        acc = mul(k, &acc, s);
        if n > 0 {
            acc[0] = k.add(&acc[0], c);
        }
    }
    acc
}

/// Evaluate a series at a point.
pub fn eval<F: Field>(k: &F, a: &Series<F::Elem>, x: &F::Elem) -> F::Elem {
    let mut acc = k.zero();
    for c in a.iter().rev() {
        acc = k.add(&k.mul(&acc, x), c);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use num_rational::BigRational;

    fn q(v: &[i64]) -> Series<BigRational> {
        v.iter().map(|&c| BigRational::from_integer(c.into())).collect()
    }

    #[test]
    fn inverse_of_one_minus_t() {
        let k = Rationals;
        let s = q(&[1, -1, 0, 0, 0, 0]);
        assert_eq!(inv(&k, &s).unwrap(), q(&[1, 1, 1, 1, 1, 1]));
    }

    #[test]
    fn composition_and_derivative() {
        let k = Rationals;
        // (1 + t)^2 = 1 + 2t + t^2
        let s = q(&[1, 1, 0, 0]);
        let p = q(&[0, 0, 1]);
        assert_eq!(compose_poly(&k, &p, &s), q(&[1, 2, 1, 0]));
        assert_eq!(derivative(&k, &q(&[1, 2, 1, 0])), q(&[2, 2, 0, 0]));
        assert_eq!(euler_derivative(&k, &q(&[1, 2, 1, 0])), q(&[0, 2, 2, 0]));
    }
}
