//! Finite fields `F_q = F_p[x]/(g)` with fixed-size element storage, and
//! quadratic extensions over them.

use std::sync::Arc;

use crate::field::{ArithError, Field, ZeroTest};
use crate::fp::{addmod, invmod, mulmod, submod};

/// Largest supported extension degree of a residue field.
pub const MAX_DEG: usize = 6;

/// Residue fields above this size are rejected by enumeration-based code.
pub const DEFAULT_RESIDUE_CAP: u64 = 1 << 20;

/// Squares are tabulated for fields up to this size.
const SQUARE_TABLE_LIMIT: u64 = 1 << 22;

/// Element of `F_q` as coordinates on `1, x, …, x^(deg-1)`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct Fq(pub [u32; MAX_DEG]);

impl Fq {
    pub fn coord(&self, i: usize) -> u64 {
        self.0[i] as u64
    }
}

#[derive(Clone, Debug)]
pub struct FiniteField {
    p: u64,
    deg: usize,
    /// Monic irreducible modulus, low degree first, length `deg + 1`.
    modulus: [u64; MAX_DEG + 1],
    q: u64,
    squares: Option<Arc<Vec<u64>>>,
    nonresidue: Fq,
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.deg == other.deg && self.modulus == other.modulus
    }
}

impl FiniteField {
    /// Prime field `F_p`.
    pub fn prime(p: u64) -> Self {
        Self::new(p, &[0, 1])
    }

    /// `F_p[x]/(g)` for a monic irreducible `g` (low degree first).
    pub fn new(p: u64, g: &[u64]) -> Self {
        assert!(p > 2 && p < (1 << 31), "odd prime below 2^31 required");
        let deg = g.len() - 1;
        assert!((1..=MAX_DEG).contains(&deg), "unsupported residue degree {deg}");
        assert_eq!(g[deg], 1, "modulus must be monic");
        let mut modulus = [0u64; MAX_DEG + 1];
        modulus[..=deg].copy_from_slice(g);
        let q = p.checked_pow(deg as u32).expect("field size overflows u64");
        let mut k = FiniteField { p, deg, modulus, q, squares: None, nonresidue: Fq::default() };
        if q <= SQUARE_TABLE_LIMIT {
            let mut bits = vec![0u64; (q as usize).div_ceil(64)];
            for i in 0..q {
                let x = k.from_index(i);
                let s = k.index(&k.mul(&x, &x)) as usize;
                bits[s / 64] |= 1 << (s % 64);
            }
            k.squares = Some(Arc::new(bits));
        }
        let mut i = 2;
        loop {
            let c = k.from_index(i);
            if !k.is_square(&c) {
                k.nonresidue = c;
                break;
            }
            i += 1;
        }
        k
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn degree(&self) -> usize {
        self.deg
    }
    pub fn size(&self) -> u64 {
        self.q
    }
    pub fn modulus(&self) -> &[u64] {
        &self.modulus[..=self.deg]
    }
    pub fn nonresidue(&self) -> Fq {
        self.nonresidue
    }

    /// Bijection `F_q → [0, q)`, base-p digits of the coordinates.
    pub fn index(&self, a: &Fq) -> u64 {
        let mut acc = 0u64;
        for i in (0..self.deg).rev() {
            acc = acc * self.p + a.0[i] as u64;
        }
        acc
    }

    pub fn from_index(&self, mut i: u64) -> Fq {
        let mut out = Fq::default();
        for c in out.0.iter_mut().take(self.deg) {
            *c = (i % self.p) as u32;
            i /= self.p;
        }
        out
    }

    pub fn from_coords(&self, coords: &[u64]) -> Fq {
        let mut out = Fq::default();
        for (i, &c) in coords.iter().enumerate().take(self.deg) {
            out.0[i] = (c % self.p) as u32;
        }
        out
    }

    pub fn from_u64(&self, n: u64) -> Fq {
        let mut out = Fq::default();
        out.0[0] = (n % self.p) as u32;
        out
    }

    pub fn is_square(&self, a: &Fq) -> bool {
        match &self.squares {
            Some(bits) => {
                let i = self.index(a) as usize;
                bits[i / 64] >> (i % 64) & 1 == 1
            }
            None => {
                *a == Fq::default() || self.pow(a, (self.q - 1) / 2) == self.one()
            }
        }
    }

    /// Quadratic character: 0, 1 or -1.
    pub fn chi(&self, a: &Fq) -> i32 {
        if *a == Fq::default() {
            0
        } else if self.is_square(a) {
            1
        } else {
            -1
        }
    }

    pub fn sqrt(&self, a: &Fq) -> Option<Fq> {
        if *a == Fq::default() {
            return Some(*a);
        }
        if !self.is_square(a) {
            return None;
        }
        tonelli_shanks(self, a, (self.q - 1) as u128, &self.nonresidue)
    }

    fn reduce_wide(&self, wide: &mut [u64; 2 * MAX_DEG]) -> Fq {
        let d = self.deg;
        let p = self.p;
        for k in (d..2 * d - 1).rev() {
            let c = wide[k];
            if c == 0 {
                continue;
            }
            for j in 0..d {
                wide[k - d + j] = submod(wide[k - d + j], mulmod(c, self.modulus[j], p), p);
            }
        }
        let mut out = Fq::default();
        for i in 0..d {
            out.0[i] = wide[i] as u32;
        }
        out
    }

    /// Map an element of `F_p` expressed in another context into this one.
    pub fn embed_prime(&self, c: u64) -> Fq {
        self.from_u64(c)
    }
}

/// Exponentiation with a 128-bit exponent.
pub fn pow_u128<F: Field>(k: &F, a: &F::Elem, mut e: u128) -> F::Elem {
    let mut base = a.clone();
    let mut acc = k.one();
    while e > 0 {
        if e & 1 == 1 {
            acc = k.mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = k.mul(&base, &base);
        }
    }
    acc
}

/// Tonelli-Shanks in a finite field with multiplicative group of order
/// `order`, given a quadratic nonresidue. Returns `None` for non-squares.
pub fn tonelli_shanks<F: Field>(k: &F, a: &F::Elem, order: u128, nonres: &F::Elem) -> Option<F::Elem> {
    let one = k.one();
    let mut q = order;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut m = s;
    let mut c = pow_u128(k, nonres, q);
    let mut t = pow_u128(k, a, q);
    let mut r = pow_u128(k, a, q.div_ceil(2));
    loop {
        if k.same_repr(&t, &one) {
            return Some(r);
        }
        let mut i = 0;
        let mut tt = t.clone();
        while !k.same_repr(&tt, &one) {
            tt = k.mul(&tt, &tt);
            i += 1;
            if i == m {
                return None;
            }
        }
        let mut b = c.clone();
        for _ in 0..(m - i - 1) {
            b = k.mul(&b, &b);
        }
        m = i;
        c = k.mul(&b, &b);
        t = k.mul(&t, &c);
        r = k.mul(&r, &b);
    }
}

impl Field for FiniteField {
    type Elem = Fq;

    fn zero(&self) -> Fq {
        Fq::default()
    }
    fn one(&self) -> Fq {
        self.from_u64(1)
    }
    fn from_i64(&self, n: i64) -> Fq {
        self.from_u64(n.rem_euclid(self.p as i64) as u64)
    }
    fn add(&self, a: &Fq, b: &Fq) -> Fq {
        let mut out = Fq::default();
        for i in 0..self.deg {
            out.0[i] = addmod(a.0[i] as u64, b.0[i] as u64, self.p) as u32;
        }
        out
    }
    fn sub(&self, a: &Fq, b: &Fq) -> Fq {
        let mut out = Fq::default();
        for i in 0..self.deg {
            out.0[i] = submod(a.0[i] as u64, b.0[i] as u64, self.p) as u32;
        }
        out
    }
    fn neg(&self, a: &Fq) -> Fq {
        self.sub(&Fq::default(), a)
    }
    fn mul(&self, a: &Fq, b: &Fq) -> Fq {
        let p = self.p;
        if self.deg == 1 {
            let mut out = Fq::default();
            out.0[0] = mulmod(a.0[0] as u64, b.0[0] as u64, p) as u32;
            return out;
        }
        let d = self.deg;
        let mut wide = [0u64; 2 * MAX_DEG];
        for i in 0..d {
            let x = a.0[i] as u64;
            if x == 0 {
                continue;
            }
            for j in 0..d {
                wide[i + j] = addmod(wide[i + j], mulmod(x, b.0[j] as u64, p), p);
            }
        }
        self.reduce_wide(&mut wide)
    }
    fn inv(&self, a: &Fq) -> Result<Fq, ArithError> {
        if *a == Fq::default() {
            return Err(ArithError::DivisionByZero);
        }
        if self.deg == 1 {
            return Ok(self.from_u64(invmod(a.0[0] as u64, self.p).unwrap()));
        }
        Ok(self.pow(a, self.q - 2))
    }
    fn zero_test(&self, a: &Fq) -> ZeroTest {
        if *a == Fq::default() {
            ZeroTest::Zero
        } else {
            ZeroTest::NonZero
        }
    }
    fn same_repr(&self, a: &Fq, b: &Fq) -> bool {
        a == b
    }
}

/// Quadratic extension `F_q[X]/(X² − c1·X − c0)` of a finite field.
#[derive(Clone, Debug)]
pub struct QuadExt {
    pub base: FiniteField,
    pub c1: Fq,
    pub c0: Fq,
}

impl QuadExt {
    /// `F_{q²}` presented as `F_q(√n)` for the stored nonresidue `n`.
    pub fn degree_two(base: &FiniteField) -> Self {
        QuadExt { base: base.clone(), c1: Fq::default(), c0: base.nonresidue() }
    }

    /// `F_q[x]/(x² + a1 x + a0)` for an irreducible quadratic.
    pub fn from_monic_quadratic(base: &FiniteField, a1: &Fq, a0: &Fq) -> Self {
        QuadExt { base: base.clone(), c1: base.neg(a1), c0: base.neg(a0) }
    }

    pub fn norm(&self, a: &(Fq, Fq)) -> Fq {
        let k = &self.base;
        let (x, y) = a;
        let t = k.add(&k.mul(x, x), &k.mul(&k.mul(x, y), &self.c1));
        k.sub(&t, &k.mul(&k.mul(y, y), &self.c0))
    }

    pub fn is_square(&self, a: &(Fq, Fq)) -> bool {
        self.base.is_square(&self.norm(a))
    }

    pub fn sqrt(&self, a: &(Fq, Fq)) -> Option<(Fq, Fq)> {
        if a.0 == Fq::default() && a.1 == Fq::default() {
            return Some(*a);
        }
        if !self.is_square(a) {
            return None;
        }
        let q = self.base.size() as u128;
        let order = q * q - 1;
        // Any element whose norm is a nonresidue is a nonresidue here.
        let mut i = 1u64;
        let nonres = loop {
            let cand = (self.base.from_index(i % self.base.size()), self.base.from_index(i / self.base.size() + 1));
            if !self.is_square(&cand) {
                break cand;
            }
            i += 1;
        };
        tonelli_shanks(self, a, order, &nonres)
    }
}

impl Field for QuadExt {
    type Elem = (Fq, Fq);

    fn zero(&self) -> (Fq, Fq) {
        (Fq::default(), Fq::default())
    }
    fn one(&self) -> (Fq, Fq) {
        (self.base.one(), Fq::default())
    }
    fn from_i64(&self, n: i64) -> (Fq, Fq) {
        (self.base.from_i64(n), Fq::default())
    }
    fn add(&self, a: &(Fq, Fq), b: &(Fq, Fq)) -> (Fq, Fq) {
        (self.base.add(&a.0, &b.0), self.base.add(&a.1, &b.1))
    }
    fn sub(&self, a: &(Fq, Fq), b: &(Fq, Fq)) -> (Fq, Fq) {
        (self.base.sub(&a.0, &b.0), self.base.sub(&a.1, &b.1))
    }
    fn neg(&self, a: &(Fq, Fq)) -> (Fq, Fq) {
        (self.base.neg(&a.0), self.base.neg(&a.1))
    }
    fn mul(&self, a: &(Fq, Fq), b: &(Fq, Fq)) -> (Fq, Fq) {
        let k = &self.base;
        let x0y0 = k.mul(&a.0, &b.0);
        let x1y1 = k.mul(&a.1, &b.1);
        let cross = k.add(&k.mul(&a.0, &b.1), &k.mul(&a.1, &b.0));
        // X² = c1 X + c0
        (
            k.add(&x0y0, &k.mul(&x1y1, &self.c0)),
            k.add(&cross, &k.mul(&x1y1, &self.c1)),
        )
    }
    fn inv(&self, a: &(Fq, Fq)) -> Result<(Fq, Fq), ArithError> {
        let k = &self.base;
        let n = self.norm(a);
        let ninv = k.inv(&n)?;
        // conjugate of a + bX is (a + b c1) − bX
        let conj = (k.add(&a.0, &k.mul(&a.1, &self.c1)), k.neg(&a.1));
        Ok((k.mul(&conj.0, &ninv), k.mul(&conj.1, &ninv)))
    }
    fn zero_test(&self, a: &(Fq, Fq)) -> ZeroTest {
        if a.0 == Fq::default() && a.1 == Fq::default() {
            ZeroTest::Zero
        } else {
            ZeroTest::NonZero
        }
    }
    fn same_repr(&self, a: &(Fq, Fq), b: &(Fq, Fq)) -> bool {
        a == b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_inverse_and_sqrt() {
        let k = FiniteField::prime(109);
        for i in 1..109 {
            let a = k.from_index(i);
            assert_eq!(k.mul(&a, &k.inv(&a).unwrap()), k.one());
            if let Some(r) = k.sqrt(&a) {
                assert_eq!(k.mul(&r, &r), a);
            }
        }
        assert_eq!((1..109).filter(|&i| k.is_square(&k.from_index(i))).count(), 54);
    }

    #[test]
    fn degree_two_residue_field() {
        // x² + 3x + 4 is irreducible mod 5.
        let k = FiniteField::new(5, &[4, 3, 1]);
        assert_eq!(k.size(), 25);
        let mut units = 0;
        for i in 1..25 {
            let a = k.from_index(i);
            assert_eq!(k.mul(&a, &k.inv(&a).unwrap()), k.one());
            units += 1;
            if let Some(r) = k.sqrt(&a) {
                assert_eq!(k.mul(&r, &r), a);
            }
        }
        assert_eq!(units, 24);
    }

    #[test]
    fn quadratic_extension_arithmetic() {
        let k = FiniteField::prime(7);
        let e = QuadExt::degree_two(&k);
        let mut squares = 0;
        for i in 0..7 {
            for j in 0..7 {
                let a = (k.from_index(i), k.from_index(j));
                if i + j > 0 {
                    assert_eq!(e.mul(&a, &e.inv(&a).unwrap()), e.one());
                    if let Some(r) = e.sqrt(&a) {
                        assert_eq!(e.mul(&r, &r), a);
                        squares += 1;
                    }
                }
            }
        }
        assert_eq!(squares, 24);
    }
}
