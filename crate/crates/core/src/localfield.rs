//! Unramified p-adic rings `O_v = Z_p[x]/(g_v)` at finite precision.
//!
//! Elements are stored in floating form `p^val · u` where the unit part `u`
//! has coordinates on `1, x, …, x^(d_v-1)` known modulo `p^(prec - val)`.
//! `prec` is the absolute precision: the element is known modulo `p^prec`.
//! Relative precision is capped at the ring precision `N`, so costs stay
//! bounded, and every operation propagates the worst-case loss.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::field::{int_valuation, ArithError, Field, ZeroTest};
use crate::finitegeom::fq::{FiniteField, Fq};
use crate::fp;
use crate::numberfield::{NfElement, NumberField, Place};

/// Default number of p-adic digits.
pub const DEFAULT_PRECISION: i64 = 30;

/// Marker for infinite precision or valuation (exact zero).
pub const INF: i64 = i64::MAX / 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalError {
    #[error("denominator divisible by p")]
    NonIntegralDenominator,
    #[error("element is not a unit")]
    NotAUnit,
    #[error("reduction is not a square in the residue field")]
    NotASquare,
    #[error("precision exhausted: nonzero element vanishes to working precision")]
    PrecisionExhausted,
    #[error("hnf: a pivot column contains only entries indistinguishable from zero")]
    PrecisionAmbiguous,
    #[error("arithmetic error: {0}")]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalElement {
    val: i64,
    prec: i64,
    /// Unit-part coordinates reduced modulo `p^(prec - val)`; empty when
    /// the element is an exact or inexact zero.
    unit: Vec<BigInt>,
}

impl LocalElement {
    pub fn valuation(&self) -> i64 {
        self.val
    }
    /// Absolute precision; `INF` for exact zero.
    pub fn precision(&self) -> i64 {
        self.prec
    }
    pub fn relative_precision(&self) -> i64 {
        if self.prec >= INF {
            INF
        } else {
            self.prec - self.val
        }
    }
    pub fn is_exact_zero(&self) -> bool {
        self.val >= INF
    }
    /// True when the element is an exact zero or `O(p^k)`.
    pub fn is_zero_like(&self) -> bool {
        self.unit.is_empty()
    }
    pub fn unit_digits(&self) -> &[BigInt] {
        &self.unit
    }
}

#[derive(Debug, Clone)]
pub struct LocalRing {
    p: u64,
    pb: BigInt,
    d: usize,
    prec: i64,
    /// Monic lifted factor modulo `p^prec`, length `d + 1`.
    g: Vec<BigInt>,
    /// `x^k mod g` for `d ≤ k ≤ 2d - 2`.
    high_powers: Vec<Vec<BigInt>>,
    /// Image of `θ^i` for `i < deg K`, when built from a number field.
    theta_powers: Vec<Vec<BigInt>>,
    place: Option<Place>,
    residue: FiniteField,
}

impl PartialEq for LocalRing {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.prec == other.prec && self.g == other.g
    }
}

fn mod_pow(pb: &BigInt, k: i64) -> BigInt {
    pb.pow(k.max(0) as u32)
}

/// Hensel-lift the factorization `f ≡ g·h (mod p)` to `p^n`, returning `g`.
fn hensel_lift_factor(f: &[BigInt], g0: &[u64], p: u64, n: i64) -> Vec<BigInt> {
    let fbar: Vec<u64> = f
        .iter()
        .map(|c| c.mod_floor(&BigInt::from(p)).to_u64().unwrap())
        .collect();
    let (h0, r) = fp::pdivrem(&fbar, g0, p);
    debug_assert!(r.is_empty());
    let (one, _, t) = fp::pxgcd(g0, &h0, p);
    debug_assert_eq!(one, vec![1]);
    let pb = BigInt::from(p);
    let to_big = |v: &[u64]| v.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>();
    let mut g = to_big(g0);
    let mut h = to_big(&h0);
    let mut pk = pb.clone();
    for _ in 1..n {
        let pk1 = &pk * &pb;
        // e = (f - g h) / p^k mod p
        let gh = int_poly_mul(&g, &h);
        let mut e: Vec<BigInt> = (0..f.len())
            .map(|i| {
                let c = &f[i] - gh.get(i).cloned().unwrap_or_default();
                (c / &pk).mod_floor(&pb)
            })
            .collect();
        while e.last().is_some_and(Zero::is_zero) {
            e.pop();
        }
        if !e.is_empty() {
            let e64: Vec<u64> = e.iter().map(|c| c.to_u64().unwrap()).collect();
            // B = e t mod g, A = (e - B h) / g, both mod p.
            let b = fp::prem(&fp::pmul(&e64, &t, p), g0, p);
            let rest = fp::psub(&e64, &fp::pmul(&b, &h0, p), p);
            let (a, r) = fp::pdivrem(&rest, g0, p);
            debug_assert!(r.is_empty());
            for (i, c) in b.iter().enumerate() {
                g[i] = (&g[i] + &pk * BigInt::from(*c)).mod_floor(&pk1);
            }
            for (i, c) in a.iter().enumerate() {
                h[i] = (&h[i] + &pk * BigInt::from(*c)).mod_floor(&pk1);
            }
        }
        pk = pk1;
    }
    g
}

fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl LocalRing {
    /// The ring `Z_p` at precision `n`.
    pub fn zp(p: u64, n: i64) -> Self {
        Self::build(p, vec![BigInt::zero(), BigInt::one()], n, None, Vec::new())
    }

    /// Completion of `K` at `v`, with the factor of `f_K` Hensel-lifted to `p^n`.
    pub fn lift_place(k: &NumberField, v: &Place, n: i64) -> Self {
        let g = hensel_lift_factor(k.defining_poly(), &v.factor, v.p, n);
        let mut ring = Self::build(v.p, g, n, Some(v.clone()), Vec::new());
        // θ ↦ x mod g
        let dk = k.degree();
        let mut theta = Vec::with_capacity(dk);
        let mut cur = vec![BigInt::zero(); ring.d];
        cur[0] = BigInt::one();
        for _ in 0..dk {
            theta.push(cur.clone());
            cur = ring.mul_by_x(&cur, &ring.modulus_at(n));
        }
        ring.theta_powers = theta;
        ring
    }

    fn build(p: u64, g: Vec<BigInt>, n: i64, place: Option<Place>, theta_powers: Vec<Vec<BigInt>>) -> Self {
        assert!(p % 2 == 1, "p must be odd");
        let d = g.len() - 1;
        let pb = BigInt::from(p);
        let pn = mod_pow(&pb, n);
        let mut high_powers = Vec::new();
        // x^d = -(g_0 + … + g_{d-1} x^{d-1})
        let mut cur: Vec<BigInt> = g[..d].iter().map(|c| (-c).mod_floor(&pn)).collect();
        for _ in d..(2 * d).saturating_sub(1) {
            high_powers.push(cur.clone());
            let top = cur[d - 1].clone();
            let mut next = vec![BigInt::zero(); d];
            for i in (1..d).rev() {
                next[i] = cur[i - 1].clone();
            }
            for i in 0..d {
                next[i] = (&next[i] - &top * &g[i]).mod_floor(&pn);
            }
            cur = next;
        }
        let gbar: Vec<u64> = g.iter().map(|c| c.mod_floor(&pb).to_u64().unwrap()).collect();
        let residue = if d == 1 { FiniteField::prime(p) } else { FiniteField::new(p, &gbar) };
        LocalRing { p, pb, d, prec: n, g, high_powers, theta_powers, place, residue }
    }

    fn modulus_at(&self, k: i64) -> BigInt {
        mod_pow(&self.pb, k)
    }

    fn mul_by_x(&self, a: &[BigInt], m: &BigInt) -> Vec<BigInt> {
        let d = self.d;
        let top = a[d - 1].clone();
        let mut next = vec![BigInt::zero(); d];
        for i in (1..d).rev() {
            next[i] = a[i - 1].clone();
        }
        for i in 0..d {
            next[i] = (&next[i] - &top * &self.g[i]).mod_floor(m);
        }
        next
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn precision(&self) -> i64 {
        self.prec
    }
    /// Residue degree `d_v`.
    pub fn degree(&self) -> usize {
        self.d
    }
    pub fn place(&self) -> Option<&Place> {
        self.place.as_ref()
    }
    pub fn lifted_factor(&self) -> &[BigInt] {
        &self.g
    }
    pub fn residue_field(&self) -> &FiniteField {
        &self.residue
    }

    /// Same ring at a different precision.
    pub fn with_precision(&self, k: &NumberField, n: i64) -> Self {
        match &self.place {
            Some(v) => Self::lift_place(k, v, n),
            None => Self::zp(self.p, n),
        }
    }

    /// Build an element from a digit vector known modulo `p^prec`.
    pub fn from_digits(&self, digits: &[BigInt], prec: i64) -> LocalElement {
        self.normalize(0, prec, digits.to_vec())
    }

    /// Normalize `p^val · digits` known to absolute precision `prec`.
    fn normalize(&self, val: i64, prec: i64, mut digits: Vec<BigInt>) -> LocalElement {
        let prec = prec.min(val + self.prec);
        let rel = prec - val;
        if rel <= 0 {
            return LocalElement { val: prec, prec, unit: Vec::new() };
        }
        let m = self.modulus_at(rel);
        digits.resize(self.d, BigInt::zero());
        for c in digits.iter_mut() {
            *c = c.mod_floor(&m);
        }
        let shift = digits
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| int_valuation(c, self.p) as i64)
            .min();
        match shift {
            None => LocalElement { val: prec, prec, unit: Vec::new() },
            Some(s) => {
                let pw = self.modulus_at(s);
                let rel2 = rel - s;
                let m2 = self.modulus_at(rel2);
                let unit = digits.iter().map(|c| (c / &pw).mod_floor(&m2)).collect();
                LocalElement { val: val + s, prec, unit }
            }
        }
    }

    pub fn exact_zero(&self) -> LocalElement {
        LocalElement { val: INF, prec: INF, unit: Vec::new() }
    }

    /// `O(p^k)`.
    pub fn inexact_zero(&self, k: i64) -> LocalElement {
        LocalElement { val: k, prec: k, unit: Vec::new() }
    }

    pub fn from_bigint_exact(&self, n: &BigInt) -> LocalElement {
        if n.is_zero() {
            return self.exact_zero();
        }
        let v = int_valuation(n, self.p) as i64;
        let unit = n / self.modulus_at(v);
        self.normalize(v, v + self.prec, vec![unit])
    }

    pub fn from_rational(&self, q: &BigRational) -> LocalElement {
        if q.is_zero() {
            return self.exact_zero();
        }
        let num = self.from_bigint_exact(q.numer());
        let den = self.from_bigint_exact(q.denom());
        self.div(&num, &den).expect("nonzero denominator")
    }

    /// Integer coordinates `c_i` of `Σ c_i x^i`, exact.
    pub fn from_int_coords(&self, coords: &[BigInt]) -> LocalElement {
        if coords.iter().all(Zero::is_zero) {
            return self.exact_zero();
        }
        let v = coords
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| int_valuation(c, self.p) as i64)
            .min()
            .unwrap();
        let pw = self.modulus_at(v);
        let digits = coords.iter().map(|c| c / &pw).collect();
        self.normalize(v, v + self.prec, digits)
    }

    /// Embed an element of `K` via `θ ↦ x mod g_v`.
    pub fn embed(&self, x: &NfElement) -> Result<LocalElement, LocalError> {
        assert!(!self.theta_powers.is_empty(), "ring was not built from a number field");
        if x.is_zero() {
            return Ok(self.exact_zero());
        }
        let den = x.denominator();
        let m = self.modulus_at(self.prec);
        let mut acc = vec![BigInt::zero(); self.d];
        for (i, c) in x.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let ci = (c * BigRational::from_integer(den.clone())).to_integer();
            for j in 0..self.d {
                acc[j] += &ci * &self.theta_powers[i][j];
            }
        }
        for a in acc.iter_mut() {
            *a = a.mod_floor(&m);
        }
        let num = self.normalize(0, self.prec, acc);
        if num.is_zero_like() {
            return Err(LocalError::PrecisionExhausted);
        }
        let den = self.from_bigint_exact(&den);
        Ok(self.div(&num, &den)?)
    }

    /// Coordinates on `1, x, …, x^(d-1)` as elements of `Z_p` (in `zp_ring`).
    pub fn coordinates(&self, a: &LocalElement, zp_ring: &LocalRing) -> Vec<LocalElement> {
        if a.is_exact_zero() {
            return vec![zp_ring.exact_zero(); self.d];
        }
        if a.is_zero_like() {
            return vec![zp_ring.inexact_zero(a.prec); self.d];
        }
        a.unit
            .iter()
            .map(|c| zp_ring.normalize(a.val, a.prec, vec![c.clone()]))
            .collect()
    }

    /// Inverse of [`coordinates`](Self::coordinates).
    pub fn from_coordinates(&self, coords: &[LocalElement]) -> LocalElement {
        let mut acc = self.exact_zero();
        let mut basis = vec![BigInt::zero(); self.d];
        for (i, c) in coords.iter().enumerate() {
            basis.iter_mut().for_each(|b| *b = BigInt::zero());
            basis[i] = BigInt::one();
            let bi = self.from_int_coords(&basis);
            let ci = self.scalar_from_zp(c);
            acc = self.add(&acc, &self.mul(&ci, &bi));
        }
        acc
    }

    /// Move an element of a ring over the same place (at any precision)
    /// into this one.
    pub fn rebase(&self, a: &LocalElement) -> LocalElement {
        if a.is_exact_zero() {
            return self.exact_zero();
        }
        self.normalize(a.val, a.prec, a.unit.clone())
    }

    /// Reinterpret a `Z_p` element as an element of this ring.
    pub fn scalar_from_zp(&self, c: &LocalElement) -> LocalElement {
        if c.is_exact_zero() {
            return self.exact_zero();
        }
        if c.is_zero_like() {
            return self.inexact_zero(c.prec);
        }
        self.normalize(c.val, c.prec, vec![c.unit[0].clone()])
    }

    /// Reduction of an integral element to the residue field.
    pub fn residue(&self, a: &LocalElement) -> Result<Fq, LocalError> {
        if a.is_exact_zero() || (a.val >= 1) {
            return Ok(self.residue.zero());
        }
        if a.val < 0 {
            return Err(LocalError::NonIntegralDenominator);
        }
        if a.is_zero_like() {
            return Err(LocalError::PrecisionExhausted);
        }
        let digits: Vec<u64> = a
            .unit
            .iter()
            .map(|c| c.mod_floor(&self.pb).to_u64().unwrap())
            .collect();
        Ok(self.residue.from_coords(&digits))
    }

    /// Teichmüller-free lift of a residue-field element (coordinates as integers).
    pub fn lift_residue(&self, a: &Fq) -> LocalElement {
        let coords: Vec<BigInt> = (0..self.d).map(|i| BigInt::from(a.coord(i))).collect();
        self.from_int_coords(&coords)
    }

    pub fn unit_inverse_mod_p(&self, a: &LocalElement) -> Result<Vec<BigInt>, LocalError> {
        let r = self.residue_of_unit(a);
        let inv = self.residue.inv(&r).map_err(|_| LocalError::NotAUnit)?;
        Ok((0..self.d).map(|i| BigInt::from(inv.coord(i))).collect())
    }

    fn residue_of_unit(&self, a: &LocalElement) -> Fq {
        let digits: Vec<u64> = a
            .unit
            .iter()
            .map(|c| c.mod_floor(&self.pb).to_u64().unwrap())
            .collect();
        self.residue.from_coords(&digits)
    }

    /// Multiply unit-part digit vectors modulo `p^rel`.
    fn mul_digits(&self, a: &[BigInt], b: &[BigInt], rel: i64) -> Vec<BigInt> {
        let m = self.modulus_at(rel);
        let d = self.d;
        if d == 1 {
            return vec![(&a[0] * &b[0]).mod_floor(&m)];
        }
        let mut wide = vec![BigInt::zero(); 2 * d - 1];
        for i in 0..d {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..d {
                wide[i + j] += &a[i] * &b[j];
            }
        }
        let mut out: Vec<BigInt> = wide[..d].to_vec();
        for k in d..2 * d - 1 {
            let c = wide[k].mod_floor(&m);
            if c.is_zero() {
                continue;
            }
            for j in 0..d {
                out[j] += &c * &self.high_powers[k - d][j];
            }
        }
        out.iter().map(|c| c.mod_floor(&m)).collect()
    }

    /// Square root of a unit whose reduction is a square; the root is the one
    /// congruent to `start` when given.
    pub fn hensel_sqrt(&self, a: &LocalElement, start: Option<&Fq>) -> Result<LocalElement, LocalError> {
        if a.is_zero_like() || a.val != 0 {
            return Err(LocalError::NotAUnit);
        }
        let r = self.residue_of_unit(a);
        let root0 = match start {
            Some(s) => {
                if self.residue.mul(s, s) != r {
                    return Err(LocalError::NotASquare);
                }
                *s
            }
            None => self.residue.sqrt(&r).ok_or(LocalError::NotASquare)?,
        };
        let mut y = self.lift_residue(&root0);
        let half = self.inv(&self.from_i64(2))?;
        let mut digits = 1i64;
        while digits < a.prec {
            digits *= 2;
            let q = self.div(a, &y)?;
            y = self.mul(&self.add(&y, &q), &half);
        }
        Ok(y)
    }

    /// `p`-adic valuation of an element of `K` at this place.
    pub fn valuation_of(&self, x: &NfElement) -> Result<i64, LocalError> {
        if x.is_zero() {
            return Ok(INF);
        }
        Ok(self.embed(x)?.val)
    }
}

impl Field for LocalRing {
    type Elem = LocalElement;

    fn zero(&self) -> LocalElement {
        self.exact_zero()
    }
    fn one(&self) -> LocalElement {
        self.from_i64(1)
    }
    fn from_i64(&self, n: i64) -> LocalElement {
        self.from_bigint_exact(&BigInt::from(n))
    }
    fn from_bigint(&self, n: &BigInt) -> LocalElement {
        self.from_bigint_exact(n)
    }
    fn add(&self, a: &LocalElement, b: &LocalElement) -> LocalElement {
        if a.is_exact_zero() {
            return b.clone();
        }
        if b.is_exact_zero() {
            return a.clone();
        }
        let prec = a.prec.min(b.prec);
        let v = a.val.min(b.val);
        if v >= prec {
            return self.inexact_zero(prec);
        }
        let mut digits = vec![BigInt::zero(); self.d];
        for (x, shift) in [(a, a.val - v), (b, b.val - v)] {
            if x.unit.is_empty() || x.val >= prec {
                continue;
            }
            let pw = self.modulus_at(shift);
            for i in 0..self.d {
                digits[i] += &x.unit[i] * &pw;
            }
        }
        self.normalize(v, prec, digits)
    }
    fn sub(&self, a: &LocalElement, b: &LocalElement) -> LocalElement {
        self.add(a, &self.neg(b))
    }
    fn neg(&self, a: &LocalElement) -> LocalElement {
        if a.unit.is_empty() {
            return a.clone();
        }
        let m = self.modulus_at(a.prec - a.val);
        LocalElement {
            val: a.val,
            prec: a.prec,
            unit: a.unit.iter().map(|c| (-c).mod_floor(&m)).collect(),
        }
    }
    fn mul(&self, a: &LocalElement, b: &LocalElement) -> LocalElement {
        if a.is_exact_zero() || b.is_exact_zero() {
            return self.exact_zero();
        }
        let v = a.val + b.val;
        let rel = a.relative_precision().min(b.relative_precision()).min(self.prec);
        if a.unit.is_empty() || b.unit.is_empty() {
            return self.inexact_zero(v + rel.max(0));
        }
        let digits = self.mul_digits(&a.unit, &b.unit, rel);
        self.normalize(v, v + rel, digits)
    }
    fn inv(&self, a: &LocalElement) -> Result<LocalElement, ArithError> {
        if a.is_exact_zero() {
            return Err(ArithError::DivisionByZero);
        }
        if a.unit.is_empty() {
            return Err(ArithError::PrecisionLoss);
        }
        let rel = a.relative_precision();
        let unit = LocalElement { val: 0, prec: rel, unit: a.unit.clone() };
        let y0 = self.unit_inverse_mod_p(&unit).map_err(|_| ArithError::DivisionByZero)?;
        // Newton: y ← y (2 − a y)
        let mut y = self.normalize(0, rel, y0);
        let two = self.from_i64(2);
        let mut known = 1i64;
        while known < rel {
            known *= 2;
            let ay = self.mul(&unit, &y);
            y = self.mul(&y, &self.sub(&two, &ay));
        }
        let digits = y.unit.clone();
        Ok(self.normalize(-a.val, -a.val + rel, digits))
    }
    fn zero_test(&self, a: &LocalElement) -> ZeroTest {
        if a.is_exact_zero() {
            ZeroTest::Zero
        } else if a.unit.is_empty() {
            ZeroTest::Ambiguous
        } else {
            ZeroTest::NonZero
        }
    }
    fn same_repr(&self, a: &LocalElement, b: &LocalElement) -> bool {
        a == b
    }
}

/// Matrices over `Z_p` (entries may carry negative valuation).
pub type ZpMatrix = Vec<Vec<LocalElement>>;

/// Pivot tie-breaking rule for [`hnf_zp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotOrder {
    /// Minimal valuation, ties to the lowest row.
    #[default]
    LowestRow,
    /// Minimal valuation, ties to the highest row.
    HighestRow,
}

#[derive(Debug, Clone)]
pub struct HnfResult {
    pub u: ZpMatrix,
    pub h_mat: ZpMatrix,
    /// Number of trailing zero rows.
    pub h: usize,
}

pub fn identity_matrix(k: &LocalRing, n: usize) -> ZpMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { k.one() } else { k.exact_zero() }).collect())
        .collect()
}

pub fn mat_mul(k: &LocalRing, a: &ZpMatrix, b: &ZpMatrix) -> ZpMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = k.exact_zero();
                    for t in 0..inner {
                        acc = k.add(&acc, &k.mul(&row[t], &b[t][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Row-echelon form `H = U·M` over `Z_p` with `U` unimodular.
pub fn hnf_zp(k: &LocalRing, m: &ZpMatrix, order: PivotOrder) -> Result<HnfResult, LocalError> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut h = m.clone();
    let mut u = identity_matrix(k, rows);
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let mut best: Option<(usize, i64)> = None;
        let mut saw_ambiguous = false;
        for r in row..rows {
            let e = &h[r][col];
            if e.is_zero_like() {
                if !e.is_exact_zero() {
                    saw_ambiguous = true;
                }
                continue;
            }
            let better = match best {
                None => true,
                Some((_, bv)) => match order {
                    PivotOrder::LowestRow => e.val < bv,
                    PivotOrder::HighestRow => e.val <= bv,
                },
            };
            if better {
                best = Some((r, e.val));
            }
        }
        let Some((pr, _)) = best else {
            if saw_ambiguous {
                return Err(LocalError::PrecisionAmbiguous);
            }
            continue;
        };
        h.swap(row, pr);
        u.swap(row, pr);
        // Scale the pivot row so the pivot becomes p^val.
        let piv = h[row][col].clone();
        let unit = LocalElement { val: 0, prec: piv.relative_precision(), unit: piv.unit.clone() };
        let uinv = k.inv(&unit)?;
        for c in 0..cols {
            h[row][c] = k.mul(&h[row][c], &uinv);
        }
        for c in 0..rows {
            u[row][c] = k.mul(&u[row][c], &uinv);
        }
        let piv = h[row][col].clone();
        for r in (row + 1)..rows {
            if h[r][col].is_exact_zero() {
                continue;
            }
            let factor = k.div(&h[r][col], &piv)?;
            for c in 0..cols {
                let t = k.mul(&factor, &h[row][c]);
                h[r][c] = k.sub(&h[r][c], &t);
            }
            for c in 0..rows {
                let t = k.mul(&factor, &u[row][c]);
                u[r][c] = k.sub(&u[r][c], &t);
            }
            h[r][col] = k.inexact_zero(h[r][col].prec.min(piv.prec));
            if h[r][col].prec >= INF {
                h[r][col] = k.exact_zero();
            }
        }
        row += 1;
    }
    Ok(HnfResult { u, h_mat: h, h: rows - row })
}

/// Rank of a matrix over `F_p` given as residues.
pub fn rank_mod_p(rows: &[Vec<u64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pr) = (rank..m.len()).find(|&r| m[r][col] % p != 0) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = fp::invmod(m[rank][col], p).unwrap();
        for c in 0..ncols {
            m[rank][c] = fp::mulmod(m[rank][c], inv, p);
        }
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let f = m[r][col];
                for c in 0..ncols {
                    m[r][c] = fp::submod(m[r][c], fp::mulmod(f, m[rank][c], p), p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Residue of a `Z_p` element as an integer in `[0, p)`.
pub fn zp_residue(a: &LocalElement, p: u64) -> Result<u64, LocalError> {
    if a.is_exact_zero() {
        return Ok(0);
    }
    if a.val < 0 {
        return Err(LocalError::NonIntegralDenominator);
    }
    if a.val >= 1 && a.prec >= 1 {
        return Ok(0);
    }
    if a.prec < 1 || a.unit.is_empty() {
        return Err(LocalError::PrecisionExhausted);
    }
    Ok(a.unit[0].mod_floor(&BigInt::from(p)).to_u64().unwrap())
}

/// The `Z_p` element as a rational integer representative, when integral.
pub fn zp_to_bigint(a: &LocalElement, p: u64) -> Option<BigInt> {
    if a.is_zero_like() {
        return Some(BigInt::zero());
    }
    if a.val < 0 {
        return None;
    }
    Some(&a.unit[0] * BigInt::from(p).pow(a.val as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numberfield::cube_root_two;

    #[test]
    fn lifted_cube_root_of_two() {
        let k = cube_root_two();
        for v in k.split_prime(109).unwrap() {
            let r = LocalRing::lift_place(&k, &v, 20);
            let theta = r.embed(&k.gen()).unwrap();
            let cube = r.mul(&theta, &r.mul(&theta, &theta));
            let diff = r.sub(&cube, &r.from_i64(2));
            assert!(diff.is_zero_like());
            assert!(diff.precision() >= 20);
            // θ̃³ ≡ 2 (mod 109)
            let t0 = r.residue(&theta).unwrap().coord(0);
            assert_eq!(fp::powmod(t0, 3, 109), 2);
        }
    }

    #[test]
    fn degree_two_place_over_five() {
        let k = cube_root_two();
        let places = k.split_prime(5).unwrap();
        let v = &places[1];
        assert_eq!(v.factor, vec![4, 3, 1]);
        let r = LocalRing::lift_place(&k, v, 12);
        let g = r.lifted_factor();
        assert_eq!(g[0].mod_floor(&BigInt::from(5)), BigInt::from(4));
        assert_eq!(g[1].mod_floor(&BigInt::from(5)), BigInt::from(3));
        // f_K(θ) = 0 in the ring.
        let theta = r.embed(&k.gen()).unwrap();
        let val = r.sub(&r.pow(&theta, 3), &r.from_i64(2));
        assert!(val.is_zero_like());
        // coordinates of θ² reduced mod g: x² ≡ -3x - 4 (mod 5).
        let zp = LocalRing::zp(5, 12);
        let c = r.coordinates(&r.embed(&k.from_i64_coeffs(&[0, 0, 1])).unwrap(), &zp);
        assert_eq!(zp_residue(&c[0], 5).unwrap(), 1);
        assert_eq!(zp_residue(&c[1], 5).unwrap(), 2);
    }

    #[test]
    fn embedding_is_a_ring_map() {
        let k = cube_root_two();
        let a = k.from_coeffs(&[
            BigRational::new(3.into(), 7.into()),
            BigRational::from_integer((-5).into()),
            BigRational::new(1.into(), 2.into()),
        ]);
        let b = k.from_i64_coeffs(&[11, 0, -4]);
        for v in k.split_prime(5).unwrap().iter().chain(k.split_prime(109).unwrap().iter()) {
            let r = LocalRing::lift_place(&k, v, 15);
            let ea = r.embed(&a).unwrap();
            let eb = r.embed(&b).unwrap();
            let sum = r.sub(&r.embed(&k.add(&a, &b)).unwrap(), &r.add(&ea, &eb));
            let prod = r.sub(&r.embed(&k.mul(&a, &b)).unwrap(), &r.mul(&ea, &eb));
            assert!(sum.is_zero_like() && prod.is_zero_like());
            assert!(prod.precision() >= 14);
            let inv = r.mul(&r.inv(&ea).unwrap(), &ea);
            assert!(r.sub(&inv, &r.one()).is_zero_like());
        }
    }

    #[test]
    fn valuation_of_theta_minus_three() {
        let k = cube_root_two();
        let places = k.split_prime(5).unwrap();
        let r = LocalRing::lift_place(&k, &places[0], 10);
        let x = k.from_i64_coeffs(&[-3, 1]);
        assert!(r.valuation_of(&x).unwrap() >= 1);
        assert_eq!(r.valuation_of(&k.from_i64(5)).unwrap(), 1);
        assert_eq!(r.valuation_of(&k.zero()).unwrap(), INF);
    }

    #[test]
    fn square_root_of_one_plus_seven_to_the_fifth() {
        let zp = LocalRing::zp(7, 20);
        let a = zp.from_i64(1 + 7i64.pow(5));
        let r = zp.hensel_sqrt(&a, None).unwrap();
        assert!(zp.sub(&zp.mul(&r, &r), &a).is_zero_like());
        let root = zp_residue(&r, 7).unwrap();
        assert!(root == 1 || root == 6);
        let four = zp.from_i64(4);
        let two = zp.hensel_sqrt(&four, Some(&zp.residue_field().from_u64(2))).unwrap();
        assert!(zp.sub(&two, &zp.from_i64(2)).is_zero_like());
        assert_eq!(zp.hensel_sqrt(&zp.from_i64(3), None), Err(LocalError::NotASquare));
    }

    #[test]
    fn coordinates_round_trip() {
        let k = cube_root_two();
        let places = k.split_prime(5).unwrap();
        let r = LocalRing::lift_place(&k, &places[1], 10);
        let zp = LocalRing::zp(5, 10);
        let x = r.embed(&k.from_i64_coeffs(&[7, -2, 9])).unwrap();
        let back = r.from_coordinates(&r.coordinates(&x, &zp));
        assert!(r.sub(&back, &x).is_zero_like());
        let basis = r.from_int_coords(&[BigInt::zero(), BigInt::one()]);
        let c = r.coordinates(&basis, &zp);
        assert!(c[0].is_zero_like());
        assert_eq!(zp_residue(&c[1], 5).unwrap(), 1);
    }

    #[test]
    fn precision_is_tracked() {
        let zp = LocalRing::zp(5, 10);
        let a = zp.from_i64(1);
        let b = zp.add(&a, &zp.from_bigint_exact(&BigInt::from(5).pow(12)));
        let diff = zp.sub(&b, &a);
        assert_eq!(zp.zero_test(&diff), ZeroTest::Ambiguous);
        assert_eq!(diff.precision(), 10);
        let tiny = zp.from_i64(25);
        let q = zp.div(&a, &tiny).unwrap();
        assert_eq!(q.valuation(), -2);
        assert_eq!(q.precision(), 8);
    }

    fn int_matrix(k: &LocalRing, rows: &[&[i64]]) -> ZpMatrix {
        rows.iter().map(|r| r.iter().map(|&c| k.from_i64(c)).collect()).collect()
    }

    #[test]
    fn hnf_examples() {
        let k = LocalRing::zp(5, 10);
        let id = int_matrix(&k, &[&[1, 0], &[0, 1]]);
        assert_eq!(hnf_zp(&k, &id, PivotOrder::LowestRow).unwrap().h, 0);
        let zero = vec![vec![k.exact_zero(); 2]; 3];
        assert_eq!(hnf_zp(&k, &zero, PivotOrder::LowestRow).unwrap().h, 3);
        let m = int_matrix(&k, &[&[5, 0], &[1, 5], &[0, 1]]);
        for order in [PivotOrder::LowestRow, PivotOrder::HighestRow] {
            let res = hnf_zp(&k, &m, order).unwrap();
            assert_eq!(res.h, 1);
            let um = mat_mul(&k, &res.u, &m);
            for (r1, r2) in um.iter().zip(&res.h_mat) {
                for (a, b) in r1.iter().zip(r2) {
                    assert!(k.sub(a, b).is_zero_like());
                }
            }
            assert!(res.h_mat[2].iter().all(|e| e.is_zero_like()));
        }
    }

    #[test]
    fn rank_over_fp() {
        assert_eq!(rank_mod_p(&[vec![79, 64, 0], vec![31, 0, 0], vec![104, 0, 82]], 109), 3);
        assert_eq!(rank_mod_p(&[vec![1, 2], vec![2, 4]], 7), 1);
    }
}
