//! Number fields `K = Q[x]/(f)` with exact rational arithmetic on the power
//! basis `1, θ, …, θ^(d-1)`, plus splitting of rational primes into places.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{ArithError, Field, Rationals, ZeroTest};
use crate::fp;
use crate::poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberFieldError {
    #[error("defining polynomial must be monic with integer coefficients")]
    NotMonic,
    #[error("defining polynomial must have degree at least 1")]
    DegreeTooSmall,
    #[error("defining polynomial is not squarefree (zero discriminant)")]
    ZeroDiscriminant,
    #[error("defining polynomial is reducible over Q")]
    Reducible,
    #[error("could not certify irreducibility of the defining polynomial")]
    IrreducibilityUnprovable,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} ramifies or divides the index of Z[θ]")]
    RamifiedOrIndexDivisor(u64),
    #[error("zero element has no inverse")]
    ZeroElement,
    #[error("arithmetic error: {0}")]
    Arith(#[from] ArithError),
}

/// An element of `K` in power-basis coordinates; always of length `d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NfElement(pub Vec<BigRational>);

impl NfElement {
    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    /// Least common denominator of the coordinates.
    pub fn denominator(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

/// A place of `K` above an unramified rational prime `p` not dividing the
/// index, described by a monic irreducible factor of `f mod p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Place {
    pub p: u64,
    /// Position among the factors of `f mod p`, sorted by degree then coefficients.
    pub index: usize,
    pub residue_degree: usize,
    /// Monic irreducible factor of `f mod p`, low degree first.
    pub factor: Vec<u64>,
}

impl Place {
    /// Size of the residue field.
    pub fn norm(&self) -> u128 {
        (self.p as u128).pow(self.residue_degree as u32)
    }
}

#[derive(Debug, Clone)]
pub struct NumberField {
    /// Monic defining polynomial, low degree first.
    poly: Vec<BigInt>,
    poly_q: Vec<BigRational>,
    disc: BigInt,
    /// `θ^k` reduced to the power basis for `k < 2d - 1`.
    powers: Vec<Vec<BigRational>>,
}

/// Resultant over `Q` by the Euclidean algorithm.
pub fn resultant(a: &[BigRational], b: &[BigRational]) -> BigRational {
    let k = Rationals;
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    poly::trim(&k, &mut a).unwrap();
    poly::trim(&k, &mut b).unwrap();
    if a.is_empty() || b.is_empty() {
        return BigRational::zero();
    }
    let mut acc = BigRational::one();
    loop {
        let da = a.len() - 1;
        let db = b.len() - 1;
        if db == 0 {
            return acc * pow_rat(&b[0], da);
        }
        let r = poly::rem(&k, &a, &b).unwrap();
        if r.is_empty() {
            return BigRational::zero();
        }
        let dr = r.len() - 1;
        if (da * db) % 2 == 1 {
            acc = -acc;
        }
        acc *= pow_rat(&b[db], da - dr);
        a = b;
        b = r;
    }
}

fn pow_rat(x: &BigRational, e: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

fn int_poly_divides(g: &[BigInt], f: &[BigInt]) -> bool {
    let k = Rationals;
    let gq: Vec<BigRational> = g.iter().cloned().map(BigRational::from_integer).collect();
    let fq: Vec<BigRational> = f.iter().cloned().map(BigRational::from_integer).collect();
    poly::rem(&k, &fq, &gq).unwrap().is_empty()
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n > 1_000_000_000_000 {
        return None;
    }
    let mut out = Vec::new();
    let facs = fp::factor_u64(n);
    out.push(1u64);
    for (q, e) in facs {
        let cur = out.clone();
        let mut pw = 1u64;
        for _ in 0..e {
            pw *= q;
            out.extend(cur.iter().map(|d| d * pw));
        }
    }
    Some(out.into_iter().flat_map(|d| [BigInt::from(d), -BigInt::from(d)]).collect())
}

impl NumberField {
    /// Build `K = Q[x]/(f)` from integer coefficients, low degree first.
    pub fn new(coeffs: &[BigInt]) -> Result<Self, NumberFieldError> {
        let mut f = coeffs.to_vec();
        while f.last().is_some_and(Zero::is_zero) {
            f.pop();
        }
        if f.len() < 2 {
            return Err(NumberFieldError::DegreeTooSmall);
        }
        if !f.last().unwrap().is_one() {
            return Err(NumberFieldError::NotMonic);
        }
        let n = f.len() - 1;
        let fq: Vec<BigRational> = f.iter().cloned().map(BigRational::from_integer).collect();
        let df = poly::derivative(&Rationals, &fq);
        let res = resultant(&fq, &df);
        if res.is_zero() {
            return Err(NumberFieldError::ZeroDiscriminant);
        }
        let sign = if (n * (n - 1) / 2) % 2 == 1 { -1 } else { 1 };
        let disc = (res * BigRational::from_integer(sign.into())).to_integer();
        certify_irreducible(&f, &disc)?;

        let mut powers = Vec::with_capacity(2 * n);
        let mut cur = vec![BigRational::zero(); n];
        cur[0] = BigRational::one();
        for _ in 0..(2 * n).max(2) {
            powers.push(cur.clone());
            // multiply by θ
            let top = cur[n - 1].clone();
            let mut next = vec![BigRational::zero(); n];
            for i in (1..n).rev() {
                next[i] = cur[i - 1].clone();
            }
            for i in 0..n {
                next[i] -= &top * &fq[i];
            }
            cur = next;
        }
        Ok(NumberField { poly: f, poly_q: fq, disc, powers })
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn defining_poly(&self) -> &[BigInt] {
        &self.poly
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    pub fn gen(&self) -> NfElement {
        NfElement(self.powers[1].clone())
    }

    pub fn basis_element(&self, i: usize) -> NfElement {
        NfElement(self.powers[i].clone())
    }

    pub fn from_rational(&self, q: BigRational) -> NfElement {
        let mut v = vec![BigRational::zero(); self.degree()];
        v[0] = q;
        NfElement(v)
    }

    /// Element from power-basis coordinates; missing entries are zero and
    /// extra entries are reduced modulo `f`.
    pub fn from_coeffs(&self, coeffs: &[BigRational]) -> NfElement {
        let n = self.degree();
        let mut v = vec![BigRational::zero(); n];
        for (i, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let pw = self.power_of_theta(i);
            for j in 0..n {
                v[j] += c * &pw[j];
            }
        }
        NfElement(v)
    }

    fn power_of_theta(&self, k: usize) -> Vec<BigRational> {
        if k < self.powers.len() {
            return self.powers[k].clone();
        }
        let half = self.power_of_theta(k / 2);
        let rest = self.power_of_theta(k - k / 2);
        self.mul(&NfElement(half), &NfElement(rest)).0
    }

    pub fn from_i64_coeffs(&self, coeffs: &[i64]) -> NfElement {
        let q: Vec<BigRational> = coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect();
        self.from_coeffs(&q)
    }

    pub fn norm(&self, x: &NfElement) -> BigRational {
        resultant(&self.poly_q, &x.0)
    }

    pub fn invert(&self, x: &NfElement) -> Result<NfElement, NumberFieldError> {
        if x.is_zero() {
            return Err(NumberFieldError::ZeroElement);
        }
        let k = Rationals;
        let mut xp = x.0.clone();
        poly::trim(&k, &mut xp)?;
        let (d, s, _) = poly::xgcd(&k, &xp, &self.poly_q)?;
        debug_assert_eq!(d.len(), 1);
        Ok(self.from_coeffs(&s))
    }

    /// Whether every coordinate is `p`-integral. Since `p` does not divide
    /// the index at admissible places, this matches integrality at every
    /// place above `p`.
    pub fn is_p_integral(&self, x: &NfElement, p: u64) -> bool {
        let pb = BigInt::from(p);
        x.0.iter().all(|c| !c.denom().is_multiple_of(&pb))
    }

    /// Split an odd rational prime `p` into places.
    pub fn split_prime(&self, p: u64) -> Result<Vec<Place>, NumberFieldError> {
        if !fp::is_prime(p) {
            return Err(NumberFieldError::NotPrime(p));
        }
        let fbar = self.reduce_poly_mod(p);
        if fbar.len() != self.poly.len() || !fp::is_squarefree(&fbar, p) {
            return Err(NumberFieldError::RamifiedOrIndexDivisor(p));
        }
        let factors = if p == 2 {
            factor_mod_two(&fbar)
        } else {
            fp::factor_squarefree(&fbar, p)
        };
        Ok(factors
            .into_iter()
            .enumerate()
            .map(|(index, g)| Place { p, index, residue_degree: g.len() - 1, factor: g })
            .collect())
    }

    /// `f mod p`, low degree first.
    pub fn reduce_poly_mod(&self, p: u64) -> Vec<u64> {
        let pb = BigInt::from(p);
        fp::ptrim(
            self.poly
                .iter()
                .map(|c| c.mod_floor(&pb).to_u64().unwrap())
                .collect(),
        )
    }
}

fn factor_mod_two(f: &[u64]) -> Vec<Vec<u64>> {
    let mut rest = f.to_vec();
    let mut out = Vec::new();
    let mut d = 1;
    while rest.len() > 1 {
        let mut found = false;
        for bits in 0u64..(1 << d) {
            let mut g: Vec<u64> = (0..d).map(|i| (bits >> i) & 1).collect();
            g.push(1);
            let (q, r) = fp::pdivrem(&rest, &g, 2);
            if r.is_empty() {
                out.push(g);
                rest = q;
                found = true;
                break;
            }
        }
        if !found {
            d += 1;
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn certify_irreducible(f: &[BigInt], disc: &BigInt) -> Result<(), NumberFieldError> {
    let n = f.len() - 1;
    if n == 1 {
        return Ok(());
    }
    for q in fp::primes_below(1000) {
        if disc.is_multiple_of(&BigInt::from(q)) {
            continue;
        }
        let qb = BigInt::from(q);
        let fbar: Vec<u64> = f.iter().map(|c| c.mod_floor(&qb).to_u64().unwrap()).collect();
        if fp::is_irreducible(&fbar, q) {
            return Ok(());
        }
    }
    // Every reducible polynomial of degree at most 5 has a factor of degree 1 or 2.
    let a0 = &f[0];
    if a0.is_zero() {
        return Err(NumberFieldError::Reducible);
    }
    let divs = divisors(a0).ok_or(NumberFieldError::IrreducibilityUnprovable)?;
    for r in &divs {
        if int_poly_divides(&[-r.clone(), BigInt::one()], f) {
            return Err(NumberFieldError::Reducible);
        }
    }
    if n <= 3 {
        return Ok(());
    }
    let cauchy: BigInt = f.iter().map(|c| c.abs()).max().unwrap() + 1;
    let bmax = (&cauchy * BigInt::from(2)).to_i64().ok_or(NumberFieldError::IrreducibilityUnprovable)?;
    if bmax > 100_000 || divs.len() > 20_000 {
        return Err(NumberFieldError::IrreducibilityUnprovable);
    }
    for c in &divs {
        for b in -bmax..=bmax {
            if int_poly_divides(&[c.clone(), BigInt::from(b), BigInt::one()], f) {
                return Err(NumberFieldError::Reducible);
            }
        }
    }
    if n <= 5 {
        Ok(())
    } else {
        Err(NumberFieldError::IrreducibilityUnprovable)
    }
}

impl Field for NumberField {
    type Elem = NfElement;

    fn zero(&self) -> NfElement {
        NfElement(vec![BigRational::zero(); self.degree()])
    }
    fn one(&self) -> NfElement {
        self.from_rational(BigRational::one())
    }
    fn from_i64(&self, n: i64) -> NfElement {
        self.from_rational(BigRational::from_integer(n.into()))
    }
    fn add(&self, a: &NfElement, b: &NfElement) -> NfElement {
        NfElement(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect())
    }
    fn sub(&self, a: &NfElement, b: &NfElement) -> NfElement {
        NfElement(a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect())
    }
    fn neg(&self, a: &NfElement) -> NfElement {
        NfElement(a.0.iter().map(|x| -x).collect())
    }
    fn mul(&self, a: &NfElement, b: &NfElement) -> NfElement {
        let n = self.degree();
        let mut prod = vec![BigRational::zero(); 2 * n - 1];
        for (i, x) in a.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.0.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        let mut out = vec![BigRational::zero(); n];
        for (k, c) in prod.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for j in 0..n {
                if !self.powers[k][j].is_zero() {
                    out[j] += c * &self.powers[k][j];
                }
            }
        }
        NfElement(out)
    }
    fn inv(&self, a: &NfElement) -> Result<NfElement, ArithError> {
        self.invert(a).map_err(|_| ArithError::DivisionByZero)
    }
    fn zero_test(&self, a: &NfElement) -> ZeroTest {
        if a.is_zero() {
            ZeroTest::Zero
        } else {
            ZeroTest::NonZero
        }
    }
    fn same_repr(&self, a: &NfElement, b: &NfElement) -> bool {
        a == b
    }
    fn from_bigint(&self, n: &BigInt) -> NfElement {
        self.from_rational(BigRational::from_integer(n.clone()))
    }
}

/// The field `Q(∛2)` used by the bundled examples.
pub fn cube_root_two() -> NumberField {
    NumberField::new(&[BigInt::from(-2), BigInt::zero(), BigInt::zero(), BigInt::one()])
        .expect("x^3 - 2 is irreducible")
}
