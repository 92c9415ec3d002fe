//! Local expansions of `ω_k = x^(k-1) dx / y`, tiny integrals in residue
//! discs, and the periods `∫_D ω` of divisor classes defined over `K`.

use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::field::{ArithError, Field};
use crate::localfield::{LocalElement, LocalError, LocalRing, INF};
use crate::mumford::reduce::ReductionError;
use crate::mumford::{Curve, CurvePoint, Divisor, MumfordError};
use crate::numberfield::{NfElement, NumberField, Place};
use crate::poly;

pub mod series;

use series::Series;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColemanError {
    #[error("point is not integral at the place")]
    NonIntegralPoint,
    #[error("bad reduction at the place above {0}")]
    BadReduction(u64),
    #[error("parameter has valuation {0}, outside the unit ball")]
    OutOfBall(i64),
    #[error("divisor is not in the kernel of reduction")]
    NotInKernel,
    #[error("multiple of the divisor failed to reduce to the identity")]
    KernelAssertionFailed,
    #[error("expansion too short for the requested precision")]
    PrecisionExhausted,
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Mumford(#[from] MumfordError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UniformizerKind {
    /// `t = x − x(Q)`, used when `ỹ(Q̃) ≠ 0`.
    FiniteOrdinary,
    /// `t = y − y(Q)`, used when `Q̃` is an affine Weierstrass point.
    FiniteWeierstrass,
    /// `t = x² / y`.
    Infinity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Uniformizer<E> {
    pub center: CurvePoint<E>,
    pub kind: UniformizerKind,
}

impl<E: Clone> Uniformizer<E> {
    /// Value of the uniformizer at an affine point.
    pub fn parameter<F: Field<Elem = E>>(&self, k: &F, pt: &CurvePoint<E>) -> Option<E> {
        let CurvePoint::Affine(x, y) = pt else {
            return match self.kind {
                UniformizerKind::Infinity => Some(k.zero()),
                _ => None,
            };
        };
        match (&self.kind, &self.center) {
            (UniformizerKind::FiniteOrdinary, CurvePoint::Affine(x0, _)) => Some(k.sub(x, x0)),
            (UniformizerKind::FiniteWeierstrass, CurvePoint::Affine(_, y0)) => Some(k.sub(y, y0)),
            (UniformizerKind::Infinity, _) => k.div(&k.mul(x, x), y).ok(),
            _ => None,
        }
    }
}

/// Choose the well-behaved uniformizer at `q` from its reduction.
pub fn uniformizer_at(
    ring: &LocalRing,
    q: &CurvePoint<LocalElement>,
) -> Result<Uniformizer<LocalElement>, ColemanError> {
    let kind = match q {
        CurvePoint::Infinity => UniformizerKind::Infinity,
        CurvePoint::Affine(x, y) => {
            if !x.is_exact_zero() && x.valuation() < 0 {
                return Err(ColemanError::NonIntegralPoint);
            }
            if y.is_exact_zero() || y.valuation() >= 1 {
                UniformizerKind::FiniteWeierstrass
            } else {
                ring.residue(y)?;
                UniformizerKind::FiniteOrdinary
            }
        }
    };
    Ok(Uniformizer { center: q.clone(), kind })
}

/// `ω_k = (α_0 + α_1 t + …) dt` truncated to `alpha.len()` terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion<E> {
    pub alpha: Vec<E>,
}

fn newton_rounds(n: usize) -> usize {
    (usize::BITS - n.max(1).leading_zeros()) as usize + 2
}

/// Expand `ω_k` (`k ∈ {1, 2}`) in the uniformizer `u` to `n` terms.
pub fn expand_differential<F: Field>(
    curve: &Curve<F>,
    k_index: usize,
    u: &Uniformizer<F::Elem>,
    n: usize,
) -> Result<Expansion<F::Elem>, ColemanError> {
    assert!(k_index == 1 || k_index == 2, "only ω_1 and ω_2 are supported");
    let k = &curve.k;
    let f = &curve.f;
    let alpha = match (&u.kind, &u.center) {
        (UniformizerKind::FiniteOrdinary, CurvePoint::Affine(x0, y0)) => {
            let xs = series::shifted_t(k, x0, n);
            let ys = branch_series(curve, x0, y0, n)?;
            let w = series::inv(k, &ys)?;
            if k_index == 1 {
                w
            } else {
                series::mul(k, &xs, &w)
            }
        }
        (UniformizerKind::FiniteWeierstrass, CurvePoint::Affine(x0, y0)) => {
            let df = poly::derivative(k, f);
            let ys = series::shifted_t(k, y0, n);
            let rhs = series::mul(k, &ys, &ys);
            let mut xs = series::zero(k, n);
            if n > 0 {
                xs[0] = x0.clone();
            }
            for _ in 0..newton_rounds(n) {
                let r = series::sub(k, &series::compose_poly(k, f, &xs), &rhs);
                let d = series::compose_poly(k, &df, &xs);
                xs = series::sub(k, &xs, &series::div(k, &r, &d)?);
                if n > 0 {
                    xs[0] = x0.clone();
                }
            }
            let d = series::compose_poly(k, &df, &xs);
            let two = vec![k.from_i64(2); 1];
            let num = if k_index == 1 {
                let mut s = series::zero(k, n);
                if n > 0 {
                    s[0] = two[0].clone();
                }
                s
            } else {
                series::scale(k, &xs, &two[0])
            };
            series::div(k, &num, &d)?
        }
        (UniformizerKind::Infinity, _) => {
            let (_, s) = infinity_unit(curve, n)?;
            let es = series::euler_derivative(k, &s);
            if k_index == 1 {
                // −(2 t² s + t³ s')
                let two_s = series::scale(k, &s, &k.from_i64(2));
                let inner = series::add(k, &two_s, &es);
                series::scale(k, &series::shift(k, &inner, 2), &k.from_i64(-1))
            } else {
                // −(2 + t s'/s)
                let mut q = series::div(k, &es, &s)?;
                if n > 0 {
                    q[0] = k.add(&q[0], &k.from_i64(2));
                }
                series::scale(k, &q, &k.from_i64(-1))
            }
        }
        _ => unreachable!("finite uniformizers are centred at affine points"),
    };
    Ok(Expansion { alpha })
}

/// At `∞` with `t = x²/y`: returns `(w, s)` where `w = 1/x = t² s(t)` and
/// `s = f̂(w)` for the reversed polynomial `f̂`.
pub fn infinity_unit<F: Field>(
    curve: &Curve<F>,
    n: usize,
) -> Result<(Series<F::Elem>, Series<F::Elem>), ColemanError> {
    let k = &curve.k;
    let rev: Vec<F::Elem> = curve.f.iter().rev().cloned().collect();
    let drev = poly::derivative(k, &rev);
    let mut w = series::zero(k, n);
    for _ in 0..newton_rounds(n) {
        let s = series::compose_poly(k, &rev, &w);
        let h = series::sub(k, &w, &series::shift(k, &s, 2));
        let mut hd = series::scale(k, &series::shift(k, &series::compose_poly(k, &drev, &w), 2), &k.from_i64(-1));
        if n > 0 {
            hd[0] = k.add(&hd[0], &k.one());
        }
        w = series::sub(k, &w, &series::div(k, &h, &hd)?);
    }
    let s = series::compose_poly(k, &rev, &w);
    Ok((w, s))
}

fn ilog(p: u64, mut n: u64) -> i64 {
    let mut e = 0;
    while n >= p {
        n /= p;
        e += 1;
    }
    e
}

/// Lower bound for `k·v − ord_p(k)` over all `k > len`.
fn tail_bound(p: u64, len: usize, v: i64) -> i64 {
    let k = len as i64 + 1;
    k.saturating_mul(v) - ilog(p, k as u64)
}

/// Number of terms needed so the omitted tail of `Σ α_j/(j+1) t^(j+1)` with
/// `val(t) ≥ v` lies in `p^target`.
pub fn terms_needed(p: u64, v: i64, target: i64) -> usize {
    let mut len = 1usize;
    while tail_bound(p, len, v) < target {
        len += 1;
    }
    len
}

/// `∫_Q^P ω = Σ α_j/(j+1) t^(j+1)` for `t = t_Q(P)`, with the truncation
/// error folded into the absolute precision of the result.
pub fn tiny_integral(
    ring: &LocalRing,
    t: &LocalElement,
    e: &Expansion<LocalElement>,
) -> Result<LocalElement, ColemanError> {
    if t.is_exact_zero() {
        return Ok(ring.exact_zero());
    }
    if t.valuation() < 1 {
        return Err(ColemanError::OutOfBall(t.valuation()));
    }
    let mut acc = ring.exact_zero();
    let mut tp = t.clone();
    for (j, a) in e.alpha.iter().enumerate() {
        let term = ring.div(&ring.mul(a, &tp), &ring.from_i64(j as i64 + 1))?;
        acc = ring.add(&acc, &term);
        tp = ring.mul(&tp, t);
    }
    let bound = tail_bound(ring.p(), e.alpha.len(), t.valuation().min(t.precision()));
    Ok(ring.add(&acc, &ring.inexact_zero(bound)))
}

fn val(e: &LocalElement) -> i64 {
    if e.is_exact_zero() {
        INF
    } else {
        e.valuation()
    }
}

/// Whether every support point of a local Mumford pair lies in the residue
/// disc of `∞`.
pub fn supported_near_infinity(d: &Divisor<LocalElement>) -> bool {
    match d.u.len() {
        1 => true,
        2 => val(&d.u[0]) < 0,
        3 => val(&d.u[0]) < 0 && val(&d.u[1]) > val(&d.u[0]),
        _ => false,
    }
}

/// `Σ_{k≥1} h_k p_k` where `p_k` are the power sums of the `deg` roots of
/// `z² − e1 z + e2` (or `z − e1`), plus the truncation error of the tail.
/// The roots must have valuation at least `m2/2` with `m2 ≥ 1`, and the
/// omitted `h_k` valuation at least `vshift − ⌊log_p k⌋`.
fn power_sum_pairing(
    ring: &LocalRing,
    deg: usize,
    e1: &LocalElement,
    e2: &LocalElement,
    h: &[LocalElement],
    vshift: i64,
) -> Result<LocalElement, ColemanError> {
    let m2 = val(e1).saturating_mul(2).min(val(e2));
    if m2 < 1 {
        return Err(ColemanError::NotInKernel);
    }
    let mut prev = ring.from_i64(deg as i64);
    let mut cur = e1.clone();
    let mut acc = ring.exact_zero();
    for (k, hk) in h.iter().enumerate().skip(1) {
        if k == 2 {
            let next = ring.sub(&ring.mul(e1, &cur), &ring.mul(&ring.from_i64(2), e2));
            prev = cur;
            cur = next;
        } else if k > 2 {
            let next = ring.sub(&ring.mul(e1, &cur), &ring.mul(e2, &prev));
            prev = cur;
            cur = next;
        }
        if !hk.is_exact_zero() {
            acc = ring.add(&acc, &ring.mul(hk, &cur));
        }
    }
    let n = h.len().max(2) as i64;
    let bound = vshift + (n.saturating_mul(m2.min(INF / n))) / 2 - ilog(ring.p(), n as u64) - 1;
    Ok(ring.add(&acc, &ring.inexact_zero(bound)))
}

/// `h_k = α_(k−1)/k`, so that `Σ h_k t^k` is the antiderivative.
fn antiderivative(ring: &LocalRing, alpha: &[LocalElement]) -> Result<Vec<LocalElement>, ColemanError> {
    let mut h = vec![ring.exact_zero(); alpha.len() + 1];
    for (j, a) in alpha.iter().enumerate() {
        h[j + 1] = ring.div(a, &ring.from_i64(j as i64 + 1))?;
    }
    Ok(h)
}

/// `Σ_i ∫_∞^{P_i} ω` for a class `[Σ P_i − n∞]` supported in the residue
/// disc of `∞`, from the elementary symmetric functions of the parameters
/// `t(P_i) = x_i² / y_i`.
pub fn infinity_disc_integral(
    ring: &LocalRing,
    d: &Divisor<LocalElement>,
    e_inf: &Expansion<LocalElement>,
) -> Result<LocalElement, ColemanError> {
    if d.is_identity() {
        return Ok(ring.exact_zero());
    }
    if !supported_near_infinity(d) {
        return Err(ColemanError::NotInKernel);
    }
    let c = |p: &Vec<LocalElement>, i: usize| p.get(i).cloned().unwrap_or_else(|| ring.exact_zero());
    let (v0, v1) = (c(&d.v, 0), c(&d.v, 1));
    let (e1, e2) = if d.u.len() == 2 {
        let u0 = &d.u[0];
        (ring.div(&ring.mul(u0, u0), &v0)?, ring.exact_zero())
    } else {
        let (u0, u1) = (&d.u[0], &d.u[1]);
        // Π y_i = v1² u0 − v1 v0 u1 + v0²
        let r = ring.add(
            &ring.sub(&ring.mul(&ring.mul(&v1, &v1), u0), &ring.mul(&ring.mul(&v1, &v0), u1)),
            &ring.mul(&v0, &v0),
        );
        let s2 = ring.sub(&ring.mul(u1, u1), &ring.mul(&ring.from_i64(2), u0));
        let num = ring.sub(&ring.mul(&v0, &s2), &ring.mul(&ring.mul(&v1, u0), u1));
        (ring.div(&num, &r)?, ring.div(&ring.mul(u0, u0), &r)?)
    };
    let h = antiderivative(ring, &e_inf.alpha)?;
    power_sum_pairing(ring, d.u.len() - 1, &e1, &e2, &h, 0)
}

/// Square root of `f(x0 + t)` with constant term `y0`.
pub fn branch_series<F: Field>(
    curve: &Curve<F>,
    x0: &F::Elem,
    y0: &F::Elem,
    n: usize,
) -> Result<Series<F::Elem>, ColemanError> {
    let k = &curve.k;
    let xs = series::shifted_t(k, x0, n);
    let fs = series::compose_poly(k, &curve.f, &xs);
    let two_y0_inv = k.inv(&k.add(y0, y0))?;
    let mut ys = series::zero(k, n);
    if n > 0 {
        ys[0] = y0.clone();
    }
    for m in 1..n {
        let mut acc = fs[m].clone();
        for i in 1..m {
            acc = k.sub(&acc, &k.mul(&ys[i], &ys[m - i]));
        }
        ys[m] = k.mul(&acc, &two_y0_inv);
    }
    Ok(ys)
}

/// Terms needed so that `vshift + ⌊n·m2/2⌋ − ⌊log_p n⌋ − 1 ≥ target`.
fn terms_for(p: u64, m2: i64, vshift: i64, target: i64) -> usize {
    let mut n = 2i64;
    while vshift + n * m2 / 2 - ilog(p, n as u64) - 1 < target {
        n += 1;
    }
    n as usize
}

/// `∫_E ω_k` for a class `E = [P + Q − 2∞]` in the kernel of reduction whose
/// support lies in a finite residue disc, so that `Q̃ = ι(P̃)`.
pub fn finite_disc_integral(
    curve: &Curve<LocalRing>,
    d: &Divisor<LocalElement>,
    k_index: usize,
    target: i64,
) -> Result<LocalElement, ColemanError> {
    let ring = &curve.k;
    let fq = ring.residue_field();
    let (u0, u1) = (&d.u[0], &d.u[1]);
    let c = |i: usize| d.v.get(i).cloned().unwrap_or_else(|| ring.exact_zero());
    let (v0, v1) = (c(0), c(1));
    let (r0, r1) = (ring.residue(u0)?, ring.residue(u1)?);
    let disc = fq.sub(&fq.mul(&r1, &r1), &fq.mul(&fq.from_i64(4), &r0));
    if fq.zero_test(&disc) != crate::field::ZeroTest::Zero {
        return Err(ColemanError::KernelAssertionFailed);
    }
    let xr = fq.neg(&fq.div(&r1, &fq.from_i64(2))?);
    let x0 = ring.lift_residue(&xr);
    let f_red: Vec<_> = curve.f.iter().map(|a| ring.residue(a)).collect::<Result<_, _>>()?;
    let weierstrass = fq.zero_test(&poly::eval(fq, &f_red, &xr)) == crate::field::ZeroTest::Zero;
    if weierstrass {
        // Hensel root of f; then Σ_i F(y_i) with F the antiderivative in t = y.
        let df = poly::derivative(ring, &curve.f);
        let mut w = x0;
        for _ in 0..newton_rounds(ring.precision() as usize) {
            let step = ring.div(&poly::eval(ring, &curve.f, &w), &poly::eval(ring, &df, &w))?;
            w = ring.sub(&w, &step);
        }
        let e1 = ring.add(&ring.neg(&ring.mul(&v1, u1)), &ring.add(&v0, &v0));
        let e2 = ring.add(
            &ring.sub(&ring.mul(&ring.mul(&v1, &v1), u0), &ring.mul(&ring.mul(&v0, &v1), u1)),
            &ring.mul(&v0, &v0),
        );
        let m2 = val(&e1).saturating_mul(2).min(val(&e2)).max(1);
        let n = terms_for(ring.p(), m2, 0, target);
        let u = Uniformizer {
            center: CurvePoint::Affine(w, ring.exact_zero()),
            kind: UniformizerKind::FiniteWeierstrass,
        };
        let alpha = expand_differential(curve, k_index, &u, n)?.alpha;
        let h = antiderivative(ring, &alpha)?;
        return power_sum_pairing(ring, 2, &e1, &e2, &h, 0);
    }
    if val(&v1) >= 0 {
        return Err(ColemanError::KernelAssertionFailed);
    }
    // Ordinary disc: Σ_i y_i F(s_i)/Y(s_i) with s = x − x0 and Y a branch of
    // y over the lift x0. With Y = y0·Z and y0² = f(x0) this only needs Z,
    // which is defined over K_v even when f(x0) is not a square.
    let c0 = poly::eval(ring, &curve.f, &x0);
    let c0_inv = ring.inv(&c0)?;
    let cst = ring.add(&v0, &ring.mul(&v1, &x0));
    let vshift = val(&v1).min(val(&cst));
    let e1 = ring.neg(&ring.add(u1, &ring.add(&x0, &x0)));
    let e2 = ring.add(u0, &ring.add(&ring.mul(u1, &x0), &ring.mul(&x0, &x0)));
    let m2 = val(&e1).saturating_mul(2).min(val(&e2)).max(1);
    let n = terms_for(ring.p(), m2, vshift, target);
    let scaled = Curve::new_unchecked(ring.clone(), curve.f.iter().map(|a| ring.mul(a, &c0_inv)).collect());
    let ys = branch_series(&scaled, &x0, &ring.one(), n)?;
    let mut alpha = series::inv(ring, &ys)?;
    if k_index == 2 {
        alpha = series::mul(ring, &series::shifted_t(ring, &x0, n), &alpha);
    }
    let mut big_f = antiderivative(ring, &alpha)?;
    big_f.truncate(n);
    let g = series::scale(ring, &series::div(ring, &big_f, &ys)?, &c0_inv);
    let mut line = series::zero(ring, n);
    line[0] = cst;
    if n > 1 {
        line[1] = v1;
    }
    let h = series::mul(ring, &line, &g);
    power_sum_pairing(ring, 2, &e1, &e2, &h, vshift)
}

pub fn embed_poly(ring: &LocalRing, p: &[NfElement]) -> Result<Vec<LocalElement>, ColemanError> {
    let mut out = p
        .iter()
        .map(|c| if c.is_zero() { Ok(ring.exact_zero()) } else { ring.embed(c) })
        .collect::<Result<Vec<_>, _>>()?;
    poly::trim(ring, &mut out)?;
    Ok(out)
}

pub fn embed_curve(ring: &LocalRing, curve: &Curve<NumberField>) -> Result<Curve<LocalRing>, ColemanError> {
    let f = embed_poly(ring, &curve.f)?;
    Ok(Curve::new_unchecked(ring.clone(), f))
}

pub fn embed_divisor(ring: &LocalRing, d: &Divisor<NfElement>) -> Result<Divisor<LocalElement>, ColemanError> {
    Ok(Divisor { u: embed_poly(ring, &d.u)?, v: embed_poly(ring, &d.v)? })
}

pub fn embed_point(ring: &LocalRing, pt: &CurvePoint<NfElement>) -> Result<CurvePoint<LocalElement>, ColemanError> {
    Ok(match pt {
        CurvePoint::Infinity => CurvePoint::Infinity,
        CurvePoint::Affine(x, y) => {
            let e = |c: &NfElement| if c.is_zero() { Ok(ring.exact_zero()) } else { ring.embed(c) };
            CurvePoint::Affine(e(x)?, e(y)?)
        }
    })
}

/// The curve over `K_v` at one working precision, with the expansions of
/// `ω_1`, `ω_2` at `∞`.
#[derive(Debug, Clone)]
pub struct Level {
    pub ring: LocalRing,
    pub curve: Curve<LocalRing>,
    pub infinity: [Expansion<LocalElement>; 2],
}

impl Level {
    pub fn new(nf: &NumberField, curve: &Curve<NumberField>, v: &Place, work: i64) -> Result<Self, ColemanError> {
        let ring = LocalRing::lift_place(nf, v, work);
        let curve_v = embed_curve(&ring, curve)?;
        let len = terms_for(v.p, 1, 0, work);
        let u = Uniformizer { center: CurvePoint::Infinity, kind: UniformizerKind::Infinity };
        let e1 = expand_differential(&curve_v, 1, &u, len)?;
        let e2 = expand_differential(&curve_v, 2, &u, len)?;
        Ok(Level { ring, curve: curve_v, infinity: [e1, e2] })
    }

    /// `(∫_E ω_1, ∫_E ω_2)` for a class `E` in the kernel of reduction.
    pub fn kernel_integrals(&self, e: &Divisor<LocalElement>) -> Result<[LocalElement; 2], ColemanError> {
        let ring = &self.ring;
        if e.is_identity() {
            return Ok([ring.exact_zero(), ring.exact_zero()]);
        }
        if supported_near_infinity(e) {
            return Ok([
                infinity_disc_integral(ring, e, &self.infinity[0])?,
                infinity_disc_integral(ring, e, &self.infinity[1])?,
            ]);
        }
        if e.u.len() == 3 && val(&e.u[0]) >= 0 && val(&e.u[1]) >= 0 {
            let target = ring.precision();
            return Ok([
                finite_disc_integral(&self.curve, e, 1, target)?,
                finite_disc_integral(&self.curve, e, 2, target)?,
            ]);
        }
        Err(ColemanError::KernelAssertionFailed)
    }
}

/// Extra working digits tried in turn when a period comes back with less
/// than the target precision.
pub const ESCALATION: [i64; 4] = [16, 40, 96, 224];

/// Periods at one place, raising the working precision on demand.
#[derive(Debug)]
pub struct LocalContext {
    nf: NumberField,
    curve_k: Curve<NumberField>,
    pub place: Place,
    /// Absolute precision of returned periods.
    pub target: i64,
    /// Ring at the target precision; all results live here.
    pub base: Level,
    levels: Mutex<Vec<Arc<Level>>>,
}

impl LocalContext {
    pub fn new(nf: &NumberField, curve: &Curve<NumberField>, v: &Place, target: i64) -> Result<Self, ColemanError> {
        Ok(LocalContext {
            nf: nf.clone(),
            curve_k: curve.clone(),
            place: v.clone(),
            target,
            base: Level::new(nf, curve, v, target)?,
            levels: Mutex::new(Vec::new()),
        })
    }

    pub fn ring(&self) -> &LocalRing {
        &self.base.ring
    }

    fn level(&self, work: i64) -> Result<Arc<Level>, ColemanError> {
        let mut levels = self.levels.lock().expect("level cache poisoned");
        if let Some(l) = levels.iter().find(|l| l.ring.precision() == work) {
            return Ok(l.clone());
        }
        let l = Arc::new(Level::new(&self.nf, &self.curve_k, &self.place, work)?);
        levels.push(l.clone());
        Ok(l)
    }

    /// `(∫_D ω_1, ∫_D ω_2)` computed as `(1/m) ∫_{mD} ω`, where `m` kills
    /// the reduction of `D`.
    pub fn periods(&self, d: &Divisor<NfElement>, multiplier: u64) -> Result<[LocalElement; 2], ColemanError> {
        let base = &self.base.ring;
        if d.is_identity() {
            return Ok([base.exact_zero(), base.exact_zero()]);
        }
        let loss = ilog_exact(self.place.p, multiplier);
        let mut last = ColemanError::PrecisionExhausted;
        for extra in ESCALATION {
            let level = self.level(self.target + loss + extra)?;
            match self.periods_at(&level, d, multiplier) {
                Ok(out) if out.iter().all(|x| x.precision() >= self.target) => {
                    return Ok(out.map(|x| base.rebase(&x)));
                }
                Ok(_) => last = ColemanError::PrecisionExhausted,
                Err(e) if is_precision_error(&e) => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    fn periods_at(&self, level: &Level, d: &Divisor<NfElement>, multiplier: u64) -> Result<[LocalElement; 2], ColemanError> {
        let ring = &level.ring;
        let dl = embed_divisor(ring, d)?;
        let e = level.curve.mul_u128(&dl, multiplier as u128)?;
        let ints = level.kernel_integrals(&e)?;
        let m = ring.from_i64(multiplier as i64);
        Ok([ring.div(&ints[0], &m)?, ring.div(&ints[1], &m)?])
    }

    /// `α_0` of `ω_1`, `ω_2` at a point of `C(K)`.
    pub fn alphas(&self, q: &CurvePoint<NfElement>) -> Result<[LocalElement; 2], ColemanError> {
        let ring = &self.base.ring;
        let ql = embed_point(ring, q)?;
        let u = uniformizer_at(ring, &ql)?;
        let a1 = expand_differential(&self.base.curve, 1, &u, 1)?;
        let a2 = expand_differential(&self.base.curve, 2, &u, 1)?;
        Ok([a1.alpha[0].clone(), a2.alpha[0].clone()])
    }
}

fn is_precision_error(e: &ColemanError) -> bool {
    matches!(
        e,
        ColemanError::PrecisionExhausted
            | ColemanError::Arith(ArithError::PrecisionLoss)
            | ColemanError::Local(LocalError::PrecisionExhausted)
            | ColemanError::Local(LocalError::Arith(ArithError::PrecisionLoss))
            | ColemanError::Mumford(MumfordError::Arith(ArithError::PrecisionLoss))
    )
}

/// `ord_p(n)`.
pub fn ilog_exact(p: u64, mut n: u64) -> i64 {
    let mut e = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn infinity_parametrization_satisfies_curve() {
        // y² = 3x⁵ − 3: with x = 1/w and y = x²/t we need w = t² f̂(w).
        let curve = Curve::new(Rationals, vec![q(-3), q(0), q(0), q(0), q(0), q(3)]).unwrap();
        let k = Rationals;
        let n = 12;
        let (w, s) = infinity_unit(&curve, n).unwrap();
        let rev: Vec<BigRational> = curve.f.iter().rev().cloned().collect();
        assert_eq!(series::shift(&k, &series::compose_poly(&k, &rev, &w), 2), w);
        assert_eq!(series::shift(&k, &s, 2), w);
        assert_eq!(w[2], q(3));
    }

    #[test]
    fn alpha_zero_formulas() {
        let curve = Curve::new(Rationals, vec![q(-3), q(0), q(0), q(0), q(0), q(3)]).unwrap();
        // ordinary point (x0, y0) = (2, 3·√31)? use a rational one: x = 1 is Weierstrass.
        let w = Uniformizer { center: CurvePoint::Affine(q(1), q(0)), kind: UniformizerKind::FiniteWeierstrass };
        let e = expand_differential(&curve, 1, &w, 6).unwrap();
        // 2 / f'(1) = 2/15
        assert_eq!(e.alpha[0], BigRational::new(2.into(), 15.into()));
        let inf = Uniformizer { center: CurvePoint::Infinity, kind: UniformizerKind::Infinity };
        let e1 = expand_differential(&curve, 1, &inf, 6).unwrap();
        let e2 = expand_differential(&curve, 2, &inf, 6).unwrap();
        assert_eq!(e1.alpha[0], q(0));
        assert_eq!(e2.alpha[0], q(-2));
    }

    #[test]
    fn ordinary_expansion_is_inverse_sqrt() {
        // y² = x⁵ + 1 at (0, 1): 1/y = (1 + t⁵)^(−1/2) = 1 − t⁵/2 + …
        let curve = Curve::new(Rationals, vec![q(1), q(0), q(0), q(0), q(0), q(1)]).unwrap();
        let u = Uniformizer { center: CurvePoint::Affine(q(0), q(1)), kind: UniformizerKind::FiniteOrdinary };
        let e = expand_differential(&curve, 1, &u, 11).unwrap();
        assert_eq!(e.alpha[0], q(1));
        assert_eq!(e.alpha[5], BigRational::new((-1).into(), 2.into()));
        assert_eq!(e.alpha[10], BigRational::new(3.into(), 8.into()));
        assert_eq!(e.alpha[1], q(0));
    }
}
