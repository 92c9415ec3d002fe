//! The matrices `T` (periods of the Mordell–Weil basis) and `A` (leading
//! coefficients of the differentials at a point), their combination over
//! `Z_p`, and the unit-ball uniqueness criterion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coleman::{ColemanError, LocalContext};
use crate::field::Field;
use crate::finitegeom::count::jacobian_order;
use crate::finitegeom::{FiniteGeomError, DEFAULT_ORDER_CAP};
use crate::localfield::{
    hnf_zp, mat_mul, rank_mod_p, zp_residue, LocalElement, LocalError, LocalRing, PivotOrder, ZpMatrix, INF,
};
use crate::mumford::reduce::{reduce_curve, ResidueMap};
use crate::mumford::{Curve, CurvePoint, Divisor};
use crate::numberfield::{NfElement, NumberField, Place};
use crate::par::{self, Execution};
use crate::poly;

/// Genus of every curve handled here.
pub const GENUS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChabautyError {
    #[error("p = {0} is even")]
    EvenPrime(u64),
    #[error("p = {0} is ramified in K or divides the index of Z[θ]")]
    Ramified(u64),
    #[error("bad reduction at a place above {0}")]
    BadReduction(u64),
    #[error("point is not integral at a place above {0}")]
    NonIntegralPoint(u64),
    #[error("hnf has {h} zero rows, expected {expected}: basis dependent modulo torsion or precision too low")]
    RankDefect { h: usize, expected: usize },
    #[error("precision too low to decide the criterion after {0} attempts")]
    PrecisionAmbiguous(u32),
    #[error(transparent)]
    Coleman(#[from] ColemanError),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    FiniteGeom(#[from] FiniteGeomError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    UniqueInBall,
    Inconclusive { rank: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CriterionConfig {
    /// Absolute precision of the periods, in digits.
    pub precision: i64,
    /// Attempts at doubled precision after the first one.
    pub retries: u32,
    pub pivot: PivotOrder,
    pub exec: Execution,
}

impl Default for CriterionConfig {
    fn default() -> Self {
        CriterionConfig { precision: 30, retries: 2, pivot: PivotOrder::LowestRow, exec: Execution::Parallel }
    }
}

/// Check that `p` is odd, unramified, and of good reduction at every place
/// above it; returns those places.
pub fn admissible_prime(nf: &NumberField, curve: &Curve<NumberField>, p: u64) -> Result<Vec<Place>, ChabautyError> {
    if p % 2 == 0 {
        return Err(ChabautyError::EvenPrime(p));
    }
    let places = nf.split_prime(p).map_err(|_| ChabautyError::Ramified(p))?;
    for v in &places {
        let rm = ResidueMap::new(nf, v);
        reduce_curve(curve, &rm).map_err(|_| ChabautyError::BadReduction(p))?;
    }
    Ok(places)
}

/// `#J(k_v)`.
pub fn jacobian_order_at(nf: &NumberField, curve: &Curve<NumberField>, v: &Place) -> Result<u64, ChabautyError> {
    let rm = ResidueMap::new(nf, v);
    let cv = reduce_curve(curve, &rm).map_err(|_| ChabautyError::BadReduction(v.p))?;
    Ok(jacobian_order(&cv, DEFAULT_ORDER_CAP, Execution::Sequential)?)
}

/// Periods of a basis at every place above `p`, stacked into `T`.
#[derive(Debug)]
pub struct PeriodTable {
    pub p: u64,
    pub places: Vec<Place>,
    pub contexts: Vec<LocalContext>,
    /// `#J(k_v)` per place.
    pub multipliers: Vec<u64>,
    /// Absolute precision of the entries of `T`.
    pub precision: i64,
    /// `g·d × r`, rows ordered by place, then differential, then coordinate.
    pub t: ZpMatrix,
    /// Smallest `a ≥ 0` with `p^a·T` integral.
    pub shift: i64,
    pub zp: LocalRing,
}

impl PeriodTable {
    pub fn degree(&self) -> usize {
        self.places.iter().map(|v| v.residue_degree as usize).sum()
    }

    pub fn rank(&self) -> usize {
        self.t.first().map_or(0, Vec::len)
    }
}

pub fn build_t(
    nf: &NumberField,
    curve: &Curve<NumberField>,
    basis: &[Divisor<NfElement>],
    p: u64,
    precision: i64,
    exec: Execution,
) -> Result<PeriodTable, ChabautyError> {
    let places = admissible_prime(nf, curve, p)?;
    let multipliers = places
        .iter()
        .map(|v| jacobian_order_at(nf, curve, v))
        .collect::<Result<Vec<_>, _>>()?;
    let contexts = par::map_slice(exec, &places, |v| LocalContext::new(nf, curve, v, precision))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, usize)> =
        (0..places.len()).flat_map(|i| (0..basis.len()).map(move |j| (i, j))).collect();
    let columns = par::map_slice(exec, &jobs, |&(i, j)| contexts[i].periods(&basis[j], multipliers[i]))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let zp = LocalRing::zp(p, precision);
    let gd: usize = GENUS * places.iter().map(|v| v.residue_degree as usize).sum::<usize>();
    let mut t = vec![Vec::with_capacity(basis.len()); gd];
    let mut row0 = 0;
    for (i, ctx) in contexts.iter().enumerate() {
        let dv = places[i].residue_degree as usize;
        for j in 0..basis.len() {
            let periods = &columns[i * basis.len() + j];
            for (k, tau) in periods.iter().enumerate() {
                for (c, coord) in ctx.ring().coordinates(tau, &zp).into_iter().enumerate() {
                    t[row0 + k * dv + c].push(coord);
                }
            }
        }
        row0 += GENUS * dv;
    }
    let min_val = t.iter().flatten().filter(|e| !e.is_zero_like()).map(|e| e.valuation()).min().unwrap_or(0);
    Ok(PeriodTable { p, places, contexts, multipliers, precision, t, shift: (-min_val).max(0), zp })
}

/// `α_k(Q)` for `ω_k = x^(k−1) dx/y` in the uniformizer chosen at `v`,
/// computed exactly in `K`.
pub fn alpha_in_k(
    nf: &NumberField,
    curve: &Curve<NumberField>,
    q: &CurvePoint<NfElement>,
    v: &Place,
) -> Result<[NfElement; 2], ChabautyError> {
    let CurvePoint::Affine(x, y) = q else {
        return Ok([nf.zero(), nf.from_i64(-2)]);
    };
    let rm = ResidueMap::new(nf, v);
    rm.reduce_integral(x).map_err(|_| ChabautyError::NonIntegralPoint(v.p))?;
    let yr = rm.reduce_integral(y).map_err(|_| ChabautyError::NonIntegralPoint(v.p))?;
    let inv = |e: &NfElement| nf.inv(e).map_err(|_| ChabautyError::BadReduction(v.p));
    if yr != rm.field().zero() {
        let yi = inv(y)?;
        Ok([yi.clone(), nf.mul(x, &yi)])
    } else {
        let df = poly::derivative(nf, &curve.f);
        let two_over = nf.mul(&nf.from_i64(2), &inv(&poly::eval(nf, &df, x))?);
        Ok([two_over.clone(), nf.mul(x, &two_over)])
    }
}

/// `g·d × d` block-diagonal matrix whose block at `v` stacks the
/// multiplication-by-`α_k(Q)` matrices on the basis of `O_v`.
pub fn build_a(table: &PeriodTable, nf: &NumberField, curve: &Curve<NumberField>, q: &CurvePoint<NfElement>) -> Result<ZpMatrix, ChabautyError> {
    let d = table.degree();
    let zp = &table.zp;
    let mut a = vec![vec![zp.exact_zero(); d]; GENUS * d];
    let (mut row0, mut col0) = (0, 0);
    for (v, ctx) in table.places.iter().zip(&table.contexts) {
        let dv = v.residue_degree as usize;
        let ring = ctx.ring();
        let alphas = alpha_in_k(nf, curve, q, v)?;
        for (k, alpha) in alphas.iter().enumerate() {
            let al = if alpha.is_zero() { ring.exact_zero() } else { ring.embed(alpha)? };
            for j in 0..dv {
                let mut basis = vec![num_bigint::BigInt::from(0); dv];
                basis[j] = 1.into();
                let prod = ring.mul(&al, &ring.from_int_coords(&basis));
                for (i, c) in ring.coordinates(&prod, zp).into_iter().enumerate() {
                    a[row0 + k * dv + i][col0 + j] = c;
                }
            }
        }
        row0 += GENUS * dv;
        col0 += dv;
    }
    Ok(a)
}

/// Everything the criterion computed for one `(Q, p)`.
#[derive(Debug, Clone)]
pub struct ChabautyData {
    pub p: u64,
    pub places: Vec<Place>,
    pub precision: i64,
    pub t: ZpMatrix,
    pub a: ZpMatrix,
    pub shift: i64,
    pub u: ZpMatrix,
    pub h: usize,
    /// Last `h` rows of `U·A`; depends on the choice of `U`.
    pub m: ZpMatrix,
    pub m_mod_p: Vec<Vec<u64>>,
    pub rank: usize,
    pub verdict: Verdict,
}

fn scale_rows(zp: &LocalRing, m: &ZpMatrix, a: i64) -> ZpMatrix {
    let pa = zp.from_bigint_exact(&num_bigint::BigInt::from(zp.p()).pow(a as u32));
    m.iter().map(|r| r.iter().map(|e| zp.mul(e, &pa)).collect()).collect()
}

/// Run the criterion at one precision.
pub fn criterion_with_table(
    table: &PeriodTable,
    nf: &NumberField,
    curve: &Curve<NumberField>,
    q: &CurvePoint<NfElement>,
    pivot: PivotOrder,
) -> Result<ChabautyData, ChabautyError> {
    let zp = &table.zp;
    let p = table.p;
    let d = table.degree();
    let gd = GENUS * d;
    let r = table.rank();
    let a = build_a(table, nf, curve, q)?;
    let (u, h) = if r == 0 {
        (crate::localfield::identity_matrix(zp, gd), gd)
    } else {
        let res = hnf_zp(zp, &scale_rows(zp, &table.t, table.shift), pivot)?;
        (res.u, res.h)
    };
    let expected = gd.saturating_sub(r);
    if h != expected {
        return Err(ChabautyError::RankDefect { h, expected });
    }
    let ua = mat_mul(zp, &u, &a);
    let m: ZpMatrix = ua[gd - h..].to_vec();
    let m_mod_p = m
        .iter()
        .map(|row| row.iter().map(|e| zp_residue(e, p)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let rank = rank_mod_p(&m_mod_p, p);
    let verdict = if rank == d { Verdict::UniqueInBall } else { Verdict::Inconclusive { rank } };
    Ok(ChabautyData {
        p,
        places: table.places.clone(),
        precision: table.precision,
        t: table.t.clone(),
        a,
        shift: table.shift,
        u,
        h,
        m,
        m_mod_p,
        rank,
        verdict,
    })
}

fn is_precision_failure(e: &ChabautyError) -> bool {
    matches!(
        e,
        ChabautyError::Local(LocalError::PrecisionAmbiguous)
            | ChabautyError::Local(LocalError::PrecisionExhausted)
            | ChabautyError::Coleman(ColemanError::PrecisionExhausted)
    )
}

/// Decide whether `Q` is the only point of `C(K)` in its `p`-unit ball,
/// doubling the precision when a decision depends on untrusted digits.
pub fn criterion(
    nf: &NumberField,
    curve: &Curve<NumberField>,
    basis: &[Divisor<NfElement>],
    q: &CurvePoint<NfElement>,
    p: u64,
    cfg: &CriterionConfig,
) -> Result<ChabautyData, ChabautyError> {
    let mut precision = cfg.precision;
    for _ in 0..=cfg.retries {
        let attempt = build_t(nf, curve, basis, p, precision, cfg.exec)
            .and_then(|table| criterion_with_table(&table, nf, curve, q, cfg.pivot));
        match attempt {
            Err(e) if is_precision_failure(&e) => precision *= 2,
            other => return other,
        }
    }
    Err(ChabautyError::PrecisionAmbiguous(cfg.retries + 1))
}

/// Valuation of a `Z_p` entry, with `INF` for exact zero.
pub fn entry_valuation(e: &LocalElement) -> i64 {
    if e.is_exact_zero() {
        INF
    } else {
        e.valuation()
    }
}
