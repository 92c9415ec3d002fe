//! Mordell–Weil sieve over a finite-index subgroup of `J(K)`, saturation at
//! small primes, and certification that a list of points is all of `C(K)`.
//!
//! Elements of the known subgroup `L_0 = ⟨D_1, …, D_r, T_1, …, T_k⟩` are
//! written as integer vectors in `Z^(r+k)`; torsion coordinates are ordinary
//! integer coordinates whose relations `t_j·e_(r+j)` are picked up by every
//! kernel automatically.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chabauty::{self, ChabautyError, CriterionConfig, PeriodTable, Verdict};
use crate::field::{ArithError, Field};
use crate::finitegeom::count::{affine_points, jacobian_order};
use crate::finitegeom::group::{group_structure, sylow_basis};
use crate::finitegeom::{AbelianGroup, FiniteGeomError, JacobianFq, DEFAULT_ORDER_CAP};
use crate::fp;
use crate::lattice::{self, HomToFinite, IMat, QuotientMap};
use crate::mumford::reduce::{reduce_curve, reduce_divisor, reduce_point, ReductionError, ResidueMap};
use crate::mumford::{Curve, CurvePoint, Divisor};
use crate::numberfield::{NfElement, NumberField, Place};
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SieveError {
    #[error("decomposition of known point {0} does not match its Abel–Jacobi image")]
    DecompositionMismatch(usize),
    #[error("torsion generator {index} does not have exact order {order}")]
    TorsionOrder { index: usize, order: u64 },
    #[error("coordinate vector of known point {index} has length {found}, expected {expected}")]
    CoordinateLength { index: usize, found: usize, expected: usize },
    #[error("|W'| = {size} exceeds the cap {cap}")]
    ExplosionGuard { size: usize, cap: usize },
    #[error("no place above {0} in the admissible list")]
    UnknownPlace(u64),
    #[error(transparent)]
    Chabauty(#[from] ChabautyError),
    #[error(transparent)]
    FiniteGeom(#[from] FiniteGeomError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// A point of `C(K)` with `ȷ(Q) = [Q − P_0]` written on the generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownPoint {
    pub point: CurvePoint<NfElement>,
    pub coords: Vec<BigInt>,
}

/// A finite-index subgroup of `J(K)` with its generators, base point and
/// the known rational points.
#[derive(Debug, Clone)]
pub struct AbstractMW {
    pub nf: NumberField,
    pub curve: Curve<NumberField>,
    pub free: Vec<Divisor<NfElement>>,
    pub torsion: Vec<(Divisor<NfElement>, u64)>,
    pub base_point: CurvePoint<NfElement>,
    pub points: Vec<KnownPoint>,
}

impl AbstractMW {
    /// Build and verify exactly over `K`: torsion orders and every
    /// decomposition `ȷ(Q) = Σ c_i G_i`.
    pub fn new(
        nf: NumberField,
        curve: Curve<NumberField>,
        free: Vec<Divisor<NfElement>>,
        torsion: Vec<(Divisor<NfElement>, u64)>,
        base_point: CurvePoint<NfElement>,
        points: Vec<KnownPoint>,
    ) -> Result<Self, SieveError> {
        let mw = AbstractMW { nf, curve, free, torsion, base_point, points };
        mw.verify()?;
        Ok(mw)
    }

    fn verify(&self) -> Result<(), SieveError> {
        let c = &self.curve;
        for (i, (t, n)) in self.torsion.iter().enumerate() {
            let bad = SieveError::TorsionOrder { index: i, order: *n };
            if *n == 0 || !c.mul_u128(t, *n as u128)?.is_identity() {
                return Err(bad);
            }
            for (ell, _) in fp::factor_u64(*n) {
                if c.mul_u128(t, (*n / ell) as u128)?.is_identity() {
                    return Err(bad);
                }
            }
        }
        let gens = self.generators();
        for (i, kp) in self.points.iter().enumerate() {
            if kp.coords.len() != gens.len() {
                return Err(SieveError::CoordinateLength { index: i, found: kp.coords.len(), expected: gens.len() });
            }
            let terms: Vec<(BigInt, Divisor<NfElement>)> =
                kp.coords.iter().cloned().zip(gens.iter().cloned()).collect();
            let lhs = combination(c, &terms)?;
            let rhs = c.abel_jacobi(&kp.point, &self.base_point)?;
            if lhs != rhs {
                return Err(SieveError::DecompositionMismatch(i));
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.free.len()
    }

    /// Number of coordinates, `r + k`.
    pub fn ngens(&self) -> usize {
        self.free.len() + self.torsion.len()
    }

    pub fn generators(&self) -> Vec<Divisor<NfElement>> {
        self.free.iter().cloned().chain(self.torsion.iter().map(|(t, _)| t.clone())).collect()
    }

    /// The divisor class with the given coordinates.
    pub fn element(&self, coords: &[BigInt]) -> Result<Divisor<NfElement>, SieveError> {
        let terms: Vec<_> = coords.iter().cloned().zip(self.generators()).collect();
        combination(&self.curve, &terms)
    }
}

fn combination<F: Field>(c: &Curve<F>, terms: &[(BigInt, Divisor<F::Elem>)]) -> Result<Divisor<F::Elem>, SieveError> {
    let mut acc = c.identity();
    for (n, d) in terms {
        if n.is_zero() {
            continue;
        }
        acc = c.add(&acc, &c.mul_bigint(d, n)?)?;
    }
    Ok(acc)
}

/// `(p, index)` of a place; stable across runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlaceKey {
    pub p: u64,
    pub index: usize,
}

impl From<&Place> for PlaceKey {
    fn from(v: &Place) -> Self {
        PlaceKey { p: v.p, index: v.index }
    }
}

pub fn is_smooth(n: u64, bound: u64) -> bool {
    fp::factor_u64(n).iter().all(|&(ell, _)| ell < bound)
}

/// Why a place may or may not be used by the sieve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub place: PlaceKey,
    pub residue_size: u64,
    pub good_reduction: bool,
    pub within_cap: bool,
    pub jacobian_order: Option<u64>,
    pub smooth: bool,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.good_reduction && self.within_cap && self.smooth
    }
}

pub fn admissible_place(nf: &NumberField, curve: &Curve<NumberField>, v: &Place, bound: u64, cap: u64) -> AdmissibilityReport {
    let residue_size = v.norm().min(u64::MAX as u128) as u64;
    let mut report = AdmissibilityReport {
        place: v.into(),
        residue_size,
        good_reduction: false,
        within_cap: residue_size <= cap,
        jacobian_order: None,
        smooth: false,
    };
    let rm = ResidueMap::new(nf, v);
    let Ok(cv) = reduce_curve(curve, &rm) else {
        return report;
    };
    report.good_reduction = true;
    if !report.within_cap {
        return report;
    }
    if let Ok(n) = jacobian_order(&cv, cap, Execution::Sequential) {
        report.jacobian_order = Some(n);
        report.smooth = is_smooth(n, bound);
    }
    report
}

/// Places of good reduction above odd primes `p ≤ p_max` with residue field
/// of size at most `cap`, in increasing `(p, index)` order.
pub fn good_places(nf: &NumberField, curve: &Curve<NumberField>, p_max: u64, cap: u64) -> Vec<Place> {
    good_places_between(nf, curve, 3, p_max + 1, cap)
}

/// As [`good_places`], restricted to `lo ≤ p < hi`.
pub fn good_places_between(nf: &NumberField, curve: &Curve<NumberField>, lo: u64, hi: u64, cap: u64) -> Vec<Place> {
    let mut out = Vec::new();
    for p in fp::primes_below(hi) {
        if p == 2 || p < lo {
            continue;
        }
        let Ok(places) = nf.split_prime(p) else {
            continue;
        };
        for v in places {
            if v.norm() > cap as u128 {
                continue;
            }
            if reduce_curve(curve, &ResidueMap::new(nf, &v)).is_ok() {
                out.push(v);
            }
        }
    }
    out
}

fn place_seed(seed: u64, v: &Place) -> u64 {
    seed ^ (v.p.wrapping_mul(0x9E37_79B9_7F4A_7C15)) ^ ((v.index as u64) << 56)
}

/// Everything the sieve needs from one place: the structure of `J(k_v)`,
/// the images of the generators, and the image of `C(k_v)` under `ȷ`.
#[derive(Debug, Clone)]
pub struct PlaceData {
    pub place: Place,
    pub residue_size: u64,
    pub order: u64,
    /// Invariant factors `n_1 | n_2 | …` of `J(k_v)`.
    pub invariants: Vec<u64>,
    /// Row `i` holds the coordinates of the reduction of generator `i`.
    pub gen_images: IMat,
    /// Distinct coordinates of `[P − P̃_0]` for `P ∈ C(k_v)`, sorted.
    pub point_images: Vec<Vec<BigInt>>,
}

impl PlaceData {
    pub fn key(&self) -> PlaceKey {
        (&self.place).into()
    }

    pub fn moduli(&self) -> Vec<BigInt> {
        self.invariants.iter().map(|&n| BigInt::from(n)).collect()
    }

    pub fn hom(&self) -> HomToFinite {
        HomToFinite { moduli: self.moduli(), images: self.gen_images.clone() }
    }

    /// Image of a coordinate vector in `J(k_v)`.
    pub fn apply(&self, coords: &[BigInt]) -> Vec<BigInt> {
        self.hom().apply(coords)
    }
}

pub fn place_data(mw: &AbstractMW, v: &Place, seed: u64, exec: Execution) -> Result<PlaceData, SieveError> {
    let rm = ResidueMap::new(&mw.nf, v);
    let cv = reduce_curve(&mw.curve, &rm)?;
    let order = jacobian_order(&cv, DEFAULT_ORDER_CAP, Execution::Sequential)?;
    let jac = JacobianFq::new(cv.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(place_seed(seed, v));
    let gs = group_structure(&jac, order, &mut rng)?;
    let to_big = |c: Vec<u64>| c.into_iter().map(BigInt::from).collect::<Vec<_>>();
    let gen_images = mw
        .generators()
        .iter()
        .map(|d| Ok(to_big(gs.coords(&jac, &reduce_divisor(d, &cv, &rm)?))))
        .collect::<Result<IMat, SieveError>>()?;
    let base = reduce_point(&mw.base_point, &rm)?;
    let mut pts = affine_points(&cv, exec);
    pts.push(CurvePoint::Infinity);
    let classes = jac.abel_jacobi_images(&pts, &base, exec);
    let coords = par::map_slice(exec, &classes, |d| to_big(gs.coords(&jac, d)));
    let point_images: BTreeSet<Vec<BigInt>> = coords.into_iter().collect();
    Ok(PlaceData {
        place: v.clone(),
        residue_size: v.norm() as u64,
        order,
        invariants: gs.invariants.clone(),
        gen_images,
        point_images: point_images.into_iter().collect(),
    })
}

/// Lazily computed [`PlaceData`] for a fixed list of places.
#[derive(Debug)]
pub struct PlaceCache {
    seed: u64,
    places: Vec<Place>,
    data: Mutex<HashMap<PlaceKey, PlaceData>>,
}

impl PlaceCache {
    pub fn new(places: Vec<Place>, seed: u64) -> Self {
        PlaceCache { seed, places, data: Mutex::new(HashMap::new()) }
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn find(&self, key: PlaceKey) -> Option<&Place> {
        self.places.iter().find(|v| PlaceKey::from(*v) == key)
    }

    /// Data for the given places, computing the missing ones in parallel.
    pub fn get_many(&self, mw: &AbstractMW, keys: &[PlaceKey], exec: Execution) -> Result<Vec<PlaceData>, SieveError> {
        let missing: Vec<Place> = {
            let data = self.data.lock().expect("place cache poisoned");
            keys.iter()
                .filter(|k| !data.contains_key(k))
                .map(|k| self.find(*k).cloned().ok_or(SieveError::UnknownPlace(k.p)))
                .collect::<Result<_, _>>()?
        };
        let fresh = par::map_slice(exec, &missing, |v| place_data(mw, v, self.seed, Execution::Sequential));
        let mut data = self.data.lock().expect("place cache poisoned");
        for pd in fresh {
            let pd = pd?;
            data.insert(pd.key(), pd);
        }
        Ok(keys.iter().map(|k| data[k].clone()).collect())
    }
}

// ---------------------------------------------------------------------------
// Saturation

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturationRecord {
    pub q: u64,
    pub proven: bool,
    /// Places whose `J(k_v)/q` images were intersected, in order.
    pub places: Vec<PlaceKey>,
}

/// Nullspace over `F_q` of `x ↦ x·M` for an `n × m` matrix, as row vectors.
fn left_nullspace_mod(m: &[Vec<u64>], n: usize, q: u64) -> Vec<Vec<u64>> {
    let cols = m.first().map_or(0, Vec::len);
    // Row-reduce [M | I].
    let mut rows: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut r = m[i].iter().map(|x| x % q).collect::<Vec<_>>();
            r.extend((0..n).map(|j| u64::from(i == j)));
            r
        })
        .collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..n).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, pr);
        let inv = fp::invmod(rows[rank][c], q).expect("q is prime");
        for x in rows[rank].iter_mut() {
            *x = fp::mulmod(*x, inv, q);
        }
        for r in 0..n {
            if r != rank && rows[r][c] != 0 {
                let f = rows[r][c];
                let piv = rows[rank].clone();
                for (x, y) in rows[r].iter_mut().zip(&piv) {
                    *x = fp::submod(*x, fp::mulmod(f, *y, q), q);
                }
            }
        }
        rank += 1;
    }
    rows[rank..].iter().map(|r| r[cols..].to_vec()).collect()
}

/// Coordinates of generator images in `J(k_v)/q·J(k_v)`, or `None` when
/// `q ∤ #J(k_v)`.
fn images_mod_q(mw: &AbstractMW, v: &Place, order: u64, q: u64, seed: u64) -> Result<Option<Vec<Vec<u64>>>, SieveError> {
    if order % q != 0 {
        return Ok(None);
    }
    let rm = ResidueMap::new(&mw.nf, v);
    let cv = reduce_curve(&mw.curve, &rm)?;
    let jac = JacobianFq::new(cv.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(place_seed(seed, v) ^ q);
    let sb = sylow_basis(&jac, order, q, &mut rng)?;
    let mut cof = order;
    while cof % q == 0 {
        cof /= q;
    }
    let mut out = Vec::new();
    for d in mw.generators() {
        let z = jac.pow(&reduce_divisor(&d, &cv, &rm)?, cof as u128);
        let c = sb.dlog(&jac, &z).expect("element lies in the Sylow subgroup");
        out.push(c.into_iter().map(|x| (x % q as u128) as u64).collect());
    }
    Ok(Some(out))
}

/// `(v, #J(k_v))` for every place in `places`, in input order.
pub fn place_orders(mw: &AbstractMW, places: &[Place], exec: Execution) -> Result<Vec<(Place, u64)>, SieveError> {
    par::map_slice(exec, places, |v| {
        let cv = reduce_curve(&mw.curve, &ResidueMap::new(&mw.nf, v))?;
        Ok((v.clone(), jacobian_order(&cv, DEFAULT_ORDER_CAP, Execution::Sequential)?))
    })
    .into_iter()
    .collect()
}

/// Incremental proof that `q ∤ [J(K) : L_0]`: the kernel of
/// `L_0/qL_0 → ∏_v J(k_v)/qJ(k_v)` over the places absorbed so far.
#[derive(Debug, Clone)]
pub struct SaturationState {
    pub q: u64,
    /// Coordinates of `L_0/qL_0`: all free generators plus torsion
    /// generators of order divisible by `q`.
    active: Vec<usize>,
    kernel: Vec<Vec<u64>>,
    used: Vec<PlaceKey>,
    tried: usize,
}

impl SaturationState {
    pub fn new(mw: &AbstractMW, q: u64) -> Self {
        let r = mw.rank();
        let active: Vec<usize> = (0..mw.ngens())
            .filter(|&i| i < r || mw.torsion[i - r].1 % q == 0)
            .collect();
        let kernel = (0..active.len()).map(|i| (0..active.len()).map(|j| u64::from(i == j)).collect()).collect();
        SaturationState { q, active, kernel, used: Vec::new(), tried: 0 }
    }

    pub fn proven(&self) -> bool {
        self.kernel.is_empty()
    }

    /// Places with `q | #J(k_v)` examined so far.
    pub fn tried(&self) -> usize {
        self.tried
    }

    /// Intersect the kernel with the one at `v`. Places with `q ∤ #J(k_v)`
    /// are skipped without any group computation.
    pub fn absorb(&mut self, mw: &AbstractMW, v: &Place, order: u64, seed: u64) -> Result<(), SieveError> {
        let q = self.q;
        if self.proven() || order % q != 0 {
            return Ok(());
        }
        self.tried += 1;
        let Some(imgs) = images_mod_q(mw, v, order, q, seed)? else {
            return Ok(());
        };
        let m: Vec<Vec<u64>> = self.active.iter().map(|&i| imgs[i].clone()).collect();
        let width = m.first().map_or(0, Vec::len);
        let km: Vec<Vec<u64>> = self
            .kernel
            .iter()
            .map(|x| {
                (0..width)
                    .map(|c| x.iter().zip(&m).fold(0, |acc, (a, row)| fp::addmod(acc, fp::mulmod(*a, row[c], q), q)))
                    .collect()
            })
            .collect();
        let null = left_nullspace_mod(&km, self.kernel.len(), q);
        if null.len() == self.kernel.len() {
            return Ok(());
        }
        self.used.push(v.into());
        let n = self.active.len();
        self.kernel = null
            .iter()
            .map(|c| {
                (0..n)
                    .map(|j| c.iter().zip(&self.kernel).fold(0, |acc, (a, row)| fp::addmod(acc, fp::mulmod(*a, row[j], q), q)))
                    .collect()
            })
            .collect();
        Ok(())
    }

    pub fn record(&self) -> SaturationRecord {
        SaturationRecord { q: self.q, proven: self.proven(), places: self.used.clone() }
    }
}

/// Prove `q ∤ [J(K) : L_0]` by showing `L_0/qL_0 → ∏_v J(k_v)/qJ(k_v)` is
/// injective over enough places, taken in the given order. At most `budget`
/// places with `q | #J(k_v)` are examined.
pub fn saturation_check(
    mw: &AbstractMW,
    q: u64,
    places: &[(Place, u64)],
    budget: usize,
    seed: u64,
) -> Result<SaturationRecord, SieveError> {
    let mut st = SaturationState::new(mw, q);
    for (v, order) in places {
        if st.proven() || st.tried() >= budget {
            break;
        }
        st.absorb(mw, v, *order, seed)?;
    }
    Ok(st.record())
}

#[derive(Debug, Clone)]
pub struct SaturationConfig {
    /// Give up on primes above this bound.
    pub p_max: u64,
    /// Largest residue field used.
    pub residue_cap: u64,
    /// Places with `q | #J(k_v)` examined per `q` before giving up.
    pub budget: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for SaturationConfig {
    fn default() -> Self {
        SaturationConfig { p_max: 50_000, residue_cap: 1 << 20, budget: 64, seed: 1, exec: Execution::Parallel }
    }
}

/// Saturation records for every `q` in `qs`, scanning places in blocks of
/// increasing norm until each `q` is proven or the search is exhausted.
pub fn saturate(mw: &AbstractMW, qs: &[u64], cfg: &SaturationConfig) -> Result<Vec<SaturationRecord>, SieveError> {
    let mut states: Vec<SaturationState> = qs.iter().map(|&q| SaturationState::new(mw, q)).collect();
    let mut lo = 3;
    let mut hi = 512.min(cfg.p_max + 1);
    while lo <= cfg.p_max && states.iter().any(|s| !s.proven() && s.tried() < cfg.budget) {
        let block = good_places_between(&mw.nf, &mw.curve, lo, hi, cfg.residue_cap);
        let orders = place_orders(mw, &block, cfg.exec)?;
        let updated: Vec<Result<SaturationState, SieveError>> = par::map_slice(cfg.exec, &states, |st| {
            let mut st = st.clone();
            for (v, n) in &orders {
                if st.proven() || st.tried() >= cfg.budget {
                    break;
                }
                st.absorb(mw, v, *n, cfg.seed)?;
            }
            Ok(st)
        });
        states = updated.into_iter().collect::<Result<_, _>>()?;
        lo = hi;
        hi = (hi * 2).min(cfg.p_max + 1);
    }
    Ok(states.iter().map(SaturationState::record).collect())
}

/// Replay a saturation record using exactly its places.
pub fn recheck_saturation(mw: &AbstractMW, rec: &SaturationRecord, seed: u64) -> Result<bool, SieveError> {
    let places: Vec<Place> = rec
        .places
        .iter()
        .map(|k| {
            mw.nf
                .split_prime(k.p)
                .ok()
                .and_then(|ps| ps.into_iter().find(|v| v.index == k.index))
                .ok_or(SieveError::UnknownPlace(k.p))
        })
        .collect::<Result<_, _>>()?;
    let places = place_orders(mw, &places, Execution::Sequential)?;
    let again = saturation_check(mw, rec.q, &places, places.len(), seed)?;
    Ok(again.proven == rec.proven)
}

// ---------------------------------------------------------------------------
// Sieve

/// `(L_i, W_i)`: a full-rank lattice in `Z^(r+k)` (HNF rows) and canonical
/// coset representatives modulo it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveState {
    pub lattice: IMat,
    pub cosets: Vec<Vec<BigInt>>,
    pub used: Vec<PlaceKey>,
    pub trace: Vec<StepRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub place: PlaceKey,
    pub jacobian_order: u64,
    pub factorization: Vec<(u64, u32)>,
    pub index_step: String,
    pub w_size: usize,
}

impl SieveState {
    pub fn initial(n: usize) -> Self {
        SieveState { lattice: lattice::identity(n), cosets: vec![vec![BigInt::zero(); n]], used: Vec::new(), trace: Vec::new() }
    }

    pub fn index(&self) -> BigInt {
        lattice::lattice_index(&self.lattice)
    }

    /// Whether `x + L` is one of the recorded cosets.
    pub fn contains(&self, x: &[BigInt]) -> bool {
        let r = lattice::reduce_mod_hnf(x, &self.lattice);
        self.cosets.binary_search(&r).is_ok()
    }
}

fn mod_vec(v: &[BigInt], moduli: &[BigInt]) -> Vec<BigInt> {
    v.iter().zip(moduli).map(|(x, n)| x.mod_floor(n)).collect()
}

/// One step of the sieve: intersect with the kernel at `v` and keep the
/// cosets whose image at `v` comes from a point of `C(k_v)`.
pub fn sieve_step(state: &SieveState, pd: &PlaceData, cap: usize, exec: Execution) -> Result<SieveState, SieveError> {
    let moduli = pd.moduli();
    let b = &state.lattice;
    let images: IMat = lattice::mat_mul(b, &pd.gen_images).iter().map(|r| mod_vec(r, &moduli)).collect();
    let hom = HomToFinite { moduli: moduli.clone(), images: images.clone() };
    let kc = hom.kernel();
    let (next, _) = lattice::hnf(&lattice::mat_mul(&kc, b));
    let qm = QuotientMap::new(&moduli, &images);
    let mut buckets: HashMap<Vec<BigInt>, Vec<&Vec<BigInt>>> = HashMap::new();
    for a in &pd.point_images {
        buckets.entry(qm.project(a)).or_default().push(a);
    }
    let lifted = par::map_slice(exec, &state.cosets, |w| {
        let phi = pd.apply(w);
        let mut out = Vec::new();
        if let Some(targets) = buckets.get(&qm.project(&phi)) {
            for a in targets {
                let diff: Vec<BigInt> = a.iter().zip(&phi).map(|(x, y)| x - y).collect();
                let c = qm.preimage(&diff).expect("same class modulo the image");
                let shift = lattice::vec_mat(&c, b);
                let moved: Vec<BigInt> = w.iter().zip(&shift).map(|(x, y)| x + y).collect();
                out.push(lattice::reduce_mod_hnf(&moved, &next));
            }
        }
        out
    });
    let mut set = BTreeSet::new();
    for w in lifted.into_iter().flatten() {
        set.insert(w);
        if set.len() > cap {
            return Err(SieveError::ExplosionGuard { size: set.len(), cap });
        }
    }
    let step_index = lattice::lattice_index(&next) / state.index();
    let mut used = state.used.clone();
    used.push(pd.key());
    let mut trace = state.trace.clone();
    trace.push(StepRecord {
        place: pd.key(),
        jacobian_order: pd.order,
        factorization: fp::factor_u64(pd.order),
        index_step: step_index.to_string(),
        w_size: set.len(),
    });
    Ok(SieveState { lattice: next, cosets: set.into_iter().collect(), used, trace })
}

/// Whether `ȷ(Q) − w` vanishes at every place in `pds`.
pub fn agrees_at(pds: &[PlaceData], w: &[BigInt], coords: &[BigInt]) -> bool {
    pds.iter().all(|pd| pd.apply(w) == pd.apply(coords))
}

/// Index of the first known point congruent to `w` at every place in `pds`.
pub fn match_known(mw: &AbstractMW, pds: &[PlaceData], w: &[BigInt]) -> Option<usize> {
    mw.points.iter().position(|kp| agrees_at(pds, w, &kp.coords))
}

/// Whether every generator of `lattice` dies at every place in `pds`.
pub fn lattice_dies_at(pds: &[PlaceData], lattice: &IMat) -> bool {
    pds.iter().all(|pd| lattice.iter().all(|row| pd.apply(row).iter().all(Zero::is_zero)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveConfig {
    /// Smoothness bound `B` for `#J(k_v)`.
    pub smoothness_bound: u64,
    /// Largest rational prime under a sieving place.
    pub p_max: u64,
    /// Cap on the size of the residue field.
    pub residue_cap: u64,
    /// Cap on `|W'|`.
    pub w_cap: usize,
    pub max_steps: usize,
    /// Places to use in this order instead of the greedy choice.
    pub schedule: Option<Vec<PlaceKey>>,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            smoothness_bound: 75,
            p_max: 1000,
            residue_cap: DEFAULT_ORDER_CAP,
            w_cap: 100_000,
            max_steps: 60,
            schedule: None,
            seed: 0,
            exec: Execution::Parallel,
        }
    }
}

/// Places admissible for sieving: good reduction, bounded residue field,
/// `B`-smooth `#J(k_v)`.
pub fn sieve_places(mw: &AbstractMW, cfg: &SieveConfig) -> Vec<Place> {
    let good = good_places(&mw.nf, &mw.curve, cfg.p_max, cfg.residue_cap);
    let reports = par::map_slice(cfg.exec, &good, |v| {
        admissible_place(&mw.nf, &mw.curve, v, cfg.smoothness_bound, cfg.residue_cap)
    });
    good.into_iter().zip(reports).filter(|(_, r)| r.admissible()).map(|(v, _)| v).collect()
}

/// Run the sieve. Places above `target_p` go first; afterwards the greedy
/// rule picks the place leaving the fewest cosets that do not match a known
/// point above `target_p`, then the fewest cosets, then the largest index.
/// Stops once every coset matches a known point above `target_p`.
pub fn run_sieve(
    mw: &AbstractMW,
    cache: &PlaceCache,
    target_p: Option<u64>,
    cfg: &SieveConfig,
) -> Result<SieveState, SieveError> {
    let mut state = SieveState::initial(mw.ngens());
    if let Some(schedule) = &cfg.schedule {
        let pds = cache.get_many(mw, schedule, cfg.exec)?;
        for pd in &pds {
            state = sieve_step(&state, pd, cfg.w_cap, cfg.exec)?;
        }
        return Ok(state);
    }
    let Some(p_star) = target_p else {
        return Ok(state);
    };
    let target_keys: Vec<PlaceKey> =
        cache.places().iter().filter(|v| v.p == p_star).map(PlaceKey::from).collect();
    let targets = cache.get_many(mw, &target_keys, cfg.exec)?;
    for pd in &targets {
        state = sieve_step(&state, pd, cfg.w_cap, cfg.exec)?;
    }
    let unmatched = |s: &SieveState| s.cosets.iter().filter(|w| match_known(mw, &targets, w).is_none()).count();
    let all_keys: Vec<PlaceKey> = cache.places().iter().map(PlaceKey::from).collect();
    let all = cache.get_many(mw, &all_keys, cfg.exec)?;
    while unmatched(&state) > 0 && state.used.len() < cfg.max_steps {
        let candidates: Vec<&PlaceData> = all.iter().filter(|pd| !state.used.contains(&pd.key())).collect();
        let trials = par::map_slice(cfg.exec, &candidates, |pd| {
            let next = sieve_step(&state, pd, cfg.w_cap, Execution::Sequential).ok()?;
            let index = lattice::lattice_index(&next.lattice) / state.index();
            if index.is_one() && next.cosets.len() >= state.cosets.len() {
                return None;
            }
            Some((unmatched(&next), next.cosets.len(), -index, pd.key(), next))
        });
        let best = trials.into_iter().flatten().min_by(|a, b| (a.0, a.1, &a.2, a.3).cmp(&(b.0, b.1, &b.2, b.3)));
        match best {
            Some((_, _, _, _, next)) => state = next,
            None => break,
        }
    }
    Ok(state)
}

// ---------------------------------------------------------------------------
// Certification

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetRecord {
    pub w: Vec<String>,
    pub point_index: usize,
    pub p: u64,
    pub places: Vec<PlaceKey>,
    pub jacobian_orders: Vec<u64>,
    pub h: usize,
    pub rank: usize,
    pub m_mod_p: Vec<Vec<u64>>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Certified,
    NotCertified { reasons: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveTranscript {
    pub steps: Vec<StepRecord>,
    pub lattice: Vec<Vec<String>>,
    pub cosets: Vec<Vec<String>>,
}

pub fn to_strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(BigInt::to_string).collect()
}

pub fn from_strings(v: &[String]) -> Option<Vec<BigInt>> {
    v.iter().map(|s| s.parse().ok()).collect()
}

impl SieveTranscript {
    pub fn from_state(s: &SieveState) -> Self {
        SieveTranscript {
            steps: s.trace.clone(),
            lattice: s.lattice.iter().map(|r| to_strings(r)).collect(),
            cosets: s.cosets.iter().map(|r| to_strings(r)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifyConfig {
    /// Primes tried for each coset, in order.
    pub prime_pool: Vec<u64>,
    pub criterion: CriterionConfig,
    pub smoothness_bound: u64,
}

/// Find, for every coset `w`, a prime `p` and a known point `Q` with
/// `ȷ(Q) − w` and `L_s` dying above `p`, smooth `#J(k_v)`, and the
/// criterion proving `Q` alone in its unit ball.
pub fn certify(
    mw: &AbstractMW,
    state: &SieveState,
    cache: &PlaceCache,
    cfg: &CertifyConfig,
) -> Result<(Vec<CosetRecord>, Outcome), SieveError> {
    let mut tables: HashMap<u64, Option<PeriodTable>> = HashMap::new();
    let mut verdicts: HashMap<(u64, usize), Option<chabauty::ChabautyData>> = HashMap::new();
    let mut records = Vec::new();
    let mut reasons = Vec::new();
    for w in &state.cosets {
        let mut found = None;
        for &p in &cfg.prime_pool {
            let keys: Vec<PlaceKey> = cache.places().iter().filter(|v| v.p == p).map(PlaceKey::from).collect();
            if keys.is_empty() || chabauty::admissible_prime(&mw.nf, &mw.curve, p).map(|v| v.len()) != Ok(keys.len()) {
                continue;
            }
            let pds = cache.get_many(mw, &keys, cfg.criterion.exec)?;
            if !pds.iter().all(|pd| is_smooth(pd.order, cfg.smoothness_bound)) || !lattice_dies_at(&pds, &state.lattice) {
                continue;
            }
            let Some(qi) = match_known(mw, &pds, w) else {
                continue;
            };
            if !tables.contains_key(&p) {
                let t = build_table(mw, p, &cfg.criterion);
                tables.insert(p, t);
            }
            let Some(table) = tables[&p].as_ref() else {
                continue;
            };
            let data = verdicts.entry((p, qi)).or_insert_with(|| {
                chabauty::criterion_with_table(table, &mw.nf, &mw.curve, &mw.points[qi].point, cfg.criterion.pivot).ok()
            });
            let Some(data) = data else {
                continue;
            };
            if data.verdict != Verdict::UniqueInBall {
                continue;
            }
            found = Some(CosetRecord {
                w: to_strings(w),
                point_index: qi,
                p,
                places: keys,
                jacobian_orders: pds.iter().map(|pd| pd.order).collect(),
                h: data.h,
                rank: data.rank,
                m_mod_p: data.m_mod_p.clone(),
                verdict: data.verdict,
            });
            break;
        }
        match found {
            Some(r) => records.push(r),
            None => reasons.push(format!("no usable prime for coset {:?}", to_strings(w))),
        }
    }
    let outcome = if reasons.is_empty() { Outcome::Certified } else { Outcome::NotCertified { reasons } };
    Ok((records, outcome))
}

/// `T` at `p` with the precision retries of the criterion.
pub fn build_table(mw: &AbstractMW, p: u64, cfg: &CriterionConfig) -> Option<PeriodTable> {
    let mut precision = cfg.precision;
    for _ in 0..=cfg.retries {
        match chabauty::build_t(&mw.nf, &mw.curve, &mw.free, p, precision, cfg.exec) {
            Ok(t) => return Some(t),
            Err(ChabautyError::Coleman(_)) | Err(ChabautyError::Local(_)) => precision *= 2,
            Err(_) => return None,
        }
    }
    None
}

/// Smallest prime in `pool` at which the criterion proves every known point
/// alone in its unit ball.
pub fn find_certifying_prime(mw: &AbstractMW, pool: &[u64], smoothness_bound: u64, cfg: &CriterionConfig) -> Option<u64> {
    for &p in pool {
        let Ok(places) = chabauty::admissible_prime(&mw.nf, &mw.curve, p) else {
            continue;
        };
        let orders: Option<Vec<u64>> =
            places.iter().map(|v| chabauty::jacobian_order_at(&mw.nf, &mw.curve, v).ok()).collect();
        let Some(orders) = orders else {
            continue;
        };
        if !orders.iter().all(|&n| is_smooth(n, smoothness_bound)) {
            continue;
        }
        let Some(table) = build_table(mw, p, cfg) else {
            continue;
        };
        let ok = mw.points.iter().all(|kp| {
            chabauty::criterion_with_table(&table, &mw.nf, &mw.curve, &kp.point, cfg.pivot)
                .map(|d| d.verdict == Verdict::UniqueInBall)
                .unwrap_or(false)
        });
        if ok {
            return Some(p);
        }
    }
    None
}

/// Replay conditions on finite fields only: smoothness, `L_s` dying above
/// `p`, `ȷ(Q) − w` dying above `p`, and the stored rank of `M̃`.
pub fn recheck_record(
    mw: &AbstractMW,
    lattice_rows: &IMat,
    rec: &CosetRecord,
    cache: &PlaceCache,
    smoothness_bound: u64,
    exec: Execution,
) -> Result<Vec<String>, SieveError> {
    let mut problems = Vec::new();
    let pds = cache.get_many(mw, &rec.places, exec)?;
    let Some(w) = from_strings(&rec.w) else {
        return Ok(vec!["unparseable coset".into()]);
    };
    if pds.iter().map(|pd| pd.order).collect::<Vec<_>>() != rec.jacobian_orders {
        problems.push(format!("jacobian orders above {} differ", rec.p));
    }
    if !pds.iter().all(|pd| is_smooth(pd.order, smoothness_bound)) {
        problems.push(format!("#J not smooth above {}", rec.p));
    }
    if !lattice_dies_at(&pds, lattice_rows) {
        problems.push(format!("L_s does not die above {}", rec.p));
    }
    match mw.points.get(rec.point_index) {
        Some(kp) if agrees_at(&pds, &w, &kp.coords) => {}
        _ => problems.push(format!("known point {} does not match coset", rec.point_index)),
    }
    let d: usize = pds.iter().map(|pd| pd.place.residue_degree).sum();
    let rank = crate::localfield::rank_mod_p(&rec.m_mod_p, rec.p);
    if rank != rec.rank || rank != d || rec.verdict != Verdict::UniqueInBall {
        problems.push(format!("stored matrix has rank {rank}, need {d}"));
    }
    Ok(problems)
}
