//! Structure of finite abelian groups given by a black-box group law and a
//! known order: Sylow bases, invariant factors and discrete logarithms.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;

use crate::fp::{factor_u64, invmod};
use crate::lattice::{self, IMat, QuotientMap};

use super::FiniteGeomError;

pub trait AbelianGroup: Sync {
    type Elem: Clone + Eq + Hash + Send + Sync + Debug;

    fn identity(&self) -> Self::Elem;
    fn op(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Self::Elem;
    fn random(&self, rng: &mut ChaCha8Rng) -> Self::Elem;

    fn is_identity(&self, a: &Self::Elem) -> bool {
        *a == self.identity()
    }

    fn pow(&self, a: &Self::Elem, n: u128) -> Self::Elem {
        let mut acc = self.identity();
        if n == 0 {
            return acc;
        }
        let bits = 128 - n.leading_zeros();
        for i in (0..bits).rev() {
            acc = self.op(&acc, &acc);
            if (n >> i) & 1 == 1 {
                acc = self.op(&acc, a);
            }
        }
        acc
    }

    fn pow_signed(&self, a: &Self::Elem, n: i128) -> Self::Elem {
        let r = self.pow(a, n.unsigned_abs());
        if n < 0 {
            self.inverse(&r)
        } else {
            r
        }
    }
}

/// Independent generators `b_i` of order `ℓ^(k_i)` (`k_i` decreasing) of an
/// `ℓ`-group, with a lookup table for the `ℓ`-torsion.
#[derive(Debug, Clone)]
pub struct SylowBasis<E> {
    pub ell: u64,
    pub exps: Vec<u32>,
    pub gens: Vec<E>,
    /// Baby-step table over the first `split` torsion generators.
    table: HashMap<E, Vec<u64>>,
    split: usize,
    torsion: Vec<E>,
}

impl<E: Clone + Eq + Hash + Debug> SylowBasis<E> {
    fn empty<G: AbelianGroup<Elem = E>>(g: &G, ell: u64) -> Self {
        let mut b = SylowBasis {
            ell,
            exps: Vec::new(),
            gens: Vec::new(),
            table: HashMap::new(),
            split: 0,
            torsion: Vec::new(),
        };
        b.rebuild(g);
        b
    }

    pub fn order(&self) -> u128 {
        self.exps.iter().fold(1u128, |acc, &k| acc * (self.ell as u128).pow(k))
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    fn rebuild<G: AbelianGroup<Elem = E>>(&mut self, g: &G) {
        let ell = self.ell as u128;
        self.torsion = self
            .gens
            .iter()
            .zip(&self.exps)
            .map(|(b, &k)| g.pow(b, ell.pow(k - 1)))
            .collect();
        let m = self.torsion.len();
        self.split = m.div_ceil(2);
        self.table = HashMap::new();
        for digits in DigitIter::new(self.ell, self.split) {
            let e = combine(g, &self.torsion[..self.split], &digits);
            self.table.insert(e, digits);
        }
    }

    /// Coordinates of `y` in the `ℓ`-torsion `⟨ℓ^(k_i − 1) b_i⟩`.
    fn solve_torsion<G: AbelianGroup<Elem = E>>(&self, g: &G, y: &E) -> Option<Vec<u64>> {
        let rest = &self.torsion[self.split..];
        for digits in DigitIter::new(self.ell, rest.len()) {
            let giant = combine(g, rest, &digits);
            let target = g.op(y, &g.inverse(&giant));
            if let Some(baby) = self.table.get(&target) {
                let mut out = baby.clone();
                out.extend(digits);
                return Some(out);
            }
        }
        None
    }

    /// Coordinates `c_i mod ℓ^(k_i)` of `y` in this basis, or `None` when `y`
    /// is outside the span.
    pub fn dlog<G: AbelianGroup<Elem = E>>(&self, g: &G, y: &E) -> Option<Vec<u128>> {
        let ell = self.ell as u128;
        let max_k = self.exps.first().copied().unwrap_or(0);
        let mut coords = vec![0u128; self.gens.len()];
        let mut cur = y.clone();
        let mut s = match ell_order_exponent(g, &cur, self.ell, max_k + 1) {
            Some(s) if s <= max_k => s,
            _ => return None,
        };
        while s > 0 {
            let top = g.pow(&cur, ell.pow(s - 1));
            let delta = self.solve_torsion(g, &top)?;
            let mut sub = g.identity();
            for (i, &d) in delta.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                let k = self.exps[i];
                if k < s {
                    return None;
                }
                let mult = d as u128 * ell.pow(k - s);
                coords[i] += mult;
                sub = g.op(&sub, &g.pow(&self.gens[i], mult));
            }
            cur = g.op(&cur, &g.inverse(&sub));
            let next = ell_order_exponent(g, &cur, self.ell, s)?;
            if next >= s {
                return None;
            }
            s = next;
        }
        for (c, &k) in coords.iter_mut().zip(&self.exps) {
            *c %= ell.pow(k);
        }
        Some(coords)
    }
}

/// Smallest `s ≤ limit` with `ℓ^s y = 0`.
fn ell_order_exponent<G: AbelianGroup>(g: &G, y: &G::Elem, ell: u64, limit: u32) -> Option<u32> {
    let mut cur = y.clone();
    for s in 0..=limit {
        if g.is_identity(&cur) {
            return Some(s);
        }
        cur = g.pow(&cur, ell as u128);
    }
    None
}

fn combine<G: AbelianGroup>(g: &G, gens: &[G::Elem], digits: &[u64]) -> G::Elem {
    let mut acc = g.identity();
    for (b, &d) in gens.iter().zip(digits) {
        if d != 0 {
            acc = g.op(&acc, &g.pow(b, d as u128));
        }
    }
    acc
}

/// All digit vectors in `[0, ℓ)^n`.
struct DigitIter {
    ell: u64,
    cur: Option<Vec<u64>>,
}

impl DigitIter {
    fn new(ell: u64, n: usize) -> Self {
        DigitIter { ell, cur: Some(vec![0; n]) }
    }
}

impl Iterator for DigitIter {
    type Item = Vec<u64>;
    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.cur.clone()?;
        let mut next = out.clone();
        let mut i = 0;
        loop {
            if i == next.len() {
                self.cur = None;
                break;
            }
            next[i] += 1;
            if next[i] < self.ell {
                self.cur = Some(next);
                break;
            }
            next[i] = 0;
            i += 1;
        }
        Some(out)
    }
}

/// Maximum number of random draws spent on a single Sylow subgroup.
pub const SYLOW_DRAW_BUDGET: usize = 400;

/// Build a basis of the `ℓ`-Sylow subgroup of a group of order `order`.
pub fn sylow_basis<G: AbelianGroup>(
    g: &G,
    order: u64,
    ell: u64,
    rng: &mut ChaCha8Rng,
) -> Result<SylowBasis<G::Elem>, FiniteGeomError> {
    let mut e = 0u32;
    let mut cof = order;
    while cof % ell == 0 {
        cof /= ell;
        e += 1;
    }
    let target = (ell as u128).pow(e);
    let mut basis = SylowBasis::empty(g, ell);
    let mut draws = 0;
    while basis.order() < target {
        draws += 1;
        if draws > SYLOW_DRAW_BUDGET {
            return Err(FiniteGeomError::StructureBudget { ell, found: basis.order() as u64, expected: target as u64 });
        }
        let x = g.pow(&g.random(rng), cof as u128);
        let ord_x = ell_order_exponent(g, &x, ell, e).ok_or(FiniteGeomError::OrderMismatch { order })?;
        // Smallest s with ℓ^s x in the current span.
        let mut found = None;
        let mut y = x.clone();
        for s in 0..=ord_x {
            if let Some(c) = basis.dlog(g, &y) {
                found = Some((s, c));
                break;
            }
            y = g.pow(&y, ell as u128);
        }
        let (s, c) = found.expect("ℓ^ord(x) x is the identity");
        if s == 0 {
            continue;
        }
        basis = extend_basis(g, &basis, x, ord_x, s, &c);
    }
    Ok(basis)
}

/// Replace the generators `b_1..b_m, x` subject to `ℓ^(k_i) b_i = 0` and
/// `ℓ^s x = Σ c_i b_i` by an independent basis read off the Smith form.
fn extend_basis<G: AbelianGroup>(
    g: &G,
    basis: &SylowBasis<G::Elem>,
    x: G::Elem,
    ord_x: u32,
    s: u32,
    c: &[u128],
) -> SylowBasis<G::Elem> {
    let ell = basis.ell;
    let m = basis.rank();
    let n = m + 1;
    let ellb = BigInt::from(ell);
    let mut rel: IMat = vec![vec![BigInt::zero(); n]; n];
    for i in 0..m {
        rel[i][i] = ellb.pow(basis.exps[i]);
    }
    for (j, cj) in c.iter().enumerate() {
        rel[m][j] = -BigInt::from(*cj);
    }
    rel[m][m] = ellb.pow(s);
    let snf = lattice::snf(&rel);
    let qinv = lattice::unimodular_inverse(&snf.q);
    let mut old_gens = basis.gens.clone();
    old_gens.push(x);
    let mut old_orders: Vec<BigInt> = basis.exps.iter().map(|&k| ellb.pow(k)).collect();
    old_orders.push(ellb.pow(ord_x));
    let mut pairs: Vec<(u32, G::Elem)> = Vec::new();
    for (i, d) in snf.diag.iter().enumerate() {
        if d.is_one() {
            continue;
        }
        let mut k = 0u32;
        let mut t = d.clone();
        while (&t % &ellb).is_zero() {
            t /= &ellb;
            k += 1;
        }
        let mut h = g.identity();
        for (j, gj) in old_gens.iter().enumerate() {
            let coef = qinv[i][j].mod_floor(&old_orders[j]);
            if !coef.is_zero() {
                h = g.op(&h, &g.pow(gj, coef.to_u128().expect("bounded by element order")));
            }
        }
        pairs.push((k, h));
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0));
    let mut out = SylowBasis::empty(g, ell);
    out.exps = pairs.iter().map(|p| p.0).collect();
    out.gens = pairs.into_iter().map(|p| p.1).collect();
    out.rebuild(g);
    out
}

/// Full structure `G ≅ ⊕ Z/n_j` with `n_1 | n_2 | …`.
#[derive(Debug, Clone)]
pub struct GroupStructure<E> {
    pub order: u64,
    pub sylows: Vec<SylowBasis<E>>,
    /// Invariant factors in ascending divisibility order.
    pub invariants: Vec<u64>,
    /// Generators matching `invariants`.
    pub gens: Vec<E>,
}

pub fn group_structure<G: AbelianGroup>(
    g: &G,
    order: u64,
    rng: &mut ChaCha8Rng,
) -> Result<GroupStructure<G::Elem>, FiniteGeomError> {
    let mut sylows = Vec::new();
    for (ell, _) in factor_u64(order) {
        sylows.push(sylow_basis(g, order, ell, rng)?);
    }
    let rank = sylows.iter().map(SylowBasis::rank).max().unwrap_or(0);
    let mut invariants = Vec::with_capacity(rank);
    let mut gens = Vec::with_capacity(rank);
    for j in 0..rank {
        let mut n = 1u64;
        let mut h = g.identity();
        for s in &sylows {
            if j < s.rank() {
                n *= s.ell.pow(s.exps[j]);
                h = g.op(&h, &s.gens[j]);
            }
        }
        invariants.push(n);
        gens.push(h);
    }
    invariants.reverse();
    gens.reverse();
    Ok(GroupStructure { order, sylows, invariants, gens })
}

impl<E: Clone + Eq + Hash + Debug> GroupStructure<E> {
    /// Coordinates of `y` on [`GroupStructure::gens`], reduced mod the
    /// invariant factors.
    pub fn coords<G: AbelianGroup<Elem = E>>(&self, g: &G, y: &E) -> Vec<u64> {
        let rank = self.invariants.len();
        // Residues per descending index, combined by CRT.
        let mut acc: Vec<(u128, u128)> = vec![(0, 1); rank];
        for s in &self.sylows {
            let cof = self.order as u128 / sylow_full_power(self.order, s.ell);
            let z = g.pow(y, cof);
            let c = s.dlog(g, &z).expect("element lies in the group");
            for (j, (&cj, &k)) in c.iter().zip(&s.exps).enumerate() {
                let m = (s.ell as u128).pow(k);
                let inv = invmod((cof % m) as u64, m as u64).expect("cofactor is a unit") as u128;
                let r = cj % m * inv % m;
                let (a, n) = acc[j];
                acc[j] = crt(a, n, r, m);
            }
        }
        let mut out: Vec<u64> = acc.into_iter().map(|(a, _)| a as u64).collect();
        out.reverse();
        out
    }

    /// Express each target as an integer combination of `gens`, if possible.
    pub fn dlog_solve<G: AbelianGroup<Elem = E>>(
        &self,
        g: &G,
        targets: &[E],
        gens: &[E],
    ) -> Vec<Option<Vec<BigInt>>> {
        let moduli: Vec<BigInt> = self.invariants.iter().map(|&n| BigInt::from(n)).collect();
        let images: IMat = gens
            .iter()
            .map(|x| self.coords(g, x).into_iter().map(BigInt::from).collect())
            .collect();
        let qm = QuotientMap::new(&moduli, &images);
        targets
            .iter()
            .map(|t| {
                let c: Vec<BigInt> = self.coords(g, t).into_iter().map(BigInt::from).collect();
                qm.preimage(&c)
            })
            .collect()
    }

    pub fn element_from_coords<G: AbelianGroup<Elem = E>>(&self, g: &G, c: &[u64]) -> E {
        let mut acc = g.identity();
        for (x, &cj) in self.gens.iter().zip(c) {
            acc = g.op(&acc, &g.pow(x, cj as u128));
        }
        acc
    }
}

fn sylow_full_power(order: u64, ell: u64) -> u128 {
    let mut pe = 1u128;
    let mut o = order;
    while o % ell == 0 {
        o /= ell;
        pe *= ell as u128;
    }
    pe
}

fn crt(a: u128, n: u128, b: u128, m: u128) -> (u128, u128) {
    // n and m are coprime prime powers (or n = 1).
    let inv = invmod((n % m) as u64, m as u64).unwrap_or(0) as u128;
    let t = (b + m - a % m) % m * inv % m;
    (a + n * t, n * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// `⊕ Z/n_i` as a black box.
    struct Product(Vec<u64>);

    impl AbelianGroup for Product {
        type Elem = Vec<u64>;
        fn identity(&self) -> Vec<u64> {
            vec![0; self.0.len()]
        }
        fn op(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
            a.iter().zip(b).zip(&self.0).map(|((x, y), n)| (x + y) % n).collect()
        }
        fn inverse(&self, a: &Vec<u64>) -> Vec<u64> {
            a.iter().zip(&self.0).map(|(x, n)| (n - x) % n).collect()
        }
        fn random(&self, rng: &mut ChaCha8Rng) -> Vec<u64> {
            self.0.iter().map(|&n| rng.gen_range(0..n)).collect()
        }
    }

    #[test]
    fn invariant_factors_of_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (moduli, expect) in [
            (vec![4, 6], vec![2, 12]),
            (vec![110, 110], vec![110, 110]),
            (vec![9, 3, 5, 8], vec![3, 360]),
            (vec![7], vec![7]),
        ] {
            let g = Product(moduli.clone());
            let order = moduli.iter().product();
            let s = group_structure(&g, order, &mut rng).unwrap();
            assert_eq!(s.invariants, expect);
            for (x, n) in s.gens.iter().zip(&s.invariants) {
                assert!(g.is_identity(&g.pow(x, *n as u128)));
            }
            for _ in 0..20 {
                let y = g.random(&mut rng);
                let c = s.coords(&g, &y);
                assert_eq!(s.element_from_coords(&g, &c), y);
            }
        }
    }

    #[test]
    fn dlog_in_terms_of_other_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Product(vec![12, 18]);
        let s = group_structure(&g, 216, &mut rng).unwrap();
        let gens = vec![vec![1, 0], vec![0, 2]];
        let res = s.dlog_solve(&g, &[vec![5, 4], vec![0, 1]], &gens);
        let c = res[0].as_ref().unwrap();
        let back = g.op(
            &g.pow_signed(&gens[0], c[0].mod_floor(&BigInt::from(216)).to_i128().unwrap()),
            &g.pow_signed(&gens[1], c[1].mod_floor(&BigInt::from(216)).to_i128().unwrap()),
        );
        assert_eq!(back, vec![5, 4]);
        assert!(res[1].is_none());
    }
}
