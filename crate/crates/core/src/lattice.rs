//! Integer matrices: row Hermite normal form, Smith normal form with
//! transforms, kernels of maps into finite abelian groups, and canonical
//! coset representatives modulo full-rank lattices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IMat = Vec<Vec<BigInt>>;

pub fn identity(n: usize) -> IMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &IMat, b: &IMat) -> IMat {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = BigInt::zero();
                    for (t, x) in row.iter().enumerate() {
                        if !x.is_zero() {
                            acc += x * &b[t][j];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn vec_mat(v: &[BigInt], m: &IMat) -> Vec<BigInt> {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| {
            let mut acc = BigInt::zero();
            for (t, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    acc += x * &m[t][j];
                }
            }
            acc
        })
        .collect()
}

pub fn from_i64(rows: &[&[i64]]) -> IMat {
    rows.iter().map(|r| r.iter().map(|&c| BigInt::from(c)).collect()).collect()
}

/// Row-style Hermite normal form: returns the nonzero rows of `H` (upper
/// echelon, positive pivots, entries above each pivot reduced into
/// `[0, pivot)`) and `U` with `U·A = [H; 0]`.
pub fn hnf(a: &IMat) -> (IMat, IMat) {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut h = a.clone();
    let mut u = identity(rows);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // Euclid down the column until one nonzero entry remains at row r.
        loop {
            let mut best: Option<usize> = None;
            for i in r..rows {
                if !h[i][c].is_zero() && best.is_none_or(|b| h[i][c].abs() < h[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            h.swap(r, b);
            u.swap(r, b);
            let mut done = true;
            for i in (r + 1)..rows {
                if h[i][c].is_zero() {
                    continue;
                }
                let q = h[i][c].div_floor(&h[r][c]);
                row_sub(&mut h, i, r, &q);
                row_sub(&mut u, i, r, &q);
                if !h[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[r][c].is_zero() {
            continue;
        }
        if h[r][c].is_negative() {
            negate_row(&mut h, r);
            negate_row(&mut u, r);
        }
        for i in 0..r {
            let q = h[i][c].div_floor(&h[r][c]);
            if !q.is_zero() {
                row_sub(&mut h, i, r, &q);
                row_sub(&mut u, i, r, &q);
            }
        }
        r += 1;
    }
    h.truncate(r);
    (h, u)
}

fn row_sub(m: &mut IMat, i: usize, r: usize, q: &BigInt) {
    let src = m[r].clone();
    for (x, y) in m[i].iter_mut().zip(src.iter()) {
        *x -= q * y;
    }
}

fn col_sub(m: &mut IMat, j: usize, c: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let y = row[c].clone();
        row[j] -= q * y;
    }
}

fn negate_row(m: &mut IMat, i: usize) {
    for x in m[i].iter_mut() {
        *x = -x.clone();
    }
}

fn swap_cols(m: &mut IMat, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// Smith normal form `P·A·Q = D` with unimodular `P`, `Q`. `diag` has
/// `min(rows, cols)` non-negative entries with `d_i | d_(i+1)` (zeros last).
#[derive(Debug, Clone)]
pub struct Snf {
    pub diag: Vec<BigInt>,
    pub p: IMat,
    pub q: IMat,
}

pub fn snf(a: &IMat) -> Snf {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut d = a.clone();
    let mut p = identity(rows);
    let mut q = identity(cols);
    let n = rows.min(cols);
    for t in 0..n {
        // Pivot: smallest nonzero entry in the remaining block.
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !d[i][j].is_zero()
                        && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            d.swap(t, bi);
            p.swap(t, bi);
            swap_cols(&mut d, t, bj);
            swap_cols(&mut q, t, bj);
            let mut clean = true;
            for i in (t + 1)..rows {
                if d[i][t].is_zero() {
                    continue;
                }
                let k = d[i][t].div_floor(&d[t][t]);
                row_sub(&mut d, i, t, &k);
                row_sub(&mut p, i, t, &k);
                if !d[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in (t + 1)..cols {
                if d[t][j].is_zero() {
                    continue;
                }
                let k = d[t][j].div_floor(&d[t][t]);
                col_sub(&mut d, j, t, &k);
                col_sub(&mut q, j, t, &k);
                if !d[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Enforce divisibility of the rest of the block.
            let piv = d[t][t].clone();
            let mut bad_row = None;
            'search: for i in (t + 1)..rows {
                for j in (t + 1)..cols {
                    if !(&d[i][j] % &piv).is_zero() {
                        bad_row = Some(i);
                        break 'search;
                    }
                }
            }
            match bad_row {
                Some(i) => {
                    // Add row i to row t and repeat.
                    let src = d[i].clone();
                    for (x, y) in d[t].iter_mut().zip(src.iter()) {
                        *x += y;
                    }
                    let srcp = p[i].clone();
                    for (x, y) in p[t].iter_mut().zip(srcp.iter()) {
                        *x += y;
                    }
                }
                None => break,
            }
        }
        if d[t][t].is_negative() {
            negate_row(&mut d, t);
            negate_row(&mut p, t);
        }
    }
    let diag = (0..n).map(|i| d[i][i].clone()).collect();
    Snf { diag, p, q }
}

/// Inverse of a unimodular matrix.
pub fn unimodular_inverse(m: &IMat) -> IMat {
    let n = m.len();
    let aug: IMat = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    let (h, _) = hnf(&aug);
    debug_assert_eq!(h.len(), n);
    h.iter().map(|r| r[n..].to_vec()).collect()
}

/// A finite abelian group `⊕ Z/n_j` and a homomorphism `Z^k → G` given by
/// the images of the unit vectors.
#[derive(Debug, Clone)]
pub struct HomToFinite {
    pub moduli: Vec<BigInt>,
    /// `k × m` image matrix.
    pub images: IMat,
}

impl HomToFinite {
    /// Kernel lattice as an HNF basis (rows). Full rank since `G` is finite.
    pub fn kernel(&self) -> IMat {
        let k = self.images.len();
        let m = self.moduli.len();
        let mut aug: IMat = Vec::with_capacity(k + m);
        for (i, row) in self.images.iter().enumerate() {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            aug.push(r);
        }
        for (j, n) in self.moduli.iter().enumerate() {
            let mut r = vec![BigInt::zero(); m + k];
            r[j] = n.clone();
            aug.push(r);
        }
        let (h, _) = hnf(&aug);
        let ker: IMat = h
            .into_iter()
            .filter(|r| r[..m].iter().all(Zero::is_zero))
            .map(|r| r[m..].to_vec())
            .collect();
        hnf(&ker).0
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        let raw = vec_mat(v, &self.images);
        raw.iter().zip(&self.moduli).map(|(x, n)| x.mod_floor(n)).collect()
    }
}

/// Quotient map `ψ: G → G / ⟨rows of S⟩` for `G = ⊕ Z/n_j`, together with a
/// preimage solver for elements of the subgroup.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    m: usize,
    /// Number of subgroup generator rows (before the modulus rows).
    gens: usize,
    snf: Snf,
}

impl QuotientMap {
    pub fn new(moduli: &[BigInt], subgroup_gens: &IMat) -> Self {
        let m = moduli.len();
        let mut s: IMat = subgroup_gens.clone();
        for (j, n) in moduli.iter().enumerate() {
            let mut r = vec![BigInt::zero(); m];
            r[j] = n.clone();
            s.push(r);
        }
        QuotientMap { m, gens: subgroup_gens.len(), snf: snf(&s) }
    }

    /// Canonical image of `t` in the quotient.
    pub fn project(&self, t: &[BigInt]) -> Vec<BigInt> {
        let tq = vec_mat(t, &self.snf.q);
        tq.iter()
            .zip(&self.snf.diag)
            .filter(|(_, d)| !d.is_one())
            .map(|(x, d)| if d.is_zero() { x.clone() } else { x.mod_floor(d) })
            .collect()
    }

    /// Size of the quotient.
    pub fn quotient_order(&self) -> BigInt {
        self.snf.diag.iter().fold(BigInt::one(), |acc, d| acc * d)
    }

    /// Integer coefficients `c` with `Σ c_i gen_i ≡ t` when `t` lies in the
    /// subgroup.
    pub fn preimage(&self, t: &[BigInt]) -> Option<Vec<BigInt>> {
        let tq = vec_mat(t, &self.snf.q);
        let rows = self.snf.p.len();
        let mut y = vec![BigInt::zero(); rows];
        for (j, x) in tq.iter().enumerate().take(self.m) {
            let d = &self.snf.diag[j];
            if d.is_zero() {
                if !x.is_zero() {
                    return None;
                }
                continue;
            }
            let (qq, r) = x.div_mod_floor(d);
            if !r.is_zero() {
                return None;
            }
            y[j] = qq;
        }
        let x = vec_mat(&y, &self.snf.p);
        Some(x[..self.gens].to_vec())
    }
}

/// Reduce `v` modulo the lattice spanned by the rows of an upper-triangular
/// full-rank HNF basis, giving the canonical representative with
/// `0 ≤ v_j < H_jj` in every coordinate.
pub fn reduce_mod_hnf(v: &[BigInt], h: &IMat) -> Vec<BigInt> {
    let mut out = v.to_vec();
    for (j, row) in h.iter().enumerate() {
        let piv = &row[j];
        let q = out[j].div_floor(piv);
        if !q.is_zero() {
            for (x, y) in out.iter_mut().zip(row.iter()) {
                *x -= &q * y;
            }
        }
    }
    out
}

/// Whether `v` lies in the lattice of a full-rank HNF basis.
pub fn in_lattice(v: &[BigInt], h: &IMat) -> bool {
    reduce_mod_hnf(v, h).iter().all(Zero::is_zero)
}

/// Whether the lattice of `sub` is contained in the lattice of `sup`.
pub fn is_sublattice(sub: &IMat, sup: &IMat) -> bool {
    sub.iter().all(|r| in_lattice(r, sup))
}

/// Index of a full-rank lattice in `Z^n` (product of HNF pivots).
pub fn lattice_index(h: &IMat) -> BigInt {
    h.iter().enumerate().fold(BigInt::one(), |acc, (j, r)| acc * &r[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hnf_transform() {
        let a = from_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let (h, u) = hnf(&a);
        let ua = mat_mul(&u, &a);
        assert_eq!(&ua[..h.len()], &h[..]);
        for (j, row) in h.iter().enumerate() {
            let piv = row.iter().position(|x| !x.is_zero()).unwrap();
            assert!(piv >= j && row[piv].is_positive());
        }
    }

    #[test]
    fn snf_transform_and_chain() {
        let a = from_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let s = snf(&a);
        let d = mat_mul(&mat_mul(&s.p, &a), &s.q);
        for (i, row) in d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i == j {
                    assert_eq!(x, &s.diag[i]);
                } else {
                    assert!(x.is_zero());
                }
            }
        }
        assert_eq!(s.diag, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
    }

    #[test]
    fn kernel_of_map_to_cyclic_groups() {
        // Z^2 → Z/6 × Z/4, e1 ↦ (1, 2), e2 ↦ (3, 0)
        let hom = HomToFinite {
            moduli: vec![BigInt::from(6), BigInt::from(4)],
            images: from_i64(&[&[1, 2], &[3, 0]]),
        };
        let ker = hom.kernel();
        for r in &ker {
            assert!(hom.apply(r).iter().all(Zero::is_zero));
        }
        // Image has order 12 / gcd... index of kernel equals image size.
        let mut image = std::collections::HashSet::new();
        for a in 0..12 {
            for b in 0..12 {
                image.insert(hom.apply(&[BigInt::from(a), BigInt::from(b)]));
            }
        }
        assert_eq!(lattice_index(&ker), BigInt::from(image.len()));
    }

    #[test]
    fn quotient_and_preimage() {
        let moduli = vec![BigInt::from(6), BigInt::from(4)];
        let gens = from_i64(&[&[2, 2]]);
        let qm = QuotientMap::new(&moduli, &gens);
        assert_eq!(qm.quotient_order(), BigInt::from(24 / 6));
        let t = vec![BigInt::from(4), BigInt::from(0)]; // 2·(2,2) = (4, 0)
        let c = qm.preimage(&t).unwrap();
        let back: Vec<BigInt> = vec_mat(&c, &gens)
            .iter()
            .zip(&moduli)
            .map(|(x, n)| x.mod_floor(n))
            .collect();
        assert_eq!(back, t);
        assert!(qm.preimage(&[BigInt::from(1), BigInt::from(0)]).is_none());
        assert_eq!(qm.project(&t), qm.project(&[BigInt::zero(), BigInt::zero()]));
    }

    #[test]
    fn canonical_reduction() {
        let (h, _) = hnf(&from_i64(&[&[4, 1], &[0, 3]]));
        let v = vec![BigInt::from(9), BigInt::from(-7)];
        let r = reduce_mod_hnf(&v, &h);
        assert!(r.iter().zip(0..).all(|(x, j)| !x.is_negative() && x < &h[j][j]));
        let diff: Vec<BigInt> = v.iter().zip(&r).map(|(a, b)| a - b).collect();
        assert!(in_lattice(&diff, &h));
    }
}
