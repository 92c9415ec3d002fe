use chabauty_core::field::Field;
use chabauty_core::fp;
use chabauty_core::lattice::{self, IMat};
use chabauty_core::localfield::{hnf_zp, mat_mul, rank_mod_p, zp_residue, LocalRing, PivotOrder, ZpMatrix};
use chabauty_core::numberfield::{cube_root_two, NfElement, NumberField};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn fields() -> Vec<NumberField> {
    let int = |c: &[i64]| c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
    vec![
        cube_root_two(),
        NumberField::new(&int(&[1, 0, 1])).unwrap(),
        NumberField::new(&int(&[-1, -1, 0, 1])).unwrap(),
        NumberField::new(&int(&[2, 0, 0, 0, 1])).unwrap(),
    ]
}

fn element(k: &NumberField, nums: &[i64], den: i64) -> NfElement {
    let cs: Vec<BigRational> = nums
        .iter()
        .take(k.degree())
        .map(|&n| BigRational::new(n.into(), den.into()))
        .collect();
    k.from_coeffs(&cs)
}

fn eq_local(ring: &LocalRing, a: &chabauty_core::localfield::LocalElement, b: &chabauty_core::localfield::LocalElement) -> bool {
    ring.sub(a, b).is_zero_like()
}

fn brute_has_root(f: &[u64], p: u64) -> bool {
    (0..p).any(|x| f.iter().rev().fold(0u64, |acc, &c| (acc * x + c) % p) == 0)
}

fn coeffs() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-40i64..=40, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_is_exact(fi in 0usize..4, c in coeffs(), den in 1i64..12) {
        let k = &fields()[fi];
        let x = element(k, &c, den);
        prop_assume!(!x.is_zero());
        let y = k.invert(&x).unwrap();
        prop_assert_eq!(k.mul(&x, &y), k.one());
    }

    #[test]
    fn norm_is_multiplicative(fi in 0usize..4, a in coeffs(), b in coeffs(), da in 1i64..8, db in 1i64..8) {
        let k = &fields()[fi];
        let (x, y) = (element(k, &a, da), element(k, &b, db));
        prop_assert_eq!(k.norm(&k.mul(&x, &y)), k.norm(&x) * k.norm(&y));
    }

    #[test]
    fn residue_degrees_sum_to_degree(fi in 0usize..4, pi in 0usize..40) {
        let k = &fields()[fi];
        let p = fp::primes_below(200)[pi + 2];
        let Ok(places) = k.split_prime(p) else { return Ok(()) };
        prop_assert_eq!(places.iter().map(|v| v.residue_degree).sum::<usize>(), k.degree());
        let mut product = vec![1u64];
        for v in &places {
            prop_assert_eq!(v.factor.len(), v.residue_degree + 1);
            prop_assert_eq!(*v.factor.last().unwrap(), 1);
            if (2..=3).contains(&v.residue_degree) {
                prop_assert!(!brute_has_root(&v.factor, p));
            }
            product = fp::pmul(&product, &v.factor, p);
        }
        prop_assert_eq!(product, k.reduce_poly_mod(p));
    }

    #[test]
    fn valuation_is_additive(fi in 0usize..4, pi in 0usize..20, a in coeffs(), b in coeffs()) {
        let k = &fields()[fi];
        let p = fp::primes_below(100)[pi + 2];
        let Ok(places) = k.split_prime(p) else { return Ok(()) };
        let (x, y) = (element(k, &a, 1), element(k, &b, 1));
        prop_assume!(!x.is_zero() && !y.is_zero());
        for v in &places {
            let ring = LocalRing::lift_place(k, v, 20);
            let vx = ring.valuation_of(&x).unwrap();
            let vy = ring.valuation_of(&y).unwrap();
            prop_assume!(vx + vy < 15);
            prop_assert_eq!(ring.valuation_of(&k.mul(&x, &y)).unwrap(), vx + vy);
        }
    }

    #[test]
    fn embedding_is_a_ring_homomorphism(fi in 0usize..4, pi in 0usize..20, a in coeffs(), b in coeffs(), den in 1i64..6) {
        let k = &fields()[fi];
        let p = fp::primes_below(100)[pi + 2];
        prop_assume!(den % p as i64 != 0);
        let Ok(places) = k.split_prime(p) else { return Ok(()) };
        let (x, y) = (element(k, &a, den), element(k, &b, 1));
        for v in &places {
            let ring = LocalRing::lift_place(k, v, 16);
            let (ex, ey) = (ring.embed(&x).unwrap(), ring.embed(&y).unwrap());
            prop_assert!(eq_local(&ring, &ring.embed(&k.add(&x, &y)).unwrap(), &ring.add(&ex, &ey)));
            prop_assert!(eq_local(&ring, &ring.embed(&k.mul(&x, &y)).unwrap(), &ring.mul(&ex, &ey)));
        }
    }

    #[test]
    fn coordinates_round_trip(fi in 0usize..4, pi in 0usize..20, a in coeffs()) {
        let k = &fields()[fi];
        let p = fp::primes_below(100)[pi + 2];
        let Ok(places) = k.split_prime(p) else { return Ok(()) };
        let zp = LocalRing::zp(p, 16);
        for v in places.iter().filter(|v| v.residue_degree > 1) {
            let ring = LocalRing::lift_place(k, v, 16);
            let cs: Vec<_> = a.iter().take(v.residue_degree).map(|&c| zp.from_i64(c)).collect();
            let x = ring.from_coordinates(&cs);
            let back = ring.coordinates(&x, &zp);
            for (c, d) in cs.iter().zip(&back) {
                prop_assert!(eq_local(&zp, c, d));
            }
        }
    }

    #[test]
    fn hensel_square_root_squares_back(fi in 0usize..4, pi in 0usize..20, a in coeffs()) {
        let k = &fields()[fi];
        let p = fp::primes_below(100)[pi + 2];
        let Ok(places) = k.split_prime(p) else { return Ok(()) };
        let x = element(k, &a, 1);
        let sq = k.mul(&x, &x);
        for v in &places {
            let ring = LocalRing::lift_place(k, v, 24);
            let e = ring.embed(&sq).unwrap();
            prop_assume!(!e.is_zero_like() && e.valuation() == 0);
            let r = ring.hensel_sqrt(&e, None).unwrap();
            prop_assert!(eq_local(&ring, &ring.mul(&r, &r), &e));
        }
    }
}

fn zp_matrix(zp: &LocalRing, entries: &[i64], rows: usize, cols: usize, p: u64) -> ZpMatrix {
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| {
                    let e = entries[i * cols + j];
                    // Mix in multiples of p so pivots of positive valuation occur.
                    let n = if (i + j) % 3 == 0 { e * p as i64 } else { e };
                    zp.from_i64(n)
                })
                .collect()
        })
        .collect()
}

fn residues(m: &ZpMatrix, p: u64) -> Vec<Vec<u64>> {
    m.iter().map(|r| r.iter().map(|e| zp_residue(e, p).unwrap()).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn hnf_zp_contract(entries in prop::collection::vec(-30i64..=30, 18), extra in prop::collection::vec(-30i64..=30, 12), pi in 0usize..6) {
        let p = [3u64, 5, 7, 11, 13, 109][pi];
        let zp = LocalRing::zp(p, 20);
        let t = zp_matrix(&zp, &entries, 6, 3, p);
        let a = zp_matrix(&zp, &extra, 6, 2, 1);
        let r1 = hnf_zp(&zp, &t, PivotOrder::LowestRow).unwrap();
        let r2 = hnf_zp(&zp, &t, PivotOrder::HighestRow).unwrap();
        for r in [&r1, &r2] {
            prop_assert_eq!(rank_mod_p(&residues(&r.u, p), p), 6);
            let ut = mat_mul(&zp, &r.u, &t);
            for (row, hrow) in ut.iter().zip(&r.h_mat) {
                for (x, y) in row.iter().zip(hrow) {
                    prop_assert!(eq_local(&zp, x, y));
                }
            }
            for row in &r.h_mat[6 - r.h..] {
                prop_assert!(row.iter().all(|e| e.is_zero_like()));
            }
        }
        prop_assert_eq!(r1.h, r2.h);
        let m1 = residues(&mat_mul(&zp, &r1.u, &a)[6 - r1.h..].to_vec(), p);
        let m2 = residues(&mat_mul(&zp, &r2.u, &a)[6 - r2.h..].to_vec(), p);
        let both: Vec<_> = m1.iter().chain(&m2).cloned().collect();
        let rk = rank_mod_p(&m1, p);
        prop_assert_eq!(rk, rank_mod_p(&m2, p));
        prop_assert_eq!(rk, rank_mod_p(&both, p));
    }

    #[test]
    fn integer_hnf_contract(entries in prop::collection::vec(-20i64..=20, 12)) {
        let a: IMat = entries.chunks(3).map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let (h, u) = lattice::hnf(&a);
        let ua = lattice::mat_mul(&u, &a);
        for (i, row) in ua.iter().enumerate() {
            if i < h.len() {
                prop_assert_eq!(row, &h[i]);
            } else {
                prop_assert!(row.iter().all(Zero::is_zero));
            }
        }
        let snf = lattice::snf(&u);
        prop_assert!(snf.diag.iter().all(|d| d.abs().is_one()));
        let mut last_col = None;
        for row in &h {
            let c = row.iter().position(|x| !x.is_zero()).unwrap();
            prop_assert!(row[c].is_positive());
            prop_assert!(last_col.map_or(true, |l| c > l));
            last_col = Some(c);
        }
    }

    #[test]
    fn snf_divisibility_chain(entries in prop::collection::vec(-20i64..=20, 9)) {
        let a: IMat = entries.chunks(3).map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let s = lattice::snf(&a);
        let d = lattice::mat_mul(&lattice::mat_mul(&s.p, &a), &s.q);
        for (i, row) in d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                prop_assert_eq!(x, &if i == j { s.diag[i].clone() } else { BigInt::zero() });
            }
        }
        for w in s.diag.windows(2) {
            prop_assert!(w[1].is_zero() || (!w[0].is_zero() && (&w[1] % &w[0]).is_zero()));
        }
    }
}
