mod common;

use std::collections::HashSet;

use chabauty_core::finitegeom::count::{enumerate_jacobian, jacobian_order, zeta_data};
use chabauty_core::finitegeom::fq::{FiniteField, Fq};
use chabauty_core::finitegeom::group::{group_structure, AbelianGroup};
use chabauty_core::finitegeom::jacobian::JacobianFq;
use chabauty_core::mumford::reduce::{reduce_curve, reduce_divisor, ResidueMap};
use chabauty_core::mumford::{Curve, Divisor};
use chabauty_core::par::Execution::Sequential;
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CAP: u64 = 1 << 13;

fn curve(p: u64, f: &[u64]) -> Option<Curve<FiniteField>> {
    let k = FiniteField::prime(p);
    let f = f.iter().map(|&c| k.from_u64(c % p)).collect();
    Curve::new(k, f).ok()
}

/// Remainder of `a` modulo a monic `m`, over `F_p`.
fn rem_monic(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let c = r.pop().unwrap();
        let shift = r.len() - dm;
        for (i, &mi) in m[..dm].iter().enumerate() {
            r[shift + i] = (r[shift + i] + p * p - c * mi % p) % p;
        }
    }
    r
}

fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    out
}

/// Number of reduced Mumford pairs `(u, v)` on `y² = f`, counted from the
/// definition.
fn brute_jacobian_order(p: u64, f: &[u64]) -> u64 {
    let divides = |u: &[u64], v: &[u64]| {
        let v2 = mul(v, v, p);
        let n = v2.len().max(f.len());
        let diff: Vec<u64> = (0..n)
            .map(|i| (v2.get(i).copied().unwrap_or(0) + p - f.get(i).copied().unwrap_or(0)) % p)
            .collect();
        rem_monic(&diff, u, p).iter().all(|&c| c == 0)
    };
    let mut count = 1;
    for a in 0..p {
        for v0 in 0..p {
            count += divides(&[a, 1], &[v0]) as u64;
        }
    }
    for a in 0..p {
        for b in 0..p {
            for v0 in 0..p {
                for v1 in 0..p {
                    count += divides(&[a, b, 1], &[v0, v1]) as u64;
                }
            }
        }
    }
    count
}

fn small_curve() -> impl Strategy<Value = (u64, Vec<u64>)> {
    (prop::sample::select(vec![3u64, 5, 7]), prop::collection::vec(0u64..11, 5), 1u64..11).prop_filter_map(
        "singular model",
        |(p, mut f, lead)| {
            if lead % p == 0 {
                return None;
            }
            f.push(lead % p);
            let f: Vec<u64> = f.iter().map(|c| c % p).collect();
            curve(p, &f).map(|_| (p, f))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zeta_order_matches_brute_force((p, f) in small_curve()) {
        let c = curve(p, &f).unwrap();
        let brute = brute_jacobian_order(p, &f);
        prop_assert_eq!(zeta_data(&c, CAP, Sequential).unwrap().jacobian_order(), brute);
        prop_assert_eq!(enumerate_jacobian(&c).len() as u64, brute);
    }

    #[test]
    fn group_laws_on_enumerated_classes((p, f) in small_curve(), picks in prop::collection::vec(any::<prop::sample::Index>(), 24)) {
        let c = curve(p, &f).unwrap();
        let all = enumerate_jacobian(&c);
        let set: HashSet<&Divisor<Fq>> = all.iter().collect();
        let id = c.identity();
        prop_assert!(set.contains(&id));
        for chunk in picks.chunks(3) {
            let [a, b, d] = [0, 1, 2].map(|i| &all[chunk[i].index(all.len())]);
            let ab = c.add(a, b).unwrap();
            prop_assert!(set.contains(&ab));
            prop_assert_eq!(&ab, &c.add(b, a).unwrap());
            prop_assert_eq!(c.add(&ab, d).unwrap(), c.add(a, &c.add(b, d).unwrap()).unwrap());
            prop_assert_eq!(&c.add(a, &id).unwrap(), a);
            prop_assert!(c.add(a, &c.neg(a)).unwrap().is_identity());
            prop_assert_eq!(&c.neg(&c.neg(a)), a);
        }
        // The identity is the only element fixed by adding it to everything.
        let fixers = all.iter().filter(|e| c.add(e, &all[0]).unwrap() == all[0]).count();
        prop_assert_eq!(fixers, 1);
    }

    #[test]
    fn lagrange_and_structure((p, f) in small_curve(), seed in any::<u64>()) {
        let c = curve(p, &f).unwrap();
        let order = jacobian_order(&c, CAP, Sequential).unwrap();
        let j = JacobianFq::new(c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let x = j.random(&mut rng);
            prop_assert!(j.is_identity(&j.pow(&x, order as u128)));
        }
        let gs = group_structure(&j, order, &mut rng).unwrap();
        prop_assert_eq!(gs.invariants.iter().product::<u64>(), order);
        for w in gs.invariants.windows(2) {
            prop_assert_eq!(w[1] % w[0], 0);
        }
        for (g, &n) in gs.gens.iter().zip(&gs.invariants) {
            prop_assert!(j.is_identity(&j.pow(g, n as u128)));
        }
    }

    #[test]
    fn dlog_round_trip((p, f) in small_curve(), seed in any::<u64>(), cs in prop::collection::vec(-20i64..20, 2)) {
        let c = curve(p, &f).unwrap();
        let order = jacobian_order(&c, CAP, Sequential).unwrap();
        let j = JacobianFq::new(c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gs = group_structure(&j, order, &mut rng).unwrap();
        let gens = vec![j.random(&mut rng), j.random(&mut rng)];
        let target = j.op(&j.pow_signed(&gens[0], cs[0] as i128), &j.pow_signed(&gens[1], cs[1] as i128));
        let sol = gs.dlog_solve(&j, std::slice::from_ref(&target), &gens)[0].clone();
        let sol = sol.expect("target lies in the span");
        let back = j.op(
            &j.pow_signed(&gens[0], i128::try_from(sol[0].clone()).unwrap()),
            &j.pow_signed(&gens[1], i128::try_from(sol[1].clone()).unwrap()),
        );
        prop_assert_eq!(&back, &target);
        let coords = gs.coords(&j, &target);
        prop_assert_eq!(gs.element_from_coords(&j, &coords), target);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cm_order_matches_point_counts(pi in 2usize..40, a in 1u64..1000, b in 1u64..1000) {
        let p = chabauty_core::fp::primes_below(200)[pi];
        prop_assume!(p != 5 && a % p != 0 && b % p != 0);
        let c = curve(p, &[b, 0, 0, 0, 0, a]).unwrap();
        prop_assert_eq!(jacobian_order(&c, 0, Sequential).unwrap(), zeta_data(&c, CAP, Sequential).unwrap().jacobian_order());
    }
}

#[test]
fn group_laws_over_f11() {
    let c = curve(11, &[3, 1, 0, 4, 0, 1]).unwrap();
    let all = enumerate_jacobian(&c);
    assert_eq!(all.len() as u64, brute_jacobian_order(11, &[3, 1, 0, 4, 0, 1]));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let set: HashSet<&Divisor<Fq>> = all.iter().collect();
    use rand::Rng;
    for _ in 0..500 {
        let [a, b, d] = [0; 3].map(|_| &all[rng.gen_range(0..all.len())]);
        let ab = c.add(a, b).unwrap();
        assert!(set.contains(&ab));
        assert_eq!(c.add(&ab, d).unwrap(), c.add(a, &c.add(b, d).unwrap()).unwrap());
        assert_eq!(ab, c.add(b, a).unwrap());
    }
}

#[test]
fn fixture_basis_and_decompositions_hold_exactly() {
    let fx = common::c1();
    for d in &fx.gens {
        assert!(fx.curve.is_valid(d).unwrap());
    }
    let mw = common::c1_mw();
    let base = fx.curve.point_class(&mw.base_point);
    for kp in &mw.points {
        let image = fx.curve.sub(&fx.curve.point_class(&kp.point), &base).unwrap();
        assert_eq!(image, fx.curve.combination(&kp.coords, &fx.gens).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reduction_is_a_homomorphism(pi in 0usize..8, a in prop::collection::vec(-2i64..=2, 3), b in prop::collection::vec(-2i64..=2, 3)) {
        let fx = common::c1();
        let p = [7u64, 11, 13, 17, 19, 23, 29, 31][pi];
        let big = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        let da = fx.curve.combination(&big(&a), &fx.gens).unwrap();
        let db = fx.curve.combination(&big(&b), &fx.gens).unwrap();
        let sum = fx.curve.add(&da, &db).unwrap();
        for v in fx.k.split_prime(p).unwrap() {
            let rm = ResidueMap::new(&fx.k, &v);
            let cv = reduce_curve(&fx.curve, &rm).unwrap();
            let ra = reduce_divisor(&da, &cv, &rm).unwrap();
            let rb = reduce_divisor(&db, &cv, &rm).unwrap();
            prop_assert_eq!(reduce_divisor(&sum, &cv, &rm).unwrap(), cv.add(&ra, &rb).unwrap());
        }
    }
}
