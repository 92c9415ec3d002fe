mod common;

use std::collections::HashSet;

use chabauty_core::coleman::{
    embed_curve, embed_point, expand_differential, terms_needed, tiny_integral, uniformizer_at, LocalContext,
};
use chabauty_core::field::Field;
use chabauty_core::localfield::{LocalElement, LocalRing};
use chabauty_core::mumford::{Curve, CurvePoint};
use chabauty_core::numberfield::NumberField;
use num_bigint::BigInt;
use proptest::prelude::*;

const PREC: i64 = 24;

struct Ball {
    ring: LocalRing,
    curve: Curve<LocalRing>,
    center: CurvePoint<LocalElement>,
}

impl Ball {
    fn new(fx: &common::Fixture, p: u64, place: usize, point: usize) -> Ball {
        let v = &fx.k.split_prime(p).unwrap()[place];
        let ring = LocalRing::lift_place(&fx.k, v, PREC);
        let curve = embed_curve(&ring, &fx.curve).unwrap();
        let center = embed_point(&ring, &fx.points[point]).unwrap();
        Ball { ring, curve, center }
    }

    /// The point of the ball with `x = x(Q) + p·c`, on the branch of `Q`.
    fn point(&self, c: i64) -> CurvePoint<LocalElement> {
        let CurvePoint::Affine(x0, y0) = &self.center else { unreachable!() };
        let r = &self.ring;
        let x = r.add(x0, &r.mul(&r.from_i64(self.ring.p() as i64), &r.from_i64(c)));
        let start = r.residue(y0).unwrap();
        let y = r.hensel_sqrt(&self.curve.eval_f(&x), Some(&start)).unwrap();
        CurvePoint::Affine(x, y)
    }

    fn integral(&self, from: &CurvePoint<LocalElement>, to: &CurvePoint<LocalElement>, k: usize) -> LocalElement {
        let u = uniformizer_at(&self.ring, from).unwrap();
        let t = u.parameter(&self.ring, to).unwrap();
        let n = terms_needed(self.ring.p(), 1, PREC);
        let e = expand_differential(&self.curve, k, &u, n).unwrap();
        tiny_integral(&self.ring, &t, &e).unwrap()
    }
}

fn val(e: &LocalElement) -> i64 {
    if e.is_zero_like() {
        e.precision()
    } else {
        e.valuation()
    }
}

fn fixture_ball() -> impl Strategy<Value = (u64, usize, usize)> {
    // Affine known points of C_1 at 109 (three split places) and 7 (inert).
    (prop::sample::select(vec![109u64, 7]), 0usize..3, 1usize..5)
        .prop_map(|(p, v, q)| (p, if p == 7 { 0 } else { v }, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn linear_term_dominates_tiny_integrals((p, v, q) in fixture_ball(), c in -10_000i64..10_000, scale in 0u32..3) {
        let fx = common::c1();
        let ball = Ball::new(&fx, p, v, q);
        let c = c * (p as i64).pow(scale);
        prop_assume!(c != 0);
        let pt = ball.point(c);
        let u = uniformizer_at(&ball.ring, &ball.center).unwrap();
        let t = u.parameter(&ball.ring, &pt).unwrap();
        for k in [1, 2] {
            let e = expand_differential(&ball.curve, k, &u, 1).unwrap();
            let integral = ball.integral(&ball.center, &pt, k);
            let linear = ball.ring.mul(&e.alpha[0], &t);
            prop_assert!(val(&ball.ring.sub(&integral, &linear)) >= 2 * t.valuation());
        }
    }

    #[test]
    fn integrals_add_along_paths((p, v, q) in fixture_ball(), a in -500i64..500, b in -500i64..500) {
        let fx = common::c1();
        let ball = Ball::new(&fx, p, v, q);
        let (pa, pb) = (ball.point(a), ball.point(b));
        for k in [1, 2] {
            let lhs = ball.ring.add(&ball.integral(&ball.center, &pa, k), &ball.integral(&pa, &pb, k));
            let rhs = ball.integral(&ball.center, &pb, k);
            prop_assert!(ball.ring.sub(&lhs, &rhs).is_zero_like());
        }
    }
}

#[test]
fn hensel_points_have_distinct_parameters() {
    let fx = common::c1();
    for (p, v) in [(109, 0), (109, 2), (7, 0)] {
        let ball = Ball::new(&fx, p, v, 3);
        let u = uniformizer_at(&ball.ring, &ball.center).unwrap();
        let mut seen = HashSet::new();
        for c in 1..=50 {
            let pt = ball.point(c);
            let CurvePoint::Affine(x, y) = &pt else { unreachable!() };
            let r = &ball.ring;
            assert!(r.sub(&r.mul(y, y), &ball.curve.eval_f(x)).is_zero_like());
            let t = u.parameter(r, &pt).unwrap();
            assert!(t.valuation() >= 1);
            assert!(seen.insert((t.valuation(), t.unit_digits().to_vec())));
        }
    }
}

#[test]
fn periods_are_linear_in_the_divisor() {
    let fx = common::c1();
    let v = &fx.k.split_prime(109).unwrap()[1];
    let ctx = LocalContext::new(&fx.k, &fx.curve, v, 20).unwrap();
    let ring = ctx.ring();
    for d in &fx.gens {
        let base = ctx.periods(d, 12100).unwrap();
        for n in [2u64, 3, 5] {
            let nd = fx.curve.mul_u128(d, n as u128).unwrap();
            let scaled = ctx.periods(&nd, 12100).unwrap();
            for i in 0..2 {
                let expect = ring.mul(&ring.from_i64(n as i64), &base[i]);
                assert!(ring.sub(&scaled[i], &expect).is_zero_like(), "n = {n}");
            }
        }
    }
}

#[test]
fn torsion_has_zero_periods() {
    let q = NumberField::new(&[BigInt::from(0), BigInt::from(1)]).unwrap();
    let f = vec![q.from_i64(-3), q.zero(), q.zero(), q.zero(), q.zero(), q.from_i64(3)];
    let curve = Curve::new(q.clone(), f).unwrap();
    let d = curve.point_class(&CurvePoint::Affine(q.one(), q.zero()));
    for p in [7u64, 11, 13] {
        let v = &q.split_prime(p).unwrap()[0];
        let ctx = LocalContext::new(&q, &curve, v, 20).unwrap();
        for x in ctx.periods(&d, 2).unwrap() {
            assert!(x.is_zero_like(), "p = {p}");
        }
    }
}
