#![allow(dead_code)]

use chabauty_core::field::Field;
use chabauty_core::mumford::{Curve, CurvePoint, Divisor};
use chabauty_core::numberfield::{cube_root_two, NfElement, NumberField};
use num_rational::BigRational;

pub struct Fixture {
    pub k: NumberField,
    pub curve: Curve<NumberField>,
    pub gens: Vec<Divisor<NfElement>>,
    pub points: Vec<CurvePoint<NfElement>>,
}

pub fn el(k: &NumberField, c: &[i64]) -> NfElement {
    k.from_i64_coeffs(c)
}

pub fn third(k: &NumberField, c: &[i64]) -> NfElement {
    let x = k.from_i64_coeffs(c);
    k.mul(&x, &k.from_rational(BigRational::new(1.into(), 3.into())))
}

/// `y² = 12 ε^(−s) x⁵ − 3 ε^(2s)` over `Q(∛2)` with `ε = 1 − ∛2`.
pub fn family_curve(k: &NumberField, s: i64) -> Curve<NumberField> {
    let eps = el(k, &[1, -1]);
    let eps_inv = k.inv(&eps).unwrap();
    let pw = |e: i64| if e >= 0 { k.pow(&eps, e as u64) } else { k.pow(&eps_inv, (-e) as u64) };
    let a5 = k.mul(&k.from_i64(12), &pw(-s));
    let a0 = k.neg(&k.mul(&k.from_i64(3), &pw(2 * s)));
    let zero = k.zero();
    Curve::new(k.clone(), vec![a0, zero.clone(), zero.clone(), zero.clone(), zero, a5]).unwrap()
}

pub fn c1() -> Fixture {
    let k = cube_root_two();
    let curve = family_curve(&k, 1);
    let pt = |x: NfElement, y: NfElement| CurvePoint::Affine(x, y);
    let p0 = pt(el(&k, &[-1, -1, -1]), el(&k, &[67, 53, 40]));
    let p1 = pt(el(&k, &[-1]), el(&k, &[3, 3]));
    let d1 = curve.point_class(&curve.involution(&p0));
    let d2 = curve.point_class(&p1);
    let d3 = curve
        .make_divisor(
            &vec![third(&k, &[1, 2, -2]), third(&k, &[-2, -1, 1]), k.one()],
            &vec![el(&k, &[1, -1]), el(&k, &[-2, 2])],
        )
        .unwrap();
    let points = vec![
        CurvePoint::Infinity,
        p0.clone(),
        curve.involution(&p0),
        p1.clone(),
        curve.involution(&p1),
    ];
    Fixture { k, curve, gens: vec![d1, d2, d3], points }
}

pub fn c1_mw() -> chabauty_core::mwsieve::AbstractMW {
    use chabauty_core::mwsieve::{AbstractMW, KnownPoint};
    let fx = c1();
    let coords: [[i64; 3]; 5] = [[1, 0, 0], [0, 0, 0], [2, 0, 0], [1, 1, 0], [1, -1, 0]];
    let points = fx
        .points
        .iter()
        .zip(coords)
        .map(|(p, c)| KnownPoint { point: p.clone(), coords: c.iter().map(|&x| x.into()).collect() })
        .collect();
    let base = fx.points[1].clone();
    AbstractMW::new(fx.k, fx.curve, fx.gens, vec![], base, points).unwrap()
}
