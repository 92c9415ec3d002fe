//! The Jacobian of a genus-2 curve over `F_q` as a black-box group.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::field::Field;
use crate::mumford::{Curve, CurvePoint, Divisor};
use crate::par::{self, Execution};
use crate::poly;

use super::fq::{FiniteField, Fq, QuadExt};
use super::group::AbelianGroup;

#[derive(Debug, Clone)]
pub struct JacobianFq {
    pub curve: Curve<FiniteField>,
}

impl JacobianFq {
    pub fn new(curve: Curve<FiniteField>) -> Self {
        JacobianFq { curve }
    }

    pub fn field(&self) -> &FiniteField {
        &self.curve.k
    }

    /// `[P − base]` for every point in `points`, in input order.
    pub fn abel_jacobi_images(
        &self,
        points: &[CurvePoint<Fq>],
        base: &CurvePoint<Fq>,
        exec: Execution,
    ) -> Vec<Divisor<Fq>> {
        let nb = self.curve.neg(&self.curve.point_class(base));
        par::map_slice(exec, points, |pt| self.op(&self.curve.point_class(pt), &nb))
    }

    fn random_sign(&self, y: Fq, rng: &mut ChaCha8Rng) -> Fq {
        if rng.gen::<bool>() {
            self.field().neg(&y)
        } else {
            y
        }
    }

    fn try_random(&self, rng: &mut ChaCha8Rng) -> Option<Divisor<Fq>> {
        let k = self.field();
        let q = k.size();
        let r = rng.gen_range(0..q * q + q + 1);
        if r == 0 {
            return Some(self.curve.identity());
        }
        if r <= q {
            let x = k.from_index(r - 1);
            let y = self.random_sign(k.sqrt(&self.curve.eval_f(&x))?, rng);
            return Some(self.curve.point_class(&CurvePoint::Affine(x, y)));
        }
        let a0 = k.from_index(rng.gen_range(0..q));
        let a1 = k.from_index(rng.gen_range(0..q));
        let u = vec![a0, a1, k.one()];
        let disc = k.sub(&k.mul(&a1, &a1), &k.mul(&k.from_i64(4), &a0));
        let v = if disc == Fq::default() {
            // u = (x − r)², v is the tangent line at (r, y) with y ≠ 0.
            let r = k.mul(&k.neg(&a1), &k.inv(&k.from_i64(2)).ok()?);
            let y = self.random_sign(k.sqrt(&self.curve.eval_f(&r))?, rng);
            let df = poly::eval(k, &poly::derivative(k, &self.curve.f), &r);
            let slope = k.mul(&df, &k.inv(&k.add(&y, &y)).ok()?);
            vec![k.sub(&y, &k.mul(&slope, &r)), slope]
        } else if let Some(s) = k.sqrt(&disc) {
            let half = k.inv(&k.from_i64(2)).ok()?;
            let r1 = k.mul(&k.sub(&s, &a1), &half);
            let r2 = k.mul(&k.sub(&k.neg(&s), &a1), &half);
            let y1 = self.random_sign(k.sqrt(&self.curve.eval_f(&r1))?, rng);
            let y2 = self.random_sign(k.sqrt(&self.curve.eval_f(&r2))?, rng);
            let slope = k.mul(&k.sub(&y2, &y1), &k.inv(&k.sub(&r2, &r1)).ok()?);
            vec![k.sub(&y1, &k.mul(&slope, &r1)), slope]
        } else {
            let ext = QuadExt::from_monic_quadratic(k, &a1, &a0);
            let f2: Vec<(Fq, Fq)> = self.curve.f.iter().map(|c| (*c, Fq::default())).collect();
            let root = (Fq::default(), k.one());
            let w = ext.sqrt(&poly::eval(&ext, &f2, &root))?;
            let w = if rng.gen::<bool>() { ext.neg(&w) } else { w };
            vec![w.0, w.1]
        };
        let mut v = v;
        poly::trim(k, &mut v).ok()?;
        Some(Divisor { u, v })
    }
}

impl AbelianGroup for JacobianFq {
    type Elem = Divisor<Fq>;

    fn identity(&self) -> Divisor<Fq> {
        self.curve.identity()
    }
    fn op(&self, a: &Divisor<Fq>, b: &Divisor<Fq>) -> Divisor<Fq> {
        self.curve.add(a, b).expect("finite field arithmetic is exact")
    }
    fn inverse(&self, a: &Divisor<Fq>) -> Divisor<Fq> {
        self.curve.neg(a)
    }
    fn random(&self, rng: &mut ChaCha8Rng) -> Divisor<Fq> {
        loop {
            if let Some(d) = self.try_random(rng) {
                return d;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finitegeom::count::{enumerate_jacobian, zeta_data, DEFAULT_ORDER_CAP};
    use crate::finitegeom::group::group_structure;
    use rand::SeedableRng;
    use std::collections::HashSet;

    fn jac(p: u64, f: &[u64]) -> JacobianFq {
        let k = FiniteField::prime(p);
        let f = f.iter().map(|&c| k.from_u64(c)).collect();
        JacobianFq::new(Curve::new(k, f).unwrap())
    }

    #[test]
    fn random_divisors_are_valid_and_cover_small_groups() {
        let j = jac(5, &[1, 0, 2, 0, 0, 1]);
        let all: HashSet<_> = enumerate_jacobian(&j.curve).into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = HashSet::new();
        for _ in 0..4000 {
            let d = j.random(&mut rng);
            assert!(all.contains(&d), "{d:?}");
            seen.insert(d);
        }
        assert_eq!(seen.len(), all.len());
    }

    #[test]
    fn structure_over_f109() {
        let j = jac(109, &[3, 0, 0, 0, 0, 1]);
        let z = zeta_data(&j.curve, DEFAULT_ORDER_CAP, Execution::Sequential).unwrap();
        let n = z.jacobian_order();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = group_structure(&j, n, &mut rng).unwrap();
        assert_eq!(s.invariants.iter().product::<u64>(), n);
        for w in s.invariants.windows(2) {
            assert_eq!(w[1] % w[0], 0);
        }
        for _ in 0..10 {
            let y = j.random(&mut rng);
            assert_eq!(s.element_from_coords(&j, &s.coords(&j, &y)), y);
        }
    }
}
