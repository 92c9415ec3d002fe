#[path = "../tests/common/mod.rs"]
mod common;

use chabauty_core::chabauty::build_t;
use chabauty_core::finitegeom::count::{binomial_jacobian_order, count_n1};
use chabauty_core::finitegeom::fq::FiniteField;
use chabauty_core::fp;
use chabauty_core::mumford::Curve;
use chabauty_core::mwsieve::{good_places, place_orders};
use chabauty_core::par::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn prime_above(lo: u64, residue_mod_5: u64) -> u64 {
    fp::primes_below(2 * lo).into_iter().find(|&p| p > lo && p % 5 == residue_mod_5).unwrap()
}

fn point_count(c: &mut Criterion) {
    let p = prime_above(200_000, 1);
    let k = FiniteField::prime(p);
    let f = [3, 1, 0, 7, 0, 1].iter().map(|&x| k.from_u64(x)).collect();
    let curve = Curve::new(k, f).unwrap();
    let mut g = c.benchmark_group("count_n1");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, p), |b| b.iter(|| count_n1(&curve, exec)));
    }
    g.finish();
}

fn binomial_order(c: &mut Criterion) {
    let p = prime_above(50_000, 1);
    let k = FiniteField::prime(p);
    let (a, b0) = (k.from_u64(12), k.from_u64(p - 3));
    let mut g = c.benchmark_group("binomial_jacobian_order");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, p), |b| b.iter(|| binomial_jacobian_order(&k, &a, &b0, exec)));
    }
    g.finish();
}

fn orders_of_places(c: &mut Criterion) {
    let mw = common::c1_mw();
    let places = good_places(&mw.nf, &mw.curve, 400, 1 << 12);
    let mut g = c.benchmark_group("place_orders");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, places.len()), |b| b.iter(|| place_orders(&mw, &places, exec).unwrap()));
    }
    g.finish();
}

fn period_table(c: &mut Criterion) {
    let fx = common::c1();
    let mut g = c.benchmark_group("build_t");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 109), |b| {
            b.iter(|| build_t(&fx.k, &fx.curve, &fx.gens, 109, 30, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(kernels, point_count, binomial_order, orders_of_places, period_table);
criterion_main!(kernels);
