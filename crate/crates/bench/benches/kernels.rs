use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kloosterman_core::bilinear::{Bilinear, Interval, Path, WeightVector};
use kloosterman_core::counting::JCounter;
use kloosterman_core::dft::{DftPlan, Sign};
use kloosterman_core::divisor::TauTable;
use kloosterman_core::expsums::{kloosterman_brute, Kloosterman, TTransform};
use kloosterman_core::modarith::factorize;
use kloosterman_core::moments::m_profile;
use num_complex::Complex64;

fn kloosterman(c: &mut Criterion) {
    let mut g = c.benchmark_group("kloosterman");
    for q in [10_007u64, 3_u64.pow(9), 2 * 3 * 5 * 7 * 11 * 13] {
        let f = factorize(q);
        let k = Kloosterman::new(&f);
        g.bench_with_input(BenchmarkId::new("fast", q), &q, |b, _| b.iter(|| k.eval(black_box(12_345), black_box(678))));
        g.bench_with_input(BenchmarkId::new("brute", q), &q, |b, _| {
            b.iter(|| kloosterman_brute(black_box(12_345), black_box(678), &f))
        });
    }
    g.finish();
}

fn transform(c: &mut Criterion) {
    let mut g = c.benchmark_group("t-transform");
    for q in [1009u64, 5 * 7 * 11 * 13] {
        let t = TTransform::for_modulus(q);
        g.bench_with_input(BenchmarkId::from_parameter(q), &q, |b, _| b.iter(|| t.eval(black_box(3), black_box(5), black_box(7))));
    }
    g.finish();
}

fn dft(c: &mut Criterion) {
    let mut g = c.benchmark_group("dft");
    for n in [4096usize, 10_007, 100_003] {
        let plan = DftPlan::new(n);
        let v: Vec<Complex64> = (0..n).map(|i| Complex64::new((i % 7) as f64, 0.0)).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let mut buf = v.clone();
                plan.process(&mut buf, Sign::Plus);
                buf
            })
        });
    }
    g.finish();
}

fn bilinear(c: &mut Criterion) {
    let mut g = c.benchmark_group("bilinear-type2");
    g.sample_size(20);
    for q in [10_007u64, 100_003] {
        let b = Bilinear::for_modulus(q);
        let m = (q as f64).sqrt() as u64;
        let alpha = WeightVector::ones(Interval::initial(m).unwrap());
        let beta = WeightVector::ones(Interval::initial(m).unwrap());
        g.bench_with_input(BenchmarkId::new("dft", q), &q, |bch, _| {
            bch.iter(|| b.type2(&alpha, &beta, 1, Path::Dft).unwrap())
        });
    }
    let q = 1009;
    let b = Bilinear::for_modulus(q);
    let alpha = WeightVector::ones(Interval::initial(30).unwrap());
    g.bench_function("direct/1009", |bch| bch.iter(|| b.type2(&alpha, &alpha, 1, Path::Direct).unwrap()));
    g.finish();
}

fn counting(c: &mut Criterion) {
    let mut g = c.benchmark_group("j-count");
    for q in [1009u64, 10_007] {
        let counter = JCounter::new(q);
        g.bench_with_input(BenchmarkId::new("single", q), &q, |b, &q| b.iter(|| counter.count(black_box(5), q / 2)));
        g.bench_with_input(BenchmarkId::new("all-k", q), &q, |b, _| b.iter(|| counter.counts_up_to(black_box(5))));
    }
    g.finish();
}

fn moments_and_divisor(c: &mut Criterion) {
    let mut g = c.benchmark_group("profiles");
    g.sample_size(20);
    g.bench_function("moment-profile/5003", |b| b.iter(|| m_profile(5003, &Interval::initial(70).unwrap()).unwrap()));
    g.bench_function("tau-table/1e6", |b| b.iter(|| TauTable::new(black_box(1_000_000)).unwrap()));
    g.finish();
}

criterion_group!(benches, kloosterman, transform, dft, bilinear, counting, moments_and_divisor);
criterion_main!(benches);
