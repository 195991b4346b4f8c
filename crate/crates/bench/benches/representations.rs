use std::hint::black_box;

use coulomb_tmatrix::{
    evaluate, fock_sum, schwinger_integral, EvalOptions, Representation, SeriesOptions,
};
use coulomb_tmatrix_bench::sphere_point;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const OMEGAS: [f64; 3] = [0.1, 1.5, 3.0];

fn sums(c: &mut Criterion) {
    let opts = SeriesOptions::default();
    let mut g = c.benchmark_group("sum");
    for &w in &OMEGAS {
        g.bench_with_input(BenchmarkId::new("series", w), &w, |b, &w| {
            b.iter(|| fock_sum(black_box(0.37), black_box(w), &opts))
        });
        g.bench_with_input(BenchmarkId::new("integral", w), &w, |b, &w| {
            b.iter(|| schwinger_integral(black_box(0.37), black_box(w)))
        });
    }
    g.finish();
}

fn tmatrix(c: &mut Criterion) {
    let opts = EvalOptions::default();
    let mut g = c.benchmark_group("tmatrix");
    // gamma = 1/2 has every representation available
    for &w in &OMEGAS {
        let (state, point) = sphere_point(0.5, w).unwrap();
        for rep in Representation::ALL {
            g.bench_with_input(BenchmarkId::new(rep.name(), w), &point, |b, p| {
                b.iter(|| evaluate(rep, &state, black_box(p), &opts))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, sums, tmatrix);
criterion_main!(benches);
