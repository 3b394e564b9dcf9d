use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lmep::harvest::{assemble_global, assemble_global_phi, build_augmented};
use lmep::analysis::random_unit_field;
use lmep::expm;
use lmep_bench::{chebyshev, local, periodic};

fn bench_expm(c: &mut Criterion) {
    let mut group = c.benchmark_group("expm");
    for n in [5usize, 9, 15, 25] {
        let l = local(n, 0.05) * 0.01;
        group.bench_with_input(BenchmarkId::new("local", n), &l, |b, l| b.iter(|| expm(black_box(l)).unwrap()));
        let aug = build_augmented(&local(n, 0.05), 4).unwrap() * 0.01;
        group.bench_with_input(BenchmarkId::new("augmented", n), &aug, |b, a| {
            b.iter(|| expm(black_box(a)).unwrap())
        });
    }
    group.finish();
}

fn bench_assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assembly");
    group.sample_size(20);
    for len in [256usize, 1024] {
        let f = periodic(len, 9);
        group.bench_with_input(BenchmarkId::new("periodic", len), &f, |b, f| {
            b.iter(|| assemble_global(&f.grid, &f.stencils, &f.spec, 1e-3).unwrap())
        });
        let f = chebyshev(len, 9);
        group.bench_with_input(BenchmarkId::new("chebyshev", len), &f, |b, f| {
            b.iter(|| assemble_global(&f.grid, &f.stencils, &f.spec, 1e-6).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("chebyshev-phi", len), &f, |b, f| {
            b.iter(|| assemble_global_phi(&f.grid, &f.stencils, &f.spec, 1e-6, 4).unwrap())
        });
    }
    group.finish();
}

fn bench_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply");
    for len in [1024usize, 16384] {
        for n in [5usize, 19] {
            let f = periodic(len, n);
            let prop = assemble_global(&f.grid, &f.stencils, &f.spec, 1e-3).unwrap();
            let u = random_unit_field(len, 7);
            let mut out = vec![0.0; len];
            let id = format!("N{len}-n{n}");
            group.bench_function(BenchmarkId::new("serial", &id), |b| {
                b.iter(|| prop.apply_into(black_box(&u), &mut out).unwrap())
            });
            group.bench_function(BenchmarkId::new("parallel", &id), |b| {
                b.iter(|| prop.apply_par(black_box(&u)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_expm, bench_assembly, bench_apply);
criterion_main!(benches);
