use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use geu_core::data::synthetic_blobs;
use geu_core::uncertainty::{estimate_supervised, VarianceFloor};
use geu_core::{fit, mfa_graphs, solve_pencil, FitParams, KnnModel, Method, Ridge, ScatterProblem, SymmetricPencil};
use std::hint::black_box;

fn bench_solve_pencil(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_pencil");
    for dim in [10, 30, 100] {
        let x = synthetic_blobs(100, dim, 2.0, 1.0, 1).unwrap();
        let u = estimate_supervised(&x, 1.0, VarianceFloor::Auto).unwrap();
        let problem = ScatterProblem::new(&x, Method::Mfa, 5, 20).unwrap();
        let asm = problem.assemble(Some(&u)).unwrap();
        let pencil = SymmetricPencil::new(asm.a, asm.b).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(dim), &pencil, |b, p| {
            b.iter(|| solve_pencil(black_box(p), Ridge::Auto).unwrap())
        });
    }
    group.finish();
}

fn bench_mfa_graphs(c: &mut Criterion) {
    let mut group = c.benchmark_group("mfa_graphs");
    for n in [100, 300] {
        let x = synthetic_blobs(n / 2, 30, 2.0, 1.0, 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| mfa_graphs(black_box(x), 5, 20).unwrap()));
    }
    group.finish();
}

fn bench_fit(c: &mut Criterion) {
    let x = synthetic_blobs(150, 30, 2.0, 1.0, 3).unwrap();
    let u = estimate_supervised(&x, 1.0, VarianceFloor::Auto).unwrap();
    let params = FitParams { d: 4, k1: 5, k2: 20, ridge: Ridge::Auto };
    c.bench_function("fit/mfa", |b| b.iter(|| fit(black_box(&x), Method::Mfa, None, &params).unwrap()));
    c.bench_function("fit/geu_mfa", |b| b.iter(|| fit(black_box(&x), Method::Mfa, Some(&u), &params).unwrap()));
}

fn bench_knn(c: &mut Criterion) {
    let train = synthetic_blobs(250, 8, 2.0, 1.0, 4).unwrap();
    let test = synthetic_blobs(100, 8, 2.0, 1.0, 5).unwrap();
    let knn = KnnModel::new(train.features(), train.labels().to_vec(), 5).unwrap();
    c.bench_function("knn/predict_200x500", |b| b.iter(|| knn.predict(black_box(test.features())).unwrap()));
}

criterion_group!(benches, bench_solve_pencil, bench_mfa_graphs, bench_fit, bench_knn);
criterion_main!(benches);
