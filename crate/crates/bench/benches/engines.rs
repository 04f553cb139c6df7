use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ordsel_bench::fixture;
use ordsel_core::model_io::{export_lp_string, ExportApprox, LpExportOptions};
use ordsel_core::selector::{self, Approx, SelectionProblem};
use ordsel_core::{encode_labels, fit_exact, fit_pwl, fit_quad, ClassProblem, Direction, TangentSet};

fn class_fits(c: &mut Criterion) {
    let data = fixture(1, 500, 8, 2);
    let enc = encode_labels(&data, Direction::Forward);
    let features: Vec<usize> = (0..8).collect();
    let prob = ClassProblem::build(&data, &enc, 0, &features).unwrap();
    let tangents = TangentSet::default17();
    let mut group = c.benchmark_group("class_fit");
    group.bench_function("exact", |b| b.iter(|| fit_exact(black_box(&prob)).unwrap()));
    group.bench_function("quad", |b| b.iter(|| fit_quad(black_box(&prob)).unwrap()));
    group.bench_function("pwl", |b| b.iter(|| fit_pwl(black_box(&prob), &tangents).unwrap()));
    group.finish();
}

fn selection(c: &mut Criterion) {
    let mut group = c.benchmark_group("selection");
    group.sample_size(10);
    for p in [6, 8] {
        let data = fixture(2, 200, p, 2);
        let exact = SelectionProblem::new(&data, Direction::Forward, ordsel_core::Criterion::Aic, Approx::Exact).unwrap();
        group.bench_with_input(BenchmarkId::new("exhaustive", p), &exact, |b, prob| {
            b.iter(|| selector::exhaustive_select(prob).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("bnb-exact", p), &exact, |b, prob| {
            b.iter(|| selector::branch_and_bound(prob).unwrap())
        });
        let pwl = SelectionProblem::new(
            &data,
            Direction::Forward,
            ordsel_core::Criterion::Aic,
            Approx::Pwl(TangentSet::default17()),
        )
        .unwrap();
        group.bench_with_input(BenchmarkId::new("bnb-pwl", p), &pwl, |b, prob| {
            b.iter(|| selector::branch_and_bound(prob).unwrap())
        });
    }
    group.finish();
}

fn export(c: &mut Criterion) {
    let data = fixture(3, 300, 8, 3);
    let prob = SelectionProblem::new(
        &data,
        Direction::Forward,
        ordsel_core::Criterion::Aic,
        Approx::Pwl(TangentSet::default17()),
    )
    .unwrap();
    let opts = LpExportOptions::new(ExportApprox::Pwl);
    c.bench_function("export_pwl_lp", |b| b.iter(|| export_lp_string(black_box(&prob), &opts).unwrap()));
}

criterion_group!(benches, class_fits, selection, export);
criterion_main!(benches);
