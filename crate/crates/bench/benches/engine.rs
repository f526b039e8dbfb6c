use criterion::{criterion_group, criterion_main, Criterion};
use pivotmodel_bench::{hundred_by_ten, lighting, million};
use std::hint::black_box;

fn recalc(c: &mut Criterion) {
    let mut small = lighting();
    c.bench_function("recalc lighting 12600 cells", |b| b.iter(|| black_box(small.calculate())));

    let mut big = million();
    let mut group = c.benchmark_group("large");
    group.sample_size(10);
    group.bench_function("recalc 1e6 cells", |b| b.iter(|| black_box(big.calculate())));
    group.finish();
}

fn view(c: &mut Criterion) {
    let big = million();
    let spec = hundred_by_ten();
    c.bench_function("view 100x10 on 1e6 cells", |b| b.iter(|| black_box(big.view(&spec).unwrap())));

    let small = lighting();
    let summary = pivotmodel::view::ViewSpec::default()
        .page("TIME", "Qtr1")
        .page("ORG", "Total Company")
        .page("PRODUCT", "Total Products")
        .rows(&["ACCTS"])
        .cols(&["SCENARIO"]);
    c.bench_function("view lighting summary", |b| b.iter(|| black_box(small.view(&summary).unwrap())));
}

fn trace(c: &mut Criterion) {
    let small = lighting();
    let cell = small
        .address("ACCTS=Net sales,TIME=Year,ORG=Total Company,PRODUCT=Total Products,SCENARIO=%Var")
        .unwrap();
    c.bench_function("trace one level", |b| b.iter(|| black_box(small.trace(&cell, None).unwrap())));
    c.bench_function("audit lighting", |b| b.iter(|| black_box(small.audit())));
}

criterion_group!(benches, recalc, view, trace);
criterion_main!(benches);
