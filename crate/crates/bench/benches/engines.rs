use criterion::{black_box, criterion_group, criterion_main, Criterion};
use roqec::oracle::DEFAULT_NODES;
use roqec::{average_fidelity, optimize_cell, quadrature_fidelity, ExperimentParams, QuadratureSpec};

fn exact(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact");
    for n in [1, 5, 10] {
        let p = ExperimentParams::new(n, 0.488, 0.22, 2.0).unwrap();
        g.bench_function(format!("average_fidelity n={n}"), |b| {
            b.iter(|| average_fidelity(black_box(&p)).unwrap())
        });
    }
    g.finish();
}

fn quadrature(c: &mut Criterion) {
    let quad = QuadratureSpec::new(DEFAULT_NODES).unwrap();
    let p = ExperimentParams::new(3, 0.5, 0.2, 1.5).unwrap();
    c.bench_function("quadrature_fidelity n=3", |b| {
        b.iter(|| quadrature_fidelity(black_box(&p), &quad).unwrap())
    });
}

fn optimizer(c: &mut Criterion) {
    let mut g = c.benchmark_group("optimizer");
    g.sample_size(10);
    g.bench_function("optimize_cell n_max=10", |b| {
        b.iter(|| optimize_cell(black_box(0.22), black_box(2.0), 10).unwrap())
    });
    g.finish();
}

criterion_group!(benches, exact, quadrature, optimizer);
criterion_main!(benches);
