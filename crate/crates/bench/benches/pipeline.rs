use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use quarkflow::flow::{build_network, solve_mcnf};
use quarkflow::frontend::{gen_euler3d_rk4, parse, trace, HEAT3D_MIDPOINT_SOURCE};
use quarkflow::model::build_model;
use quarkflow::oracle::{brute_force_optimum, OracleLimits};
use quarkflow::pipeline::solve_and_decompose;
use quarkflow_bench::{random_suite, stencils};

fn bench_decompose(c: &mut Criterion) {
    let mut group = c.benchmark_group("decompose");
    for (name, g) in stencils() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &g, |b, g| {
            b.iter(|| solve_and_decompose(black_box(g), 1).unwrap())
        });
    }
    group.finish();
}

fn bench_simplex(c: &mut Criterion) {
    let mut group = c.benchmark_group("network_simplex");
    for (name, g) in stencils() {
        let net = build_network(&build_model(&g, 1).unwrap());
        group.bench_with_input(BenchmarkId::from_parameter(name), &net, |b, net| {
            b.iter(|| solve_mcnf(black_box(net)).unwrap())
        });
    }
    group.finish();
}

fn bench_frontend(c: &mut Criterion) {
    c.bench_function("trace/heat3d_dsl", |b| b.iter(|| trace(&parse(black_box(HEAT3D_MIDPOINT_SOURCE)).unwrap())));
    c.bench_function("trace/euler3d", |b| b.iter(gen_euler3d_rk4));
}

fn bench_oracle(c: &mut Criterion) {
    let graphs = random_suite(20);
    c.bench_function("oracle/suite_20", |b| {
        b.iter(|| {
            for g in &graphs {
                black_box(brute_force_optimum(g, 1, OracleLimits::default()).unwrap());
            }
        })
    });
}

criterion_group!(benches, bench_decompose, bench_simplex, bench_frontend, bench_oracle);
criterion_main!(benches);
