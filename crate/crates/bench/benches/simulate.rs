use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use ktaxi_bench::{hst_scenario, weighted_scenario};
use ktaxi_core::dual::{build_certificate_hst, build_certificate_weighted, evaluate_dual};
use ktaxi_core::embedding::frt_embed;
use ktaxi_core::harness::random_metric;
use ktaxi_core::offline::{optimal_cost_dp, optimal_cost_flow, TreeCost, DEFAULT_BUDGET};
use ktaxi_core::run_double_coverage;

fn simulate(c: &mut Criterion) {
    let mut g = c.benchmark_group("double_coverage");
    for len in [100, 1000] {
        let s = hst_scenario(4, 4, len, 1);
        g.bench_with_input(BenchmarkId::new("hst_k4_d4", len), &s, |b, s| {
            b.iter(|| run_double_coverage(&s.tree, &s.initial, black_box(&s.requests)).unwrap())
        });
    }
    g.finish();
}

fn offline(c: &mut Criterion) {
    let mut g = c.benchmark_group("offline");
    let s = weighted_scenario(3, 20, 60, 2);
    let cost = TreeCost::full(&s.tree);
    g.bench_function("flow_k3_60", |b| b.iter(|| optimal_cost_flow(&cost, &s.initial, &s.requests, None).unwrap()));
    g.bench_function("dp_k3_60", |b| {
        b.iter(|| optimal_cost_dp(&cost, &s.initial, &s.requests, None, DEFAULT_BUDGET).unwrap())
    });
    g.finish();
}

fn certificates(c: &mut Criterion) {
    let mut g = c.benchmark_group("certificate");
    let s = hst_scenario(3, 3, 200, 3);
    let tr = run_double_coverage(&s.tree, &s.initial, &s.requests).unwrap();
    g.bench_function("monotone_build_eval", |b| {
        b.iter(|| {
            let cert = build_certificate_hst(&tr).unwrap();
            evaluate_dual(&cert, &tr).unwrap().total
        })
    });
    let s = weighted_scenario(3, 20, 200, 4);
    let tr = run_double_coverage(&s.tree, &s.initial, &s.requests).unwrap();
    let d = s.tree.base().depth().max(1) as u32;
    g.bench_function("banded_build_eval", |b| {
        b.iter(|| {
            let cert = build_certificate_weighted(&tr, d).unwrap();
            evaluate_dual(&cert, &tr).unwrap().total
        })
    });
    g.finish();
}

fn embedding(c: &mut Criterion) {
    let m = random_metric(32, 100, 5);
    c.bench_function("frt_embed_32_d3", |b| b.iter(|| frt_embed(&m, 3, black_box(7)).unwrap()));
}

criterion_group!(benches, simulate, offline, certificates, embedding);
criterion_main!(benches);
