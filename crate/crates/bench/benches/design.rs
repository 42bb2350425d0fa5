use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use popart::design::{solve_c_min, solve_h_star, SolverOptions};
use popart::instances::{hard_instance_actions, spanning_unit_sphere_actions};

fn hard_instance(c: &mut Criterion) {
    let arms = hard_instance_actions(10).unwrap();
    let opts = SolverOptions::default();
    c.bench_function("solve_h_star hard d=10", |b| {
        b.iter(|| solve_h_star(black_box(&arms), &opts).unwrap())
    });
    c.bench_function("solve_c_min hard d=10", |b| {
        b.iter(|| solve_c_min(black_box(&arms), &opts).unwrap())
    });
}

fn sphere(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_h_star sphere");
    group.sample_size(10);
    for d in [5, 10, 20] {
        let (arms, _) = spanning_unit_sphere_actions(d, 3 * d, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &arms, |b, a| {
            b.iter(|| solve_h_star(a, &SolverOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, hard_instance, sphere);
criterion_main!(benches);
