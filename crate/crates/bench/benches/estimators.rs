use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use popart::bandit::BanditEnv;
use popart::design::{solve_h_star, SolverOptions};
use popart::estimator::{
    catoni_estimate, lasso_cd, popart, warm_popart, CatoniParams, PenaltyRule, PopArtConfig,
};
use popart::instances::{hard_instance_actions, theta_generator, ThetaCase};

fn catoni(c: &mut Criterion) {
    let mut group = c.benchmark_group("catoni");
    for n in [1_000, 10_000] {
        let samples: Vec<f64> = (0..n)
            .map(|i| ((i * 7919) % 1000) as f64 / 500.0 - 1.0)
            .collect();
        let params = CatoniParams::tuned(n, 1.0, 0.05).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &samples, |b, s| {
            b.iter(|| catoni_estimate(black_box(s), &params).unwrap())
        });
    }
    group.finish();
}

fn sparse_estimators(c: &mut Criterion) {
    let (d, sigma, delta, n) = (10, 0.1, 0.05, 5_000);
    let arms = hard_instance_actions(d).unwrap();
    let sol = solve_h_star(&arms, &SolverOptions::default()).unwrap();
    let theta = theta_generator(ThetaCase::Case1L1, d, 0).unwrap();
    let env = BanditEnv::new(arms, theta, sigma, 0).unwrap();
    let batch = env.draw_batch(&sol.design, n, 0).unwrap();
    let r_max = env.default_r_max();

    let cold = PopArtConfig::cold(d, sigma, delta, r_max).unwrap();
    c.bench_function("popart d=10 n=5000", |b| {
        b.iter(|| popart(black_box(&batch), &sol.cov, &cold).unwrap())
    });
    c.bench_function("warm_popart d=10 n=5000", |b| {
        b.iter(|| warm_popart(black_box(&batch), &sol.cov, r_max, sigma, delta).unwrap())
    });
    let lambda = PenaltyRule::default().lambda(n, d, sigma, delta);
    c.bench_function("lasso_cd d=10 n=5000", |b| {
        b.iter(|| lasso_cd(black_box(&batch), lambda, 1e-8, 10_000).unwrap())
    });
}

criterion_group!(benches, catoni, sparse_estimators);
criterion_main!(benches);
