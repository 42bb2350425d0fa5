use std::time::Instant;

use popart::design::{
    compatibility_constant, h_squared, lambda_min, population_covariance, solve_c_min,
    solve_h_star, CompatOptions, ConeConvention, SolverOptions,
};
use popart::instances::{
    canonical_basis_actions, hard_instance_actions, spanning_unit_sphere_actions,
};
use popart::{ActionSet, Design, Matrix, Vector};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `d (sqrt(d) + sqrt(d - 1))^2`
fn hard_instance_h_star(d: usize) -> f64 {
    let d = d as f64;
    d * (d.sqrt() + (d - 1.0).sqrt()).powi(2)
}

/// Golden-section minimum of the closed-form `1/lambda_min` proxy on `(0, 1/(d-1))`.
fn min_f(d: usize) -> f64 {
    let df = d as f64;
    let f =
        |b: f64| df * (1.0 + (df * df - 2.0 * df + 2.0) * b) / (2.0 * b * (1.0 - (df - 1.0) * b));
    let (mut lo, mut hi) = (1e-12, 1.0 / (df - 1.0) - 1e-12);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + hi))
}

#[test]
fn basis_sets_are_exact() {
    for d in [3, 5, 10] {
        let a = canonical_basis_actions(d).unwrap();
        let h = solve_h_star(&a, &SolverOptions::default()).unwrap();
        let c = solve_c_min(&a, &SolverOptions::default()).unwrap();
        assert!(
            rel(h.objective, d as f64) < 1e-6,
            "d = {d}: H^2 = {}",
            h.objective
        );
        assert!(
            rel(c.objective, 1.0 / d as f64) < 1e-6,
            "d = {d}: C_min = {}",
            c.objective
        );
    }
}

#[test]
fn hard_instance_h_star_matches_closed_form() {
    for d in [4, 10] {
        let start = Instant::now();
        let sol = solve_h_star(
            &hard_instance_actions(d).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(start.elapsed().as_secs_f64() < 10.0);
        assert!(
            rel(sol.objective, hard_instance_h_star(d)) < 0.02,
            "d = {d}: {}",
            sol.objective
        );
        assert!(sol.certified_gap >= 0.0);
    }
}

#[test]
fn closed_form_weights_attain_the_value() {
    let d = 10usize;
    let df = d as f64;
    let a = df - (df * (df - 1.0)).sqrt();
    let b = 1.0 / ((df - 1.0).sqrt() * (df.sqrt() + (df - 1.0).sqrt()));
    let mut w = vec![b; d];
    w[0] = a;
    let design = Design::normalized(Vector::from_vec(w)).unwrap();
    let cov = population_covariance(&hard_instance_actions(d).unwrap(), &design).unwrap();
    assert!(rel(h_squared(&cov), hard_instance_h_star(d)) < 1e-8);
}

#[test]
fn hard_instance_c_min_in_bracket() {
    let sol = solve_c_min(
        &hard_instance_actions(10).unwrap(),
        &SolverOptions::default(),
    )
    .unwrap();
    let inv = 1.0 / sol.objective;
    let m = min_f(10);
    assert!(
        inv >= m && inv <= 2.0 * m,
        "1/C_min = {inv}, bracket [{m}, {}]",
        2.0 * m
    );
}

#[test]
fn solution_objective_matches_its_covariance() {
    let (arms, _) = spanning_unit_sphere_actions(6, 18, 4).unwrap();
    let h = solve_h_star(&arms, &SolverOptions::default()).unwrap();
    assert!((h.objective - h_squared(&h.cov)).abs() <= 1e-8 * h.objective);
    let c = solve_c_min(&arms, &SolverOptions::default()).unwrap();
    assert!((c.objective - lambda_min(&c.cov)).abs() <= 1e-8);
    let prod = h.cov.q() * h.cov.q_inv();
    assert!((prod - Matrix::identity(6, 6)).norm() < 1e-8);
    let total: f64 = h.design.weights().sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn duplicated_arms_leave_optimum_unchanged() {
    let (arms, _) = spanning_unit_sphere_actions(5, 10, 1).unwrap();
    let doubled = ActionSet::new(Matrix::from_fn(20, 5, |r, c| arms.arms()[(r % 10, c)])).unwrap();
    let opts = SolverOptions {
        max_iter: 20_000,
        ..Default::default()
    };
    let a = solve_h_star(&arms, &opts).unwrap().objective;
    let b = solve_h_star(&doubled, &opts).unwrap().objective;
    assert!(rel(a, b) < 2e-3, "{a} vs {b}");
}

#[test]
fn permuted_coordinates_leave_c_min_unchanged() {
    let (arms, _) = spanning_unit_sphere_actions(5, 12, 2).unwrap();
    let perm = [3, 0, 4, 1, 2];
    let permuted =
        ActionSet::new(Matrix::from_fn(12, 5, |r, c| arms.arms()[(r, perm[c])])).unwrap();
    let opts = SolverOptions {
        max_iter: 20_000,
        ..Default::default()
    };
    let a = solve_c_min(&arms, &opts).unwrap().objective;
    let b = solve_c_min(&permuted, &opts).unwrap().objective;
    assert!(rel(a, b) < 2e-3, "{a} vs {b}");
}

#[test]
fn scaling_arms_scales_both_criteria() {
    let (arms, _) = spanning_unit_sphere_actions(4, 12, 3).unwrap();
    let scaled = arms.scaled(2.0);
    let opts = SolverOptions::default();
    let h1 = solve_h_star(&arms, &opts).unwrap().objective;
    let h2 = solve_h_star(&scaled, &opts).unwrap().objective;
    assert!(rel(h2, h1 / 4.0) < 2e-3);
    let c1 = solve_c_min(&arms, &opts).unwrap().objective;
    let c2 = solve_c_min(&scaled, &opts).unwrap().objective;
    assert!(rel(c2, 4.0 * c1) < 2e-3);
}

#[test]
fn sandwich_on_random_sets() {
    for seed in 0..5 {
        let d = 3 + seed as usize;
        let (arms, _) = spanning_unit_sphere_actions(d, 3 * d, seed).unwrap();
        let h = solve_h_star(&arms, &SolverOptions::default())
            .unwrap()
            .objective;
        let c = solve_c_min(&arms, &SolverOptions::default())
            .unwrap()
            .objective;
        assert!(h <= (1.0 + 1e-3) / c, "seed {seed}: {h} vs {}", 1.0 / c);
        assert!(1.0 / c <= (1.0 + 1e-3) * d as f64 * h);
    }
}

#[test]
fn rank_deficient_sets_are_rejected() {
    let arms = ActionSet::new(Matrix::from_row_slice(
        3,
        3,
        &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0],
    ))
    .unwrap();
    assert!(solve_h_star(&arms, &SolverOptions::default()).is_err());
    assert!(solve_c_min(&arms, &SolverOptions::default()).is_err());
}

#[test]
fn out_of_box_arms_warn() {
    let arms = ActionSet::new(Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0])).unwrap();
    let sol = solve_h_star(&arms, &SolverOptions::default()).unwrap();
    assert!(!sol.warnings.is_empty());
}

#[test]
fn compatibility_on_hard_instance_below_diagonal_bound() {
    // phi^2 <= s * min_i Q_ii for this family
    let d = 6;
    let arms = hard_instance_actions(d).unwrap();
    let cov = population_covariance(&arms, &Design::uniform(d)).unwrap();
    let s = 2;
    let min_diag = (0..d)
        .map(|i| cov.q()[(i, i)])
        .fold(f64::INFINITY, f64::min);
    let opts = CompatOptions {
        restarts: 100,
        ..Default::default()
    };
    let phi = compatibility_constant(cov.q(), s, ConeConvention::Standard, &opts).unwrap();
    assert!(
        phi <= s as f64 * min_diag + 1e-12,
        "{phi} vs {}",
        s as f64 * min_diag
    );
    assert!(phi > 0.0);
}

fn arbitrary_design(k: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|w| {
        let v = Vector::from_vec(w);
        let s = v.sum();
        v / s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn criteria_are_convex_and_concave(w1 in arbitrary_design(12), w2 in arbitrary_design(12), t in 0.01f64..0.99) {
        let (arms, _) = spanning_unit_sphere_actions(4, 12, 9).unwrap();
        let cov = |w: &Vector| population_covariance(&arms, &Design::new(w.clone()).unwrap()).unwrap();
        let mix = &w1 * t + &w2 * (1.0 - t);
        let (c1, c2, cm) = (cov(&w1), cov(&w2), cov(&mix));
        prop_assert!(h_squared(&cm) <= t * h_squared(&c1) + (1.0 - t) * h_squared(&c2) + 1e-9);
        prop_assert!(lambda_min(&cm) >= t * lambda_min(&c1) + (1.0 - t) * lambda_min(&c2) - 1e-9);
    }

    #[test]
    fn solver_beats_random_designs(w in arbitrary_design(12)) {
        let (arms, _) = spanning_unit_sphere_actions(4, 12, 9).unwrap();
        let h = solve_h_star(&arms, &SolverOptions::default()).unwrap().objective;
        let c = solve_c_min(&arms, &SolverOptions::default()).unwrap().objective;
        let cov = population_covariance(&arms, &Design::new(w).unwrap()).unwrap();
        prop_assert!(h_squared(&cov) >= h * (1.0 - 1e-6));
        prop_assert!(lambda_min(&cov) <= c * (1.0 + 1e-6));
    }

    #[test]
    fn hard_instance_inverse_diagonal(w in arbitrary_design(7)) {
        let d = 7;
        let cov = population_covariance(&hard_instance_actions(d).unwrap(), &Design::new(w.clone()).unwrap()).unwrap();
        let df = d as f64;
        prop_assert!((cov.inv_diag(0) - df / w[0]).abs() < 1e-8 * df / w[0]);
        for i in 1..d {
            let expect = df * df / w[0] + df / w[i];
            prop_assert!((cov.inv_diag(i) - expect).abs() < 1e-8 * expect);
        }
    }
}
