//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Pass criterion numbers to run a subset:
//! `cargo test -p popart-cli --test acceptance -- 1 5 11`.

use std::collections::BTreeSet;
use std::time::Instant;

use popart::bandit::{run_restricted_phase_elim_with, support_recovery_length, BanditEnv};
use popart::design::{
    compatibility_constant, h_squared, solve_c_min, solve_h_star, CompatOptions, ConeConvention,
    SolverOptions,
};
use popart::estimator::{
    catoni_alpha, catoni_estimate, lasso_cd, popart, CatoniParams, PopArtConfig, SampleBatch,
};
use popart::instances::{
    canonical_basis_actions, hard_instance_actions, spanning_unit_sphere_actions, theta_generator,
    ThetaCase,
};
use popart::linalg::l1_norm;
use popart::{Matrix, Vector};
use popart_cli::config::{ExperimentConfig, Settings};
use popart_cli::experiment::{Metric, Outcome};
use popart_cli::{compute, run_experiment, summarize, Mode};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

const DELTA: f64 = 0.05;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn settings(pairs: &[(&str, &str)]) -> Settings {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn preset_outcome(pairs: &[(&str, &str)]) -> Outcome {
    let cfg = ExperimentConfig::resolve(None, &settings(pairs)).expect("valid preset config");
    compute(&cfg).expect("experiment runs")
}

/// Mean of the finite values of one metric per `n`, in increasing `n`.
fn means(outcome: &Outcome, algorithm: &str, metric: Metric) -> Vec<(usize, f64)> {
    let mut pts: Vec<(usize, f64)> = summarize(&outcome.rows)
        .into_iter()
        .filter(|s| s.algorithm == algorithm && s.metric == metric)
        .map(|s| (s.n, s.mean))
        .collect();
    pts.sort_by_key(|p| p.0);
    pts
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_log_slope(points: &[(usize, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn hard_instance_h_star(d: usize) -> f64 {
    let d = d as f64;
    d * (d.sqrt() + (d - 1.0).sqrt()).powi(2)
}

fn c1_h_star_closed_form() -> Verdict {
    let start = Instant::now();
    let sol = solve_h_star(
        &hard_instance_actions(10).unwrap(),
        &SolverOptions::default(),
    )
    .unwrap();
    let secs = start.elapsed().as_secs_f64();
    let expect = hard_instance_h_star(10);
    let r = rel(sol.objective, expect);
    verdict(
        r <= 0.02 && secs < 10.0,
        format!(
            "H*^2 = {:.4} vs {expect:.4} (rel {r:.2e}), {secs:.2} s",
            sol.objective
        ),
    )
}

fn c2_c_min_bracket() -> Verdict {
    // golden-section minimum of f(b) on (0, 1/(d-1))
    let d = 10.0;
    let f = |b: f64| d * (1.0 + (d * d - 2.0 * d + 2.0) * b) / (2.0 * b * (1.0 - (d - 1.0) * b));
    let (mut lo, mut hi) = (1e-12, 1.0 / (d - 1.0) - 1e-12);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let (a, b) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let m = f(0.5 * (lo + hi));
    let sol = solve_c_min(
        &hard_instance_actions(10).unwrap(),
        &SolverOptions::default(),
    )
    .unwrap();
    let inv = 1.0 / sol.objective;
    verdict(
        inv >= m && inv <= 2.0 * m,
        format!("1/C_min = {inv:.3} in [{m:.3}, {:.3}]", 2.0 * m),
    )
}

fn c3_basis_exactness() -> Verdict {
    let mut worst: f64 = 0.0;
    for d in [3, 5, 10] {
        let a = canonical_basis_actions(d).unwrap();
        let h = solve_h_star(&a, &SolverOptions::default())
            .unwrap()
            .objective;
        let c = solve_c_min(&a, &SolverOptions::default())
            .unwrap()
            .objective;
        worst = worst.max(rel(h, d as f64)).max(rel(c, 1.0 / d as f64));
    }
    verdict(worst <= 1e-6, format!("worst relative error {worst:.2e}"))
}

fn c4_sandwich() -> Verdict {
    let mut failures = Vec::new();
    for i in 0..20u64 {
        let d = 3 + (i as usize % 13);
        let (arms, _) = spanning_unit_sphere_actions(d, 3 * d, 1000 + i).unwrap();
        let h = solve_h_star(&arms, &SolverOptions::default())
            .unwrap()
            .objective;
        let c = solve_c_min(&arms, &SolverOptions::default())
            .unwrap()
            .objective;
        if !(h <= (1.0 + 1e-3) / c && 1.0 / c <= (1.0 + 1e-3) * d as f64 * h) {
            failures.push(format!(
                "set {i} (d = {d}): H^2 = {h}, 1/C_min = {}",
                1.0 / c
            ));
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            "20 of 20 sets satisfy both sides".into()
        } else {
            failures.join("; ")
        },
    )
}

fn c5_catoni_coverage() -> Verdict {
    let start = Instant::now();
    let (n, trials) = (2000, 1000);
    let l = (1.0 / DELTA).ln();
    let bound = (2.0 * l / (n as f64 - l)).sqrt();
    let params = CatoniParams::new(catoni_alpha(n, 1.0, DELTA).unwrap(), DELTA).unwrap();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
    let mut violations = 0;
    let mut z = vec![0.0; n];
    for _ in 0..trials {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        if catoni_estimate(&z, &params).unwrap().abs() >= bound {
            violations += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let rate = violations as f64 / trials as f64;
    let allowed = 2.0 * DELTA + 3.0 * (2.0 * DELTA / trials as f64).sqrt();
    verdict(
        rate <= allowed && secs < 30.0,
        format!("violation rate {rate:.3} (allowed {allowed:.3}), {secs:.1} s"),
    )
}

fn c6_popart_support_and_l1() -> Verdict {
    let (d, s, sigma, n, r0) = (10, 2, 0.1, 10_000, 2.0);
    let arms = hard_instance_actions(d).unwrap();
    let sol = solve_h_star(&arms, &SolverOptions::default()).unwrap();
    let h2 = h_squared(&sol.cov);
    let l = (2.0 * d as f64 / DELTA).ln();
    let bound = 2.0 * s as f64 * (4.0 * (r0 * r0 + sigma * sigma) * h2 * l / n as f64).sqrt();
    let cfg = PopArtConfig::cold(d, sigma, DELTA, r0).unwrap();
    let (mut contained, mut within) = (0, 0);
    for seed in 0..100 {
        let theta = theta_generator(ThetaCase::Case1L1, d, seed).unwrap();
        let env = BanditEnv::new(arms.clone(), theta.clone(), sigma, seed).unwrap();
        let est = popart(&env.draw_batch(&sol.design, n, 0).unwrap(), &sol.cov, &cfg).unwrap();
        if est.support.iter().all(|&i| theta[i] != 0.0) {
            contained += 1;
        }
        if l1_norm(&(&est.theta_hat - &theta)) <= bound {
            within += 1;
        }
    }
    verdict(
        contained >= 95 && within >= 95,
        format!("support contained {contained}/100, l1 within {bound:.3} {within}/100"),
    )
}

fn c7_l1_slopes(case1: &Outcome, case2: &Outcome) -> Verdict {
    let s1 = log_log_slope(&means(case1, "popart", Metric::L1Error));
    let s2 = log_log_slope(&means(case2, "popart", Metric::L1Error));
    let ok = |s: f64| (-0.65..=-0.35).contains(&s);
    verdict(
        ok(s1) && ok(s2),
        format!(
            "slope case 1 {s1:.3} ({}), case 2 {s2:.3} ({}), band [-0.65, -0.35]",
            if ok(s1) { "in" } else { "out" },
            if ok(s2) { "in" } else { "out" }
        ),
    )
}

fn c8_popart_beats_c_min_lasso(case1: &Outcome) -> Verdict {
    let at = |alg| {
        means(case1, alg, Metric::L1Error)
            .into_iter()
            .find(|p| p.0 == 10_000)
            .unwrap()
            .1
    };
    let (p, l) = (at("popart"), at("c_min-lasso"));
    verdict(
        p < l,
        format!("mean l1 at n = 10000: popart {p:.4}, c_min-lasso {l:.4}"),
    )
}

fn c9_bandit_comparison() -> Verdict {
    let start = Instant::now();
    let out = preset_outcome(&[("preset", "case2-bandit"), ("reps", "10")]);
    let secs = start.elapsed().as_secs_f64();
    let n = 10_000;
    let at = |alg, t| {
        means(&out, alg, Metric::CumRegret)
            .into_iter()
            .find(|p| p.0 == t)
            .map(|p| p.1)
            .unwrap()
    };
    let (etc, estc) = (at("etc-popart", n), at("estc", n));
    // per-rep ratios, averaged over reps
    let ratio = |t: usize| {
        let v: Vec<f64> = out
            .rows
            .iter()
            .filter(|r| r.algorithm == "etc-popart" && r.metric == Metric::CumRegret && r.n == t)
            .map(|r| r.value / t as f64)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (full, half) = (ratio(n), ratio(n / 2));
    verdict(
        etc < estc && full < half && secs < 300.0,
        format!(
            "regret etc-popart {etc:.1} vs estc {estc:.1}; regret/t {full:.4} at n vs {half:.4} at n/2; {secs:.0} s"
        ),
    )
}

fn c10_min_signal_support_recovery() -> Verdict {
    let (d, s, sigma, m) = (10, 2, 0.1, 1.0);
    let arms = hard_instance_actions(d).unwrap();
    let sol = solve_h_star(&arms, &SolverOptions::default()).unwrap();
    let mut recovered = 0;
    let mut n_used = 0;
    let start = Instant::now();
    for seed in 0..100u64 {
        let theta = theta_generator(ThetaCase::Case1Bandit, d, seed).unwrap();
        let env = BanditEnv::new(arms.clone(), theta, sigma, seed).unwrap();
        let r_max = env.default_r_max();
        let n2 = support_recovery_length(s, sigma, h_squared(&sol.cov), m, d, DELTA, r_max);
        n_used = n2 + 1000;
        let rep = run_restricted_phase_elim_with(&env, &sol, n_used, DELTA, r_max, s, m).unwrap();
        if rep.recovered_support.as_deref() == Some(&env.support()[..]) {
            recovered += 1;
        }
        if seed % 10 == 9 {
            eprintln!(
                "  criterion 10: {} runs, {:.0} s",
                seed + 1,
                start.elapsed().as_secs_f64()
            );
        }
    }
    verdict(
        recovered >= 95,
        format!("exact support {recovered}/100 at n = {n_used}"),
    )
}

/// Proximal gradient with Nesterov momentum on the same objective.
fn fista(x: &Matrix, r: &Vector, lambda: f64) -> Vector {
    let n = x.nrows() as f64;
    let g = x.transpose() * x / n;
    let c = x.transpose() * r / n;
    let step = 1.0 / g.clone().symmetric_eigen().eigenvalues.max();
    let mut theta = Vector::zeros(x.ncols());
    let mut y = theta.clone();
    let mut t = 1.0f64;
    for _ in 0..200_000 {
        let grad = &g * &y - &c;
        let z = &y - grad * step;
        let next = z.map(|v| v.signum() * (v.abs() - step * lambda).max(0.0));
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = &next + (&next - &theta) * ((t - 1.0) / t_next);
        let moved = (&next - &theta).amax();
        theta = next;
        t = t_next;
        if moved < 1e-15 {
            break;
        }
    }
    theta
}

fn objective(x: &Matrix, r: &Vector, theta: &Vector, lambda: f64) -> f64 {
    let res = r - x * theta;
    res.norm_squared() / (2.0 * x.nrows() as f64)
        + lambda * theta.iter().map(|v| v.abs()).sum::<f64>()
}

fn c11_oracle_equivalences() -> Verdict {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let (n, d) = (30 + 3 * i, 5 + i);
        let x = Matrix::from_fn(n, d, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
        let mut theta = Vector::zeros(d);
        theta[i % d] = 1.0;
        theta[(i + 3) % d] = -0.5;
        let noise = Vector::from_fn(n, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
        let r = &x * &theta + noise * 0.5;
        let lambda = 0.5 * (2.0 * (2.0 * d as f64 / DELTA).ln() / n as f64).sqrt();
        let batch = SampleBatch::dense(x.clone(), r.iter().copied().collect()).unwrap();
        let fit = lasso_cd(&batch, lambda, 1e-12, 1_000_000).unwrap();
        let oracle = fista(&x, &r, lambda);
        let gap = (objective(&x, &r, &fit.coef, lambda) - objective(&x, &r, &oracle, lambda)).abs();
        worst = worst.max(gap);
    }
    let mut phi_err: f64 = 0.0;
    for (d, s) in [(4, 1), (6, 2), (8, 3)] {
        let phi = compatibility_constant(
            &Matrix::identity(d, d),
            s,
            ConeConvention::Standard,
            &CompatOptions::default(),
        )
        .unwrap();
        phi_err = phi_err.max((phi - 1.0).abs());
    }
    verdict(
        worst <= 1e-6 && phi_err <= 1e-3,
        format!("worst lasso objective gap {worst:.2e}; |phi^2(I) - 1| <= {phi_err:.2e}"),
    )
}

fn c12_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let actions = dir.path().join("actions.txt");
    let theta = dir.path().join("theta.txt");
    popart_cli::matrix_io::write_matrix(&actions, hard_instance_actions(4).unwrap().arms())
        .unwrap();
    std::fs::write(&theta, "4 1\n1\n0\n0.5\n0\n").unwrap();
    let (a, t) = (actions.to_str().unwrap(), theta.to_str().unwrap());
    let runs: Vec<(Option<Mode>, Vec<(&str, &str)>)> = vec![
        (None, vec![("preset", "case1-l1"), ("reps", "3")]),
        (
            None,
            vec![
                ("preset", "case2-l1"),
                ("reps", "2"),
                ("n_grid", "1000,3000"),
            ],
        ),
        (
            None,
            vec![("preset", "case1-bandit"), ("reps", "2"), ("scale", "40")],
        ),
        (None, vec![("preset", "case2-bandit"), ("reps", "2")]),
        (None, vec![("preset", "design-diagnostics")]),
        (
            Some(Mode::Estimate),
            vec![
                ("preset", "custom"),
                ("actions", a),
                ("theta", t),
                ("reps", "2"),
            ],
        ),
        (
            Some(Mode::Bandit),
            vec![
                ("preset", "custom"),
                ("actions", a),
                ("theta", t),
                ("reps", "2"),
            ],
        ),
    ];
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap();
    let mut differing = Vec::new();
    for (i, (mode, pairs)) in runs.iter().enumerate() {
        let mut raw = Vec::new();
        for attempt in 0..2 {
            let mut s = settings(pairs);
            let out = dir.path().join(format!("run{i}_{attempt}"));
            s.push(("out".into(), out.to_str().unwrap().into()));
            let cfg = ExperimentConfig::resolve(*mode, &s).unwrap();
            // the second run uses a different thread count
            let files = if attempt == 0 {
                run_experiment(&cfg).unwrap().1
            } else {
                pool.install(|| run_experiment(&cfg)).unwrap().1
            };
            raw.push(std::fs::read(files.raw).unwrap());
        }
        if raw[0] != raw[1] || raw[0].is_empty() {
            differing.push(pairs[0].1.to_string());
        }
    }
    verdict(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} configurations reproduced byte for byte", runs.len())
        } else {
            format!("raw rows differ for {}", differing.join(", "))
        },
    )
}

fn main() {
    let selected: BTreeSet<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let wanted = |k: usize| selected.is_empty() || selected.contains(&k);

    let mut l1_case1: Option<Outcome> = None;
    let mut failed = Vec::new();
    let mut report = |k: usize, name: &str, f: &mut dyn FnMut() -> Verdict| {
        if !wanted(k) {
            return;
        }
        let start = Instant::now();
        let v = f();
        println!(
            "criterion {k:>2} {} {name}: {} [{:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(k);
        }
    };

    report(1, "hard-instance H*^2", &mut c1_h_star_closed_form);
    report(2, "hard-instance C_min bracket", &mut c2_c_min_bracket);
    report(3, "basis-set exactness", &mut c3_basis_exactness);
    report(4, "H^2 / C_min sandwich", &mut c4_sandwich);
    report(5, "Catoni coverage", &mut c5_catoni_coverage);
    report(
        6,
        "popart support and l1 bound",
        &mut c6_popart_support_and_l1,
    );
    if wanted(7) || wanted(8) {
        l1_case1 = Some(preset_outcome(&[("preset", "case1-l1")]));
    }
    report(7, "l1 convergence slope", &mut || {
        let case2 = preset_outcome(&[("preset", "case2-l1")]);
        c7_l1_slopes(l1_case1.as_ref().unwrap(), &case2)
    });
    report(8, "popart vs C_min-Lasso", &mut || {
        c8_popart_beats_c_min_lasso(l1_case1.as_ref().unwrap())
    });
    report(9, "bandit comparison", &mut c9_bandit_comparison);
    report(
        10,
        "min-signal support recovery",
        &mut c10_min_signal_support_recovery,
    );
    report(11, "oracle equivalences", &mut c11_oracle_equivalences);
    report(12, "determinism", &mut c12_determinism);

    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
