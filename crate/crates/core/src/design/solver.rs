//! Entropic mirror descent over the probability simplex for the two design
//! criteria: minimising `H^2(Q(mu))` and maximising `lambda_min(Q(mu))`.

use rand::SeedableRng;
use rand_distr::{Distribution, Exp1};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::design::criteria::{h_squared, lambda_min, population_covariance, second_moment};
use crate::design::types::{ActionSet, Design, DesignSolution};
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};

/// Number of random restarts on top of the uniform start.
pub const RANDOM_RESTARTS: usize = 5;
/// Weights below this are zeroed after convergence.
pub const PRUNE_BELOW: f64 = 1e-10;
/// Window used for the stall test and the reported gap.
pub const GAP_WINDOW: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative improvement tolerance for the stall test.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 4000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Criterion {
    /// minimise max_i (Q^{-1})_ii
    HSquared,
    /// maximise lambda_min(Q)
    MinEigen,
}

impl Criterion {
    /// Objective in "smaller is better" form together with the gradient of
    /// that form with respect to the weights.
    fn loss_and_grad(self, actions: &ActionSet, weights: &Vector) -> Option<(f64, Vector)> {
        let d = actions.dim();
        let mut q = second_moment(actions, weights);
        let ridge = 1e-12 * q.trace() / d as f64;
        for i in 0..d {
            q[(i, i)] += ridge;
        }
        let arms = actions.arms();
        match self {
            Criterion::HSquared => {
                let q_inv = linalg::spd_inverse(&q).ok()?;
                let mut i_star = 0;
                for i in 1..d {
                    if q_inv[(i, i)] > q_inv[(i_star, i_star)] {
                        i_star = i;
                    }
                }
                let col = q_inv.column(i_star);
                let proj = arms * col;
                Some((q_inv[(i_star, i_star)], proj.map(|p| -p * p)))
            }
            Criterion::MinEigen => {
                let (lmin, v) = linalg::min_eigen(&q);
                let proj = arms * v;
                Some((-lmin, proj.map(|p| -p * p)))
            }
        }
    }

    fn exact_objective(
        self,
        actions: &ActionSet,
        design: &Design,
    ) -> Result<(f64, crate::design::CovMatrix)> {
        let cov = population_covariance(actions, design)?;
        let obj = match self {
            Criterion::HSquared => h_squared(&cov),
            Criterion::MinEigen => lambda_min(&cov),
        };
        Ok((obj, cov))
    }

    fn not_spanning(self, d: usize) -> Error {
        match self {
            Criterion::HSquared => Error::InfiniteHSquared(d),
            Criterion::MinEigen => Error::ZeroCMin(d),
        }
    }
}

struct RunOutcome {
    weights: Vector,
    loss: f64,
    iterations: usize,
    gap: f64,
}

fn mirror_descent(
    criterion: Criterion,
    actions: &ActionSet,
    start: Vector,
    opts: &SolverOptions,
) -> RunOutcome {
    let mut w = start;
    let mut best_w = w.clone();
    let mut best_loss = f64::INFINITY;
    // best loss after every iteration, for the stall window
    let mut history: Vec<f64> = Vec::with_capacity(opts.max_iter.min(1 << 16));
    let mut iterations = 0;
    for t in 1..=opts.max_iter {
        iterations = t;
        let Some((loss, grad)) = criterion.loss_and_grad(actions, &w) else {
            break;
        };
        if loss < best_loss {
            best_loss = loss;
            best_w.copy_from(&w);
        }
        history.push(best_loss);
        // Subgradient steps can sit on a plateau for a while; only stop once
        // the second half of the run has stopped paying.
        if t >= 4 * GAP_WINDOW && t % GAP_WINDOW == 0 {
            let old = history[t / 2];
            if (old - best_loss).abs() <= opts.tol * best_loss.abs() {
                break;
            }
        }
        let scale = grad.amax();
        if !(scale > 0.0) {
            break;
        }
        let eta = 1.0 / (t as f64).sqrt() / scale;
        let shift = grad.min();
        let mut total = 0.0;
        for k in 0..w.len() {
            w[k] *= (-eta * (grad[k] - shift)).exp();
            total += w[k];
        }
        w /= total;
    }
    let gap = if history.len() > GAP_WINDOW {
        let old = history[history.len() - 1 - GAP_WINDOW];
        ((old - best_loss) / best_loss.abs().max(f64::MIN_POSITIVE)).abs()
    } else {
        f64::INFINITY
    };
    RunOutcome {
        weights: best_w,
        loss: best_loss,
        iterations,
        gap,
    }
}

fn prune(weights: &Vector) -> Vector {
    let mut w = weights.map(|x| if x < PRUNE_BELOW { 0.0 } else { x });
    let total = w.sum();
    w /= total;
    w
}

fn random_simplex_point(k: usize, rng: &mut Xoshiro256PlusPlus) -> Vector {
    // Dirichlet(1, ..., 1) as normalised exponentials.
    let v = Vector::from_fn(k, |_, _| {
        let e: f64 = Exp1.sample(rng);
        e + 1e-12
    });
    let total = v.sum();
    v / total
}

fn solve(
    criterion: Criterion,
    actions: &ActionSet,
    opts: &SolverOptions,
) -> Result<DesignSolution> {
    if opts.max_iter == 0 || !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(
            "solver needs tol > 0 and max_iter >= 1".into(),
        ));
    }
    let d = actions.dim();
    if !actions.spans() {
        return Err(criterion.not_spanning(d));
    }
    let mut warnings = Vec::new();
    if actions.exceeds_unit_box() {
        warnings.push("some arm has an entry outside [-1, 1]".to_string());
    }
    let k = actions.num_arms();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(opts.seed);
    let mut starts = vec![Vector::from_element(k, 1.0 / k as f64)];
    for _ in 0..RANDOM_RESTARTS {
        starts.push(random_simplex_point(k, &mut rng));
    }

    let mut best: Option<(f64, Design, crate::design::CovMatrix, usize, f64)> = None;
    for start in starts {
        let run = mirror_descent(criterion, actions, start, opts);
        let mut candidates = vec![prune(&run.weights)];
        if run.loss.is_finite() {
            candidates.push(run.weights.clone());
        }
        for cand in candidates {
            let Ok(design) = Design::normalized(cand) else {
                continue;
            };
            let Ok((obj, cov)) = criterion.exact_objective(actions, &design) else {
                continue;
            };
            let loss = match criterion {
                Criterion::HSquared => obj,
                Criterion::MinEigen => -obj,
            };
            // strict improvement keeps the lowest restart index on ties
            if best.as_ref().is_none_or(|b| loss < b.0) {
                best = Some((loss, design, cov, run.iterations, run.gap));
            }
        }
    }
    let (loss, design, cov, iterations, gap) = best.ok_or_else(|| criterion.not_spanning(d))?;
    let objective = match criterion {
        Criterion::HSquared => loss,
        Criterion::MinEigen => -loss,
    };
    Ok(DesignSolution {
        design,
        cov,
        objective,
        iterations,
        certified_gap: gap,
        warnings,
    })
}

/// Approximately minimise `H^2(Q(mu))` over designs on `actions`.
pub fn solve_h_star(actions: &ActionSet, opts: &SolverOptions) -> Result<DesignSolution> {
    solve(Criterion::HSquared, actions, opts)
}

/// Approximately maximise `lambda_min(Q(mu))` over designs on `actions`.
pub fn solve_c_min(actions: &ActionSet, opts: &SolverOptions) -> Result<DesignSolution> {
    solve(Criterion::MinEigen, actions, opts)
}
