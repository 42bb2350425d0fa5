//! Explore-then-commit: `warm_popart` on the `H^2`-optimal design, and the
//! Lasso baseline on the `C_min`-optimal design.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::bandit::env::{BanditEnv, Recorder};
use crate::bandit::report::AlgorithmReport;
use crate::design::{solve_c_min, solve_h_star, CovMatrix, Design, DesignSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::estimator::{
    lasso_cd, log_factor, popart_for_noise, BatchView, PenaltyRule, SparseEstimate,
};
use crate::linalg::{self, Vector};

pub(crate) const TAG_ETC: u64 = 1;
pub(crate) const TAG_ESTC: u64 = 2;
pub(crate) const TAG_RESTRICTED: u64 = 3;

/// Coordinate-descent settings used by the baseline.
pub const ESTC_LASSO_TOL: f64 = 1e-8;
pub const ESTC_LASSO_MAX_ITER: usize = 10_000;

pub(crate) fn check_common(env: &BanditEnv, n: usize, delta: f64, r_max: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("horizon must be >= 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "r_max must be finite and > 0, got {r_max}"
        )));
    }
    if !env.actions().spans() {
        return Err(Error::DesignNotSpanning);
    }
    Ok(())
}

/// Explore `rounds` rounds with arms drawn i.i.d. from `design`; returns the
/// observed rewards (arm indices live in the recorder).
pub(crate) fn explore(
    rec: &mut Recorder<'_>,
    env: &BanditEnv,
    design: &Design,
    tag: u64,
    rounds: usize,
) -> Result<Vec<f64>> {
    let sampler = WeightedIndex::new(design.weights().iter().copied())
        .map_err(|e| Error::InvalidParameter(format!("design cannot be sampled: {e}")))?;
    let mut rng = env.algorithm_rng(tag);
    let mut rewards = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let arm = sampler.sample(&mut rng);
        rewards.push(rec.pull(arm));
    }
    Ok(rewards)
}

/// `warm_popart` on the exploration data, or a single cold `popart` stage
/// when the noise level is zero (the warm second stage needs `sigma > 0`).
pub(crate) fn popart_stage(
    env: &BanditEnv,
    rec: &Recorder<'_>,
    rewards: &[f64],
    cov: &CovMatrix,
    r_max: f64,
    delta: f64,
) -> Result<SparseEstimate> {
    let n0 = rewards.len();
    let batch = BatchView::from_arms(env.actions().arms(), &rec.arms_pulled[..n0], rewards)?;
    popart_for_noise(batch, cov, r_max, env.sigma(), delta)
}

pub(crate) fn greedy_arm(env: &BanditEnv, theta: &Vector) -> usize {
    linalg::argmax(env.actions().rewards(theta).iter().copied())
}

/// `4 (s^2 sigma^2 H^2 n^2 ln(2d/delta) / r_max^2)^(1/3)`, rounded and clamped
/// to `[4 ceil(ln(2d/delta)), n]`.
pub fn etc_exploration_length(
    n: usize,
    s: usize,
    sigma: f64,
    h_squared: f64,
    d: usize,
    delta: f64,
    r_max: f64,
) -> usize {
    let l = log_factor(d, delta);
    let (s, nf) = (s as f64, n as f64);
    let raw = 4.0 * (s * s * sigma * sigma * h_squared * nf * nf * l / (r_max * r_max)).cbrt();
    let lower = 4 * l.ceil() as usize;
    (raw.round() as usize).max(lower).min(n)
}

/// `(s^2 sigma^2 n^2 ln(2d/delta) / (C_min^2 r_max^2))^(1/3)`, rounded and
/// clamped to `[1, n]`.
pub fn estc_exploration_length(
    n: usize,
    s: usize,
    sigma: f64,
    c_min: f64,
    d: usize,
    delta: f64,
    r_max: f64,
) -> usize {
    let l = log_factor(d, delta);
    let (s, nf) = (s as f64, n as f64);
    let raw = (s * s * sigma * sigma * nf * nf * l / (c_min * c_min * r_max * r_max)).cbrt();
    (raw.round() as usize).clamp(1, n)
}

fn commit(rec: &mut Recorder<'_>, arm: usize, n: usize) {
    let left = n - rec.round();
    rec.repeat(arm, left);
}

pub fn run_etc_popart(
    env: &BanditEnv,
    n: usize,
    delta: f64,
    r_max: f64,
    s: usize,
) -> Result<AlgorithmReport> {
    check_common(env, n, delta, r_max)?;
    let design = solve_h_star(env.actions(), &SolverOptions::default())?;
    run_etc_popart_with(env, &design, n, delta, r_max, s)
}

/// As [`run_etc_popart`] with a precomputed `H^2` design for `env`'s arms.
pub fn run_etc_popart_with(
    env: &BanditEnv,
    design: &DesignSolution,
    n: usize,
    delta: f64,
    r_max: f64,
    s: usize,
) -> Result<AlgorithmReport> {
    check_common(env, n, delta, r_max)?;
    let h2 = crate::design::h_squared(&design.cov);
    let n0 = etc_exploration_length(n, s, env.sigma(), h2, env.dim(), delta, r_max);
    let mut rec = Recorder::new(env, n);
    let rewards = explore(&mut rec, env, &design.design, TAG_ETC, n0)?;
    let estimate = popart_stage(env, &rec, &rewards, &design.cov, r_max, delta)?;
    drop(rewards);
    let arm = greedy_arm(env, &estimate.theta_hat);
    commit(&mut rec, arm, n);
    Ok(AlgorithmReport {
        recovered_support: Some(estimate.support.clone()),
        estimate: Some(estimate),
        regret: rec.trace,
        exploration_length: n0,
        pull_counts: rec.pull_counts,
        arms_pulled: rec.arms_pulled,
        empty_support: false,
        committed_arm: Some(arm),
        warnings: design.warnings.clone(),
    })
}

pub fn run_estc_baseline(
    env: &BanditEnv,
    n: usize,
    delta: f64,
    r_max: f64,
    s: usize,
) -> Result<AlgorithmReport> {
    check_common(env, n, delta, r_max)?;
    let design = solve_c_min(env.actions(), &SolverOptions::default())?;
    run_estc_baseline_with(env, &design, n, delta, r_max, s)
}

/// As [`run_estc_baseline`] with a precomputed `C_min` design.
pub fn run_estc_baseline_with(
    env: &BanditEnv,
    design: &DesignSolution,
    n: usize,
    delta: f64,
    r_max: f64,
    s: usize,
) -> Result<AlgorithmReport> {
    check_common(env, n, delta, r_max)?;
    let c_min = crate::design::lambda_min(&design.cov);
    let d = env.dim();
    let n0 = estc_exploration_length(n, s, env.sigma(), c_min, d, delta, r_max);
    let mut rec = Recorder::new(env, n);
    let rewards = explore(&mut rec, env, &design.design, TAG_ESTC, n0)?;
    let batch = BatchView::from_arms(env.actions().arms(), &rec.arms_pulled[..n0], &rewards)?;
    let lambda = PenaltyRule::default().lambda(n0, d, env.sigma(), delta);
    let fit = lasso_cd(batch, lambda, ESTC_LASSO_TOL, ESTC_LASSO_MAX_ITER)?;
    drop(rewards);
    let mut warnings = design.warnings.clone();
    if !fit.converged {
        warnings.push(format!(
            "lasso stopped after {} sweeps without converging",
            fit.iterations
        ));
    }
    let arm = greedy_arm(env, &fit.coef);
    commit(&mut rec, arm, n);
    // zero thresholds keep exactly the Lasso's own nonzeros
    let estimate = SparseEstimate::from_threshold(fit.coef, Vector::zeros(d));
    Ok(AlgorithmReport {
        regret: rec.trace,
        recovered_support: Some(estimate.support.clone()),
        estimate: Some(estimate),
        exploration_length: n0,
        pull_counts: rec.pull_counts,
        arms_pulled: rec.arms_pulled,
        empty_support: false,
        committed_arm: Some(arm),
        warnings,
    })
}
