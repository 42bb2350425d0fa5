//! Phased elimination with G-optimal exploration, and the two-stage
//! algorithm that runs it on a support recovered by `warm_popart`.

use crate::bandit::env::{BanditEnv, Recorder};
use crate::bandit::etc::{check_common, explore, greedy_arm, popart_stage, TAG_RESTRICTED};
use crate::bandit::report::{AlgorithmReport, RegretTrace};
use crate::design::{h_squared, solve_h_star, ActionSet, DesignSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::estimator::log_factor;
use crate::linalg::{self, Matrix, Vector};

/// Frank-Wolfe iteration cap for the G-optimal design.
pub const G_OPT_MAX_ITER: usize = 1000;
/// Stop once every leverage is within this factor of the dimension.
pub const G_OPT_SLACK: f64 = 1e-3;

/// G-optimal design on the rows of `y` (which must span `R^r`, `r = y.ncols()`)
/// by Frank-Wolfe on `log det`. Returns the weights.
pub fn g_optimal_design(y: &Matrix) -> Vector {
    let k = y.nrows();
    let r = y.ncols() as f64;
    let mut mu = Vector::from_element(k, 1.0 / k as f64);
    if r == 0.0 || k == 1 {
        return mu;
    }
    for _ in 0..G_OPT_MAX_ITER {
        let mut v = Matrix::zeros(y.ncols(), y.ncols());
        for a in 0..k {
            let row = y.row(a).transpose();
            v.ger(mu[a], &row, &row, 1.0);
        }
        let Ok(v_inv) = linalg::spd_inverse(&v) else {
            break;
        };
        let lev: Vec<f64> = (0..k)
            .map(|a| {
                let row = y.row(a).transpose();
                row.dot(&(&v_inv * &row))
            })
            .collect();
        let best = linalg::argmax(lev.iter().copied());
        let g = lev[best];
        if g <= (1.0 + G_OPT_SLACK) * r {
            break;
        }
        let gamma = (g / r - 1.0) / (g - 1.0);
        mu *= 1.0 - gamma;
        mu[best] += gamma;
    }
    mu
}

/// Result of a phased-elimination run.
#[derive(Debug, Clone)]
pub struct PhaseElimOutcome {
    pub trace: RegretTrace,
    pub arms_pulled: Vec<u32>,
    pub pull_counts: Vec<usize>,
    /// Number of phases started.
    pub phases: usize,
    /// Arms still active when the horizon ran out.
    pub active: Vec<usize>,
}

/// Phased elimination on `actions` (arm `k` of `actions` is arm `k` of
/// `env`; only the coordinates differ), starting at round 0.
pub fn phased_elimination(
    actions: &ActionSet,
    env: &BanditEnv,
    horizon: usize,
    delta: f64,
) -> Result<PhaseElimOutcome> {
    if actions.num_arms() != env.num_arms() {
        return Err(Error::DimensionMismatch(format!(
            "{} restricted arms for an environment with {}",
            actions.num_arms(),
            env.num_arms()
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let mut rec = Recorder::new(env, horizon);
    let phases = run_phases(&mut rec, actions, horizon, delta);
    let active = phases.1;
    Ok(PhaseElimOutcome {
        trace: rec.trace,
        arms_pulled: rec.arms_pulled,
        pull_counts: rec.pull_counts,
        phases: phases.0,
        active,
    })
}

/// Drive `rec` until it has recorded `end` rounds. Returns the number of
/// phases and the final active set.
fn run_phases(
    rec: &mut Recorder<'_>,
    actions: &ActionSet,
    end: usize,
    delta: f64,
) -> (usize, Vec<usize>) {
    let k_total = actions.num_arms() as f64;
    let arms = actions.arms();
    let mut active: Vec<usize> = (0..actions.num_arms()).collect();
    let mut phase = 0usize;
    while rec.round() < end {
        if active.len() == 1 {
            let left = end - rec.round();
            rec.repeat(active[0], left);
            break;
        }
        phase += 1;
        let eps = 0.5f64.powi(phase as i32);
        let x = Matrix::from_fn(active.len(), arms.ncols(), |i, j| arms[(active[i], j)]);
        let basis = linalg::row_space_basis(&x);
        let r = basis.ncols();
        if r == 0 {
            // every active arm is the zero vector here; nothing to learn
            let left = end - rec.round();
            rec.repeat(active[0], left);
            break;
        }
        let y = &x * &basis;
        let mu = g_optimal_design(&y);
        let pf = phase as f64;
        let log_term = (k_total * pf * (pf + 1.0) / delta).ln();
        let scale = 2.0 * r as f64 / (eps * eps) * log_term;
        let mut gram = Matrix::zeros(r, r);
        let mut rhs = Vector::zeros(r);
        for (i, &arm) in active.iter().enumerate() {
            if mu[i] <= 0.0 {
                continue;
            }
            let want = (mu[i] * scale).ceil() as usize;
            let pulls = want.min(end - rec.round());
            let mut sum = 0.0;
            for _ in 0..pulls {
                sum += rec.pull(arm);
            }
            let row = y.row(i).transpose();
            gram.ger(pulls as f64, &row, &row, 1.0);
            rhs.axpy(sum, &row, 1.0);
            if rec.round() == end {
                return (phase, active);
            }
        }
        let Some(theta) = solve_least_squares(gram, &rhs) else {
            continue;
        };
        let est: Vec<f64> = (0..active.len())
            .map(|i| y.row(i).transpose().dot(&theta))
            .collect();
        let top = est.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        active = active
            .iter()
            .zip(&est)
            .filter(|(_, &e)| top - e <= 2.0 * eps)
            .map(|(&a, _)| a)
            .collect();
    }
    (phase, active)
}

fn solve_least_squares(gram: Matrix, rhs: &Vector) -> Option<Vector> {
    if let Some(chol) = gram.clone().cholesky() {
        return Some(chol.solve(rhs));
    }
    gram.svd(true, true).solve(rhs, 1e-12).ok()
}

/// `max(256 sigma^2 H^2 ln(2d/delta) / m^2, 32 s^2 (r_max^2 + sigma^2) H^2 ln(2d/delta) / sigma^2)`,
/// rounded and bounded below by `4 ceil(ln(2d/delta))`. With `sigma = 0`
/// only the lower bound remains.
pub fn support_recovery_length(
    s: usize,
    sigma: f64,
    h_squared: f64,
    m: f64,
    d: usize,
    delta: f64,
    r_max: f64,
) -> usize {
    let l = log_factor(d, delta);
    let lower = 4 * l.ceil() as usize;
    if sigma == 0.0 {
        return lower;
    }
    let s = s as f64;
    let signal = 256.0 * sigma * sigma * h_squared * l / (m * m);
    let warm = 32.0 * s * s * (r_max * r_max + sigma * sigma) * h_squared * l / (sigma * sigma);
    (signal.max(warm).round() as usize).max(lower)
}

pub fn run_restricted_phase_elim(
    env: &BanditEnv,
    n: usize,
    delta: f64,
    r_max: f64,
    s: usize,
    m: f64,
) -> Result<AlgorithmReport> {
    check_common(env, n, delta, r_max)?;
    let design = solve_h_star(env.actions(), &SolverOptions::default())?;
    run_restricted_phase_elim_with(env, &design, n, delta, r_max, s, m)
}

/// As [`run_restricted_phase_elim`] with a precomputed `H^2` design.
pub fn run_restricted_phase_elim_with(
    env: &BanditEnv,
    design: &DesignSolution,
    n: usize,
    delta: f64,
    r_max: f64,
    s: usize,
    m: f64,
) -> Result<AlgorithmReport> {
    check_common(env, n, delta, r_max)?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "minimum signal must be finite and > 0, got {m}"
        )));
    }
    let n2 = support_recovery_length(
        s,
        env.sigma(),
        h_squared(&design.cov),
        m,
        env.dim(),
        delta,
        r_max,
    );
    if n <= n2 {
        return Err(Error::HorizonTooShort { n, n2 });
    }
    let mut warnings = design.warnings.clone();
    let weakest = env
        .theta_star()
        .iter()
        .filter(|x| **x != 0.0)
        .fold(f64::INFINITY, |a, x| a.min(x.abs()));
    if weakest <= m {
        warnings.push(format!(
            "smallest nonzero |theta*_j| = {weakest} does not exceed m = {m}"
        ));
    }
    let mut rec = Recorder::new(env, n);
    let rewards = explore(&mut rec, env, &design.design, TAG_RESTRICTED, n2)?;
    let estimate = popart_stage(env, &rec, &rewards, &design.cov, r_max, delta)?;
    drop(rewards);
    let support = estimate.support.clone();
    let mut empty_support = false;
    let mut committed_arm = None;
    if support.is_empty() {
        empty_support = true;
        warnings.push("recovered support is empty; committing to the greedy arm".into());
        let arm = greedy_arm(env, &estimate.theta_hat);
        committed_arm = Some(arm);
        let left = n - rec.round();
        rec.repeat(arm, left);
    } else {
        let restricted = env.actions().restrict(&support)?;
        let (_, active) = run_phases(&mut rec, &restricted, n, delta);
        if active.len() == 1 {
            committed_arm = Some(active[0]);
        }
    }
    Ok(AlgorithmReport {
        regret: rec.trace,
        estimate: Some(estimate),
        recovered_support: Some(support),
        exploration_length: n2,
        pull_counts: rec.pull_counts,
        arms_pulled: rec.arms_pulled,
        empty_support,
        committed_arm,
        warnings,
    })
}
