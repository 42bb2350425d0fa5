//! Lasso by cyclic coordinate descent on the Gram matrix.

use crate::error::{Error, Result};
use crate::estimator::batch::BatchView;
use crate::estimator::popart::log_factor;
use crate::linalg::{Matrix, Vector};

/// How the Lasso penalty scales with the noise level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PenaltyRule {
    /// `sigma * sqrt(2 ln(2d/delta) / n)`
    #[default]
    NoiseScaled,
    /// `sqrt(2 ln(2d/delta) / n)`
    Unscaled,
}

impl PenaltyRule {
    pub fn lambda(self, n: usize, d: usize, sigma: f64, delta: f64) -> f64 {
        let base = (2.0 * log_factor(d, delta) / n as f64).sqrt();
        match self {
            PenaltyRule::NoiseScaled => sigma * base,
            PenaltyRule::Unscaled => base,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub coef: Vector,
    pub converged: bool,
    pub iterations: usize,
    /// `(1/2n) ||r - X theta||^2 + lambda ||theta||_1` at `coef`.
    pub objective: f64,
}

pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Minimise `(1/2n) ||r - X theta||^2 + lambda ||theta||_1`.
///
/// Works on `G = X'X/n` and `c = X'r/n`, so the per-sweep cost is `O(d^2)`
/// regardless of `n`. Stops once a full sweep moves no coordinate by `tol` or
/// more; otherwise returns the last iterate with `converged = false`.
pub fn lasso_cd<'a>(
    batch: impl Into<BatchView<'a>>,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LassoFit> {
    let batch = batch.into();
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be > 0, got {tol}"
        )));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    let (g, c) = batch.gram();
    let rr = batch.responses().iter().map(|r| r * r).sum::<f64>() / batch.len() as f64;
    let d = g.nrows();
    let mut theta = Vector::zeros(d);
    // grad_j of the smooth part is (G theta)_j - c_j; keep G theta updated
    let mut g_theta = Vector::zeros(d);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut max_change = 0.0f64;
        for j in 0..d {
            let gjj = g[(j, j)];
            let old = theta[j];
            let new = if gjj > 0.0 {
                let rho = c[j] - (g_theta[j] - gjj * old);
                soft_threshold(rho, lambda) / gjj
            } else {
                0.0
            };
            let delta = new - old;
            if delta != 0.0 {
                g_theta.axpy(delta, &g.column(j), 1.0);
                theta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < tol {
            converged = true;
            break;
        }
    }
    let objective = gram_objective(&g, &c, rr, &theta, lambda);
    Ok(LassoFit {
        coef: theta,
        converged,
        iterations,
        objective,
    })
}

/// Objective from Gram quantities: `0.5 (theta'G theta - 2 c'theta + r'r/n) + lambda |theta|_1`.
fn gram_objective(g: &Matrix, c: &Vector, rr: f64, theta: &Vector, lambda: f64) -> f64 {
    0.5 * (theta.dot(&(g * theta)) - 2.0 * c.dot(theta) + rr) + lambda * theta.lp_norm(1)
}

/// Objective evaluated directly on the data.
pub fn lasso_objective<'a>(batch: impl Into<BatchView<'a>>, theta: &Vector, lambda: f64) -> f64 {
    let batch = batch.into();
    let n = batch.len();
    let r = batch.responses();
    let sse: f64 = (0..n)
        .map(|t| (r[t] - batch.row(t).dot(theta)).powi(2))
        .sum();
    sse / (2.0 * n as f64) + lambda * theta.lp_norm(1)
}
