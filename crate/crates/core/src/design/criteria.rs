use crate::design::types::{ActionSet, CovMatrix, Design};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Second-moment matrix `sum_k w_k a_k a_k^T` without any rank check.
pub fn second_moment(actions: &ActionSet, weights: &Vector) -> Matrix {
    let arms = actions.arms();
    let d = actions.dim();
    let mut q = Matrix::zeros(d, d);
    for (k, row) in arms.row_iter().enumerate() {
        let w = weights[k];
        if w == 0.0 {
            continue;
        }
        q.ger(w, &row.transpose(), &row.transpose(), 1.0);
    }
    q
}

/// Population covariance `Q(mu)` of a design.
pub fn population_covariance(actions: &ActionSet, design: &Design) -> Result<CovMatrix> {
    if design.len() != actions.num_arms() {
        return Err(Error::DimensionMismatch(format!(
            "design over {} arms, action set has {}",
            design.len(),
            actions.num_arms()
        )));
    }
    let q = second_moment(actions, design.weights());
    let trace = q.trace();
    let lmin = crate::linalg::min_eigenvalue(&q);
    if !(trace > 0.0) || lmin <= 1e-12 * trace {
        return Err(Error::DesignNotSpanning);
    }
    CovMatrix::new(q).map_err(|e| match e {
        Error::SingularCovariance => Error::DesignNotSpanning,
        other => other,
    })
}

/// `H^2(Q) = max_i (Q^{-1})_{ii}`.
pub fn h_squared(cov: &CovMatrix) -> f64 {
    (0..cov.dim())
        .map(|i| cov.inv_diag(i))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest eigenvalue of `Q`.
pub fn lambda_min(cov: &CovMatrix) -> f64 {
    cov.min_eigenvalue()
}
