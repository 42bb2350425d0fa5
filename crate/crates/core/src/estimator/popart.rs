//! Population-covariance regression with hard thresholding, and its
//! two-stage warm-started variant.

use crate::design::CovMatrix;
use crate::error::{Error, Result};
use crate::estimator::batch::{BatchView, CovariateView};
use crate::estimator::catoni::{catoni_estimate, CatoniParams};
use crate::linalg::{Matrix, Vector};

/// Inputs of a single `popart` call besides the data and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct PopArtConfig {
    /// Sub-gaussian noise scale.
    pub sigma: f64,
    /// Failure probability.
    pub delta: f64,
    /// Bound on `max_a |<a, theta* - pilot>|`.
    pub r0: f64,
    pub pilot: Vector,
}

impl PopArtConfig {
    pub fn new(sigma: f64, delta: f64, r0: f64, pilot: Vector) -> Result<Self> {
        let cfg = Self {
            sigma,
            delta,
            r0,
            pilot,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Zero pilot in dimension `d`.
    pub fn cold(d: usize, sigma: f64, delta: f64, r0: f64) -> Result<Self> {
        Self::new(sigma, delta, r0, Vector::zeros(d))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.sigma >= 0.0)
            || !(self.r0 >= 0.0)
            || !self.sigma.is_finite()
            || !self.r0.is_finite()
        {
            return Err(Error::InvalidParameter(
                "sigma and r0 must be finite and >= 0".into(),
            ));
        }
        if self.r0 * self.r0 + self.sigma * self.sigma <= 0.0 {
            return Err(Error::InvalidParameter(
                "r0^2 + sigma^2 must be positive".into(),
            ));
        }
        if self.pilot.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "pilot has non-finite entries".into(),
            ));
        }
        Ok(())
    }

    fn variance_scale(&self) -> f64 {
        self.r0 * self.r0 + self.sigma * self.sigma
    }
}

/// Output of `popart` / `warm_popart`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseEstimate {
    pub theta_hat: Vector,
    /// Per-coordinate Catoni estimates before thresholding.
    pub theta_prime: Vector,
    pub thresholds: Vector,
    /// Sorted indices with `theta_hat[i] != 0`.
    pub support: Vec<usize>,
}

impl SparseEstimate {
    /// Build from pre-threshold values and thresholds.
    pub fn from_threshold(theta_prime: Vector, thresholds: Vector) -> Self {
        let theta_hat = hard_threshold(&theta_prime, &thresholds);
        let support = (0..theta_hat.len())
            .filter(|&i| theta_hat[i] != 0.0)
            .collect();
        Self {
            theta_hat,
            theta_prime,
            thresholds,
            support,
        }
    }
}

/// Keep `v_i` where `|v_i| > lambda_i`, zero it elsewhere.
pub fn hard_threshold(v: &Vector, lambda: &Vector) -> Vector {
    Vector::from_fn(
        v.len(),
        |i, _| if v[i].abs() > lambda[i] { v[i] } else { 0.0 },
    )
}

/// `ln(2d / delta)`, the log factor shared by every bound here.
pub fn log_factor(d: usize, delta: f64) -> f64 {
    (2.0 * d as f64 / delta).ln()
}

/// Per-coordinate thresholds `sqrt(4 (r0^2 + sigma^2) (Q^-1)_ii ln(2d/delta) / n)`.
pub fn popart_thresholds(cov: &CovMatrix, n: usize, sigma: f64, delta: f64, r0: f64) -> Vector {
    let d = cov.dim();
    let scale = 4.0 * (r0 * r0 + sigma * sigma) * log_factor(d, delta) / n as f64;
    Vector::from_fn(d, |i, _| (scale * cov.inv_diag(i)).sqrt())
}

fn check_dims(batch: &BatchView<'_>, cov: &CovMatrix, pilot: &Vector) -> Result<()> {
    let d = batch.dim();
    if cov.dim() != d || pilot.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "batch dimension {d}, covariance {}, pilot {}",
            cov.dim(),
            pilot.len()
        )));
    }
    Ok(())
}

/// Rows `Q^-1 X_t (r_t - <X_t, pilot>) + pilot`, one per sample.
pub fn one_sample_estimates<'a>(
    batch: impl Into<BatchView<'a>>,
    q_inv: &Matrix,
    pilot: &Vector,
) -> Result<Matrix> {
    let batch = batch.into();
    let d = batch.dim();
    if q_inv.nrows() != d || q_inv.ncols() != d || pilot.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "batch dimension {d}, q_inv {}x{}, pilot {}",
            q_inv.nrows(),
            q_inv.ncols(),
            pilot.len()
        )));
    }
    let n = batch.len();
    let mut out = Matrix::zeros(n, d);
    let r = batch.responses();
    for t in 0..n {
        let x = batch.row(t);
        let residual = r[t] - x.dot(pilot);
        let row = q_inv * x * residual + pilot;
        out.set_row(t, &row.transpose());
    }
    Ok(out)
}

/// Computes coordinate `i` of every one-sample estimate without building the
/// full `n x d` matrix.
struct CoordinateColumns<'a> {
    batch: BatchView<'a>,
    pilot: &'a Vector,
    /// `(Q^-1 X_t)` as rows of an `n x d` (dense) or `K x d` (indexed) matrix
    weights: Matrix,
    residuals: Vec<f64>,
}

impl<'a> CoordinateColumns<'a> {
    fn new(batch: BatchView<'a>, q_inv: &Matrix, pilot: &'a Vector) -> Self {
        let r = batch.responses();
        match batch.covariates() {
            CovariateView::Dense { matrix, offset } => {
                let x = matrix.rows(offset, batch.len());
                let weights = x * q_inv;
                let fitted = x * pilot;
                let residuals = r.iter().zip(fitted.iter()).map(|(r, f)| r - f).collect();
                Self {
                    batch,
                    pilot,
                    weights,
                    residuals,
                }
            }
            CovariateView::Indexed { arms, index } => {
                let weights = arms * q_inv;
                let fitted = arms * pilot;
                let residuals = r
                    .iter()
                    .zip(index)
                    .map(|(r, &k)| r - fitted[k as usize])
                    .collect();
                Self {
                    batch,
                    pilot,
                    weights,
                    residuals,
                }
            }
        }
    }

    fn fill(&self, i: usize, out: &mut Vec<f64>) {
        out.clear();
        let base = self.pilot[i];
        match self.batch.covariates() {
            CovariateView::Dense { .. } => {
                let w = self.weights.column(i);
                out.extend(
                    self.residuals
                        .iter()
                        .zip(w.iter())
                        .map(|(res, w)| base + w * res),
                );
            }
            CovariateView::Indexed { index, .. } => {
                let w = self.weights.column(i);
                out.extend(
                    self.residuals
                        .iter()
                        .zip(index)
                        .map(|(res, &k)| base + w[k as usize] * res),
                );
            }
        }
    }
}

/// Sparse estimate of `theta*` from samples drawn from a design with known
/// population covariance `cov`.
pub fn popart<'a>(
    batch: impl Into<BatchView<'a>>,
    cov: &CovMatrix,
    config: &PopArtConfig,
) -> Result<SparseEstimate> {
    let batch = batch.into();
    config.validate()?;
    check_dims(&batch, cov, &config.pilot)?;
    let n = batch.len();
    let d = batch.dim();
    let log_term = log_factor(d, config.delta);
    if (n as f64) <= 2.0 * log_term {
        return Err(Error::InsufficientSamples {
            n,
            bound: 2.0 * log_term,
        });
    }
    let coord_delta = config.delta / (2.0 * d as f64);
    let columns = CoordinateColumns::new(batch, cov.q_inv(), &config.pilot);
    let mut buf = Vec::with_capacity(n);
    let mut theta_prime = Vector::zeros(d);
    for i in 0..d {
        let var_bound = config.variance_scale() * cov.inv_diag(i);
        let params = CatoniParams::tuned(n, var_bound, coord_delta)?;
        columns.fill(i, &mut buf);
        theta_prime[i] = catoni_estimate(&buf, &params)?;
    }
    let thresholds = popart_thresholds(cov, n, config.sigma, config.delta, config.r0);
    Ok(SparseEstimate::from_threshold(theta_prime, thresholds))
}

/// Two-stage estimate: a cold `popart` on the first half (pilot 0, range
/// `r_max`) feeds the pilot of a second `popart` on the rest with range
/// `sigma`.
pub fn warm_popart<'a>(
    batch: impl Into<BatchView<'a>>,
    cov: &CovMatrix,
    r_max: f64,
    sigma: f64,
    delta: f64,
) -> Result<SparseEstimate> {
    let batch = batch.into();
    let n0 = batch.len();
    let d = batch.dim();
    if cov.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "batch dimension {d}, covariance {}",
            cov.dim()
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let bound = 2.0 * log_factor(d, delta);
    let half = n0 / 2;
    if (half as f64) <= bound {
        return Err(Error::InsufficientWarmup { n0, bound });
    }
    let (first, second) = batch.split_at(half);
    let coarse = popart(first, cov, &PopArtConfig::cold(d, sigma, delta, r_max)?)?;
    popart(
        second,
        cov,
        &PopArtConfig::new(sigma, delta, sigma, coarse.theta_hat)?,
    )
}

/// `warm_popart` when there is noise; with `sigma = 0` the second stage has
/// no range to work with, so a single cold `popart` with range `r_max` is used.
pub fn popart_for_noise<'a>(
    batch: impl Into<BatchView<'a>>,
    cov: &CovMatrix,
    r_max: f64,
    sigma: f64,
    delta: f64,
) -> Result<SparseEstimate> {
    let batch = batch.into();
    if sigma > 0.0 {
        warm_popart(batch, cov, r_max, sigma, delta)
    } else {
        popart(
            batch,
            cov,
            &PopArtConfig::cold(batch.dim(), 0.0, delta, r_max)?,
        )
    }
}

/// Sample size above which the warm-start `l1` guarantee applies:
/// `32 s^2 (r_max^2 + sigma^2) H^2 ln(2d/delta) / sigma^2`.
pub fn warm_popart_min_samples(
    s: usize,
    r_max: f64,
    sigma: f64,
    h_squared: f64,
    d: usize,
    delta: f64,
) -> f64 {
    let s = s as f64;
    32.0 * s * s * (r_max * r_max + sigma * sigma) * h_squared * log_factor(d, delta)
        / (sigma * sigma)
}
