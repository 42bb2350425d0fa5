//! Catoni's robust mean estimator.

use crate::error::{Error, Result};

/// Iteration cap for the root search.
pub const MAX_ROOT_ITERS: usize = 200;

/// Below this magnitude `psi` is evaluated from its series; the truncation
/// error is far under one ulp there.
const SERIES_CUTOFF: f64 = 1e-3;

/// Influence function `sign(x) ln(1 + |x| + x^2 / 2)`.
#[inline]
pub fn psi(x: f64) -> f64 {
    let ax = x.abs();
    let u = ax + 0.5 * ax * ax;
    let mag = if ax < SERIES_CUTOFF {
        ln1p_series(u)
    } else {
        u.ln_1p()
    };
    mag.copysign(x)
}

/// `psi'(x) = (1 + |x|) / (1 + |x| + x^2 / 2)`.
#[inline]
pub fn psi_prime(x: f64) -> f64 {
    let ax = x.abs();
    (1.0 + ax) / (1.0 + ax + 0.5 * ax * ax)
}

#[inline]
fn ln1p_series(u: f64) -> f64 {
    // u - u^2/2 + u^3/3 - u^4/4 + u^5/5 - u^6/6, Horner form
    u * (1.0 + u * (-0.5 + u * (1.0 / 3.0 + u * (-0.25 + u * (0.2 - u / 6.0)))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatoniParams {
    pub alpha: f64,
    pub delta: f64,
}

impl CatoniParams {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Catoni alpha must be > 0, got {alpha}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(Self { alpha, delta })
    }

    /// Parameters tuned for `n` samples with variance at most `var_bound`.
    pub fn tuned(n: usize, var_bound: f64, delta: f64) -> Result<Self> {
        Self::new(catoni_alpha(n, var_bound, delta)?, delta)
    }
}

/// Weight parameter for `n` samples whose variance is at most `var_bound`.
pub fn catoni_alpha(n: usize, var_bound: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(var_bound > 0.0) || !var_bound.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "variance bound must be > 0, got {var_bound}"
        )));
    }
    let log_term = (1.0 / delta).ln();
    let nf = n as f64;
    if nf <= 2.0 * log_term {
        return Err(Error::InsufficientCatoniSamples {
            n,
            bound: 2.0 * log_term,
        });
    }
    let correction = 1.0 + 2.0 * log_term / (nf - 2.0 * log_term);
    Ok((2.0 * log_term / (nf * var_bound * correction)).sqrt())
}

/// High-probability deviation bound `sqrt(2 V ln(1/delta) / (n - ln(1/delta)))`
/// that accompanies the tuned weight parameter.
pub fn catoni_deviation_bound(n: usize, var_bound: f64, delta: f64) -> f64 {
    let log_term = (1.0 / delta).ln();
    (2.0 * var_bound * log_term / (n as f64 - log_term)).sqrt()
}

/// `S(y) = sum psi(alpha (z - y))` and its derivative in `y`.
fn score(samples: &[f64], alpha: f64, y: f64) -> (f64, f64) {
    let mut s = 0.0;
    let mut ds = 0.0;
    for &z in samples {
        let x = alpha * (z - y);
        s += psi(x);
        ds += psi_prime(x);
    }
    (s, -alpha * ds)
}

/// Root of `sum_t psi(alpha (z_t - y)) = 0`.
///
/// The score is strictly decreasing in `y`, positive at `min z - 1` and
/// negative at `max z + 1`. Newton steps are taken from the sample mean and
/// fall back to bisection whenever they leave the bracket or stall.
pub fn catoni_estimate(samples: &[f64], params: &CatoniParams) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let alpha = params.alpha;
    let (mut zmin, mut zmax, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for &z in samples {
        zmin = zmin.min(z);
        zmax = zmax.max(z);
        sum += z;
    }
    if !zmin.is_finite() || !zmax.is_finite() {
        return Err(Error::InvalidParameter("non-finite sample".into()));
    }
    if zmin == zmax {
        return Ok(zmin);
    }
    let tol = 1e-12 * 1f64.max(zmin.abs()).max(zmax.abs());
    let mut lo = zmin - 1.0;
    let mut hi = zmax + 1.0;
    let mut y = (sum / samples.len() as f64).clamp(zmin, zmax);
    let mut last_width = hi - lo;
    for _ in 0..MAX_ROOT_ITERS {
        let (s, ds) = score(samples, alpha, y);
        if s == 0.0 {
            return Ok(y);
        }
        if s > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let newton = if ds < 0.0 { y - s / ds } else { f64::NAN };
        // y has just become a bracket end, so a converged step can round
        // onto it and fail the strict bracket test below
        if (newton - y).abs() <= 0.5 * tol {
            return Ok(newton.clamp(zmin, zmax));
        }
        let step_ok = newton > lo && newton < hi && (newton - y).abs() < 0.5 * last_width;
        let next = if step_ok { newton } else { 0.5 * (lo + hi) };
        last_width = (next - y).abs();
        y = next;
    }
    Ok(0.5 * (lo + hi))
}
