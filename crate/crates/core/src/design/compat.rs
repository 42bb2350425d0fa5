//! Brute-force compatibility constant for small problems.
//!
//! For every support `S` of size `s` the inner problem
//! `min s v'Σv / ||v_S||_1^2` over the cone is non-convex, so it is attacked
//! with projected gradient descent from many starts. The value returned is
//! the smallest ratio found at a feasible point, i.e. an upper bound on the
//! true constant that tightens as restarts grow.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

pub const MAX_ORACLE_DIM: usize = 8;
pub const MAX_ORACLE_SPARSITY: usize = 3;
const CONE_FACTOR: f64 = 3.0;

/// Direction of the cone inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConeConvention {
    /// `||v_{-S}||_1 <= 3 ||v_S||_1`
    #[default]
    Standard,
    /// `||v_S||_1 <= 3 ||v_{-S}||_1`, the inequality as printed.
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatOptions {
    pub restarts: usize,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for CompatOptions {
    fn default() -> Self {
        Self {
            restarts: 2000,
            max_steps: 60,
            seed: 0,
        }
    }
}

pub fn compatibility_constant(
    sigma: &Matrix,
    s: usize,
    convention: ConeConvention,
    opts: &CompatOptions,
) -> Result<f64> {
    let d = sigma.nrows();
    if !sigma.is_square() {
        return Err(Error::DimensionMismatch("sigma must be square".into()));
    }
    if d > MAX_ORACLE_DIM || s > MAX_ORACLE_SPARSITY {
        return Err(Error::OracleScaleExceeded { d, s });
    }
    if s == 0 || s > d {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= s <= d, got s = {s}, d = {d}"
        )));
    }
    if sigma.clone().cholesky().is_none() {
        return Err(Error::InvalidParameter(
            "sigma must be positive definite".into(),
        ));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(opts.seed);
    let mut best = f64::INFINITY;
    for support in subsets(d, s) {
        let inner = InnerProblem::new(sigma, &support, s, convention);
        for start in inner.structured_starts() {
            best = best.min(inner.descend(start, opts.max_steps));
        }
        for _ in 0..opts.restarts {
            let v = Vector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            best = best.min(inner.descend(v, opts.max_steps));
        }
    }
    Ok(best)
}

fn subsets(d: usize, s: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(i + 1, d, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, d, s, &mut Vec::new(), &mut out);
    out
}

struct InnerProblem<'a> {
    sigma: &'a Matrix,
    in_support: Vec<bool>,
    s: f64,
    convention: ConeConvention,
}

impl<'a> InnerProblem<'a> {
    fn new(sigma: &'a Matrix, support: &[usize], s: usize, convention: ConeConvention) -> Self {
        let mut in_support = vec![false; sigma.nrows()];
        for &i in support {
            in_support[i] = true;
        }
        Self {
            sigma,
            in_support,
            s: s as f64,
            convention,
        }
    }

    fn split_l1(&self, v: &Vector) -> (f64, f64) {
        let mut on = 0.0;
        let mut off = 0.0;
        for (i, x) in v.iter().enumerate() {
            if self.in_support[i] {
                on += x.abs();
            } else {
                off += x.abs();
            }
        }
        (on, off)
    }

    fn ratio(&self, v: &Vector) -> f64 {
        let (on, _) = self.split_l1(v);
        if on == 0.0 {
            return f64::INFINITY;
        }
        self.s * v.dot(&(self.sigma * v)) / (on * on)
    }

    fn structured_starts(&self) -> Vec<Vector> {
        let d = self.in_support.len();
        let mut starts = Vec::new();
        let uniform_on = Vector::from_fn(d, |i, _| if self.in_support[i] { 1.0 } else { 0.0 });
        let uniform_all = Vector::from_element(d, 1.0);
        starts.push(uniform_on);
        starts.push(uniform_all);
        for i in 0..d {
            if self.in_support[i] {
                let mut e = Vector::zeros(d);
                e[i] = 1.0;
                starts.push(e);
            }
        }
        starts
    }

    /// Map `v` into the cone, keeping it nonzero on the support.
    fn project(&self, mut v: Vector) -> Option<Vector> {
        let (on, off) = self.split_l1(&v);
        if on == 0.0 {
            return None;
        }
        match self.convention {
            ConeConvention::Standard => {
                let radius = CONE_FACTOR * on;
                if off > radius {
                    let off_part: Vec<f64> = (0..v.len())
                        .filter(|&i| !self.in_support[i])
                        .map(|i| v[i])
                        .collect();
                    let shrunk = project_l1_ball(&off_part, radius);
                    let mut it = shrunk.into_iter();
                    for i in 0..v.len() {
                        if !self.in_support[i] {
                            v[i] = it.next().unwrap_or(0.0);
                        }
                    }
                }
            }
            ConeConvention::Reversed => {
                let radius = CONE_FACTOR * off;
                if on > radius {
                    if radius == 0.0 {
                        return None;
                    }
                    let on_part: Vec<f64> = (0..v.len())
                        .filter(|&i| self.in_support[i])
                        .map(|i| v[i])
                        .collect();
                    let shrunk = project_l1_ball(&on_part, radius);
                    let mut it = shrunk.into_iter();
                    for i in 0..v.len() {
                        if self.in_support[i] {
                            v[i] = it.next().unwrap_or(0.0);
                        }
                    }
                }
            }
        }
        let total: f64 = v.iter().map(|x| x.abs()).sum();
        if total == 0.0 || self.split_l1(&v).0 == 0.0 {
            return None;
        }
        Some(v / total)
    }

    fn gradient(&self, v: &Vector) -> Vector {
        let (on, _) = self.split_l1(v);
        let sv = self.sigma * v;
        let quad = v.dot(&sv);
        Vector::from_fn(v.len(), |i, _| {
            let sign = if self.in_support[i] {
                v[i].signum() * f64::from(v[i] != 0.0)
            } else {
                0.0
            };
            self.s * (2.0 * sv[i] / (on * on) - 2.0 * quad * sign / (on * on * on))
        })
    }

    fn descend(&self, start: Vector, steps: usize) -> f64 {
        let Some(mut v) = self.project(start) else {
            return f64::INFINITY;
        };
        let mut value = self.ratio(&v);
        let mut step = 0.5;
        for _ in 0..steps {
            let g = self.gradient(&v);
            let gnorm = g.norm();
            if !(gnorm > 0.0) {
                break;
            }
            let mut improved = false;
            while step > 1e-10 {
                if let Some(cand) = self.project(&v - &g * (step / gnorm)) {
                    let val = self.ratio(&cand);
                    if val < value {
                        v = cand;
                        value = val;
                        improved = true;
                        step *= 1.5;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        value
    }
}

/// Euclidean projection onto `{x : ||x||_1 <= radius}`.
fn project_l1_ball(x: &[f64], radius: f64) -> Vec<f64> {
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return x.to_vec();
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, m) in mags.iter().enumerate() {
        cum += m;
        let t = (cum - radius) / (j as f64 + 1.0);
        if *m > t {
            theta = t;
        }
    }
    x.iter()
        .map(|v| v.signum() * (v.abs() - theta).max(0.0))
        .collect()
}
