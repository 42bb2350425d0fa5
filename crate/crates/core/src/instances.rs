//! Generators for the benchmark action sets and hidden parameters.

use std::fmt;
use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::design::ActionSet;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// The hard instance: `a_1 = e_1 / sqrt(d)` and `a_i = e_1 + e_i / sqrt(d)`.
pub fn hard_instance_actions(d: usize) -> Result<ActionSet> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "hard instance needs d >= 2, got {d}"
        )));
    }
    let inv_sqrt = 1.0 / (d as f64).sqrt();
    let mut arms = Matrix::zeros(d, d);
    arms[(0, 0)] = inv_sqrt;
    for i in 1..d {
        arms[(i, 0)] = 1.0;
        arms[(i, i)] = inv_sqrt;
    }
    ActionSet::new(arms)
}

pub fn canonical_basis_actions(d: usize) -> Result<ActionSet> {
    ActionSet::new(Matrix::identity(d, d))
}

/// `k` arms drawn uniformly from the unit sphere in `R^d`.
pub fn unit_sphere_actions(d: usize, k: usize, seed: u64) -> Result<ActionSet> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidParameter(
            "sphere arms need d >= 1 and K >= 1".into(),
        ));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut arms = Matrix::zeros(k, d);
    for r in 0..k {
        loop {
            let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (c, x) in v.iter().enumerate() {
                    arms[(r, c)] = x / norm;
                }
                break;
            }
        }
    }
    ActionSet::new(arms)
}

/// Sphere arms that span `R^d`, bumping the seed on the (measure-zero)
/// rank-deficient draw. Returns the set and the seed actually used.
pub fn spanning_unit_sphere_actions(d: usize, k: usize, seed: u64) -> Result<(ActionSet, u64)> {
    if k < d {
        return Err(Error::InvalidParameter(format!(
            "{k} arms cannot span R^{d}"
        )));
    }
    let mut s = seed;
    loop {
        let set = unit_sphere_actions(d, k, s)?;
        if set.spans() {
            return Ok((set, s));
        }
        s = s.wrapping_add(1);
    }
}

/// Which hidden-parameter family to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThetaCase {
    /// `-e_1 + e_i`, `i` uniform over the non-first coordinates.
    Case1L1,
    /// `e_1 + e_i`, `i` uniform over the non-first coordinates.
    Case1Bandit,
    /// `e_i + e_j` with distinct uniform `i`, `j`.
    Case2,
}

impl ThetaCase {
    pub fn label(self) -> &'static str {
        match self {
            ThetaCase::Case1L1 => "case1-l1",
            ThetaCase::Case1Bandit => "case1-bandit",
            ThetaCase::Case2 => "case2",
        }
    }
}

impl fmt::Display for ThetaCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ThetaCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "case1-l1" => Ok(ThetaCase::Case1L1),
            "case1-bandit" => Ok(ThetaCase::Case1Bandit),
            "case2" | "case2-l1" | "case2-bandit" => Ok(ThetaCase::Case2),
            other => Err(Error::UnknownCase(other.to_string())),
        }
    }
}

pub fn theta_generator(case: ThetaCase, d: usize, seed: u64) -> Result<Vector> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "theta needs d >= 2, got {d}"
        )));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut theta = Vector::zeros(d);
    match case {
        ThetaCase::Case1L1 | ThetaCase::Case1Bandit => {
            let i = rng.random_range(1..d);
            theta[0] = if case == ThetaCase::Case1L1 {
                -1.0
            } else {
                1.0
            };
            theta[i] = 1.0;
        }
        ThetaCase::Case2 => {
            let i = rng.random_range(0..d);
            let mut j = rng.random_range(0..d);
            while j == i {
                j = rng.random_range(0..d);
            }
            theta[i] = 1.0;
            theta[j] = 1.0;
        }
    }
    Ok(theta)
}

/// Optimal `H^2` on the hard instance: `d (sqrt(d) + sqrt(d - 1))^2`.
pub fn hard_instance_h_star_squared(d: usize) -> f64 {
    let d = d as f64;
    d * (d.sqrt() + (d - 1.0).sqrt()).powi(2)
}

/// `f(b)` from the hard-instance analysis, a proxy for `1 / lambda_min` when
/// the non-first arms share weight `b`. Defined on `0 < b < 1 / (d - 1)`.
pub fn hard_instance_inverse_eigen_proxy(d: usize, b: f64) -> f64 {
    let d = d as f64;
    d * (1.0 + (d * d - 2.0 * d + 2.0) * b) / (2.0 * b * (1.0 - (d - 1.0) * b))
}

/// `[min_b f(b), 2 min_b f(b)]`, the interval that must contain `1 / C_min`
/// on the hard instance. The minimum is found by golden-section search.
pub fn hard_instance_inverse_c_min_bracket(d: usize) -> Result<(f64, f64)> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "hard instance needs d >= 2, got {d}"
        )));
    }
    let f = |b| hard_instance_inverse_eigen_proxy(d, b);
    let width = 1.0 / (d as f64 - 1.0);
    let (mut lo, mut hi) = (width * 1e-9, width * (1.0 - 1e-9));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-12 * width {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let m = f(0.5 * (lo + hi));
    Ok((m, 2.0 * m))
}

/// A named benchmark instance.
#[derive(Debug, Clone)]
pub struct InstanceSpec {
    pub name: String,
    pub actions: ActionSet,
    pub theta_star: Vector,
    pub sigma: f64,
    pub s: usize,
}

impl InstanceSpec {
    pub fn new(
        name: impl Into<String>,
        actions: ActionSet,
        theta_star: Vector,
        sigma: f64,
        s: usize,
    ) -> Result<Self> {
        if theta_star.len() != actions.dim() {
            return Err(Error::DimensionMismatch(format!(
                "theta has {} entries, arms have dimension {}",
                theta_star.len(),
                actions.dim()
            )));
        }
        let nnz = theta_star.iter().filter(|x| **x != 0.0).count();
        if nnz != s {
            return Err(Error::InvalidParameter(format!(
                "theta has {nnz} nonzeros, declared s = {s}"
            )));
        }
        Ok(Self {
            name: name.into(),
            actions,
            theta_star,
            sigma,
            s,
        })
    }

    /// `max_a |<a, theta*>|`.
    pub fn reward_range(&self) -> f64 {
        self.actions.rewards(&self.theta_star).amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_minimum_is_stationary() {
        let (m, hi) = hard_instance_inverse_c_min_bracket(10).unwrap();
        assert_eq!(hi, 2.0 * m);
        let grid = (1..10_000).map(|k| hard_instance_inverse_eigen_proxy(10, k as f64 / 90_000.0));
        assert!(grid.fold(f64::INFINITY, f64::min) >= m * (1.0 - 1e-9));
        assert!((hard_instance_h_star_squared(10) - 379.7366596101028).abs() < 1e-9);
    }

    #[test]
    fn hard_instance_rows_for_d2() {
        let a = hard_instance_actions(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((a.arm(0) - Vector::from_vec(vec![s, 0.0])).amax() < 1e-15);
        assert!((a.arm(1) - Vector::from_vec(vec![1.0, s])).amax() < 1e-15);
    }

    #[test]
    fn hard_instance_bounded_and_full_rank() {
        for d in 2..12 {
            let a = hard_instance_actions(d).unwrap();
            assert!(!a.exceeds_unit_box());
            assert_eq!(a.rank(), d);
        }
        assert!(hard_instance_actions(1).is_err());
    }

    #[test]
    fn basis_is_identity() {
        let a = canonical_basis_actions(3).unwrap();
        assert_eq!(a.arms(), &Matrix::identity(3, 3));
    }

    #[test]
    fn sphere_rows_are_unit_and_seeded() {
        let a = unit_sphere_actions(30, 90, 7).unwrap();
        for k in 0..90 {
            assert!((a.arm(k).norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(a, unit_sphere_actions(30, 90, 7).unwrap());
        assert_ne!(a, unit_sphere_actions(30, 90, 8).unwrap());
        let (b, used) = spanning_unit_sphere_actions(30, 90, 7).unwrap();
        assert_eq!(b.rank(), 30);
        assert_eq!(used, 7);
    }

    #[test]
    fn theta_cases() {
        for seed in 0..50 {
            let t = theta_generator(ThetaCase::Case1L1, 10, seed).unwrap();
            assert_eq!(t[0], -1.0);
            assert_eq!(t.iter().filter(|x| **x == 1.0).count(), 1);
            assert_eq!(t.iter().filter(|x| **x != 0.0).count(), 2);

            let t = theta_generator(ThetaCase::Case1Bandit, 10, seed).unwrap();
            assert_eq!(t[0], 1.0);
            assert_eq!(t.iter().filter(|x| **x != 0.0).count(), 2);

            let t = theta_generator(ThetaCase::Case2, 30, seed).unwrap();
            assert_eq!(t.iter().filter(|x| **x == 1.0).count(), 2);
            assert_eq!(t.iter().filter(|x| **x != 0.0).count(), 2);
        }
        assert!("case3".parse::<ThetaCase>().is_err());
    }
}
