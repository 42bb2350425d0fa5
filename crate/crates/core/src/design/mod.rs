//! Population covariance, the `H^2` and `C_min` design criteria, their
//! solvers, and a brute-force compatibility-constant oracle.

mod compat;
mod criteria;
mod solver;
mod types;

pub use compat::{compatibility_constant, CompatOptions, ConeConvention};
pub use criteria::{h_squared, lambda_min, population_covariance, second_moment};
pub use solver::{solve_c_min, solve_h_star, SolverOptions};
pub use types::{ActionSet, CovMatrix, Design, DesignSolution};
