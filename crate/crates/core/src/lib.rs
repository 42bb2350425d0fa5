//! Sparse linear estimation with a known population covariance, the design
//! criteria that go with it, and explore-then-commit style sparse linear
//! bandits built on top.
//!
//! The crate is organised as
//!
//! * [`estimator`]: Catoni mean estimation, `popart`, `warm_popart` and a
//!   coordinate-descent Lasso baseline;
//! * [`design`]: population covariance, the `H^2` / `C_min` criteria and
//!   their simplex solvers, plus a small compatibility-constant oracle;
//! * [`bandit`]: the bandit environment, explore-then-commit with warm
//!   `popart`, restricted phased elimination and the ESTC baseline;
//! * [`instances`]: the benchmark action sets and hidden parameters.

pub mod bandit;
pub mod design;
pub mod error;
pub mod estimator;
pub mod instances;
pub mod linalg;

pub use bandit::{AlgorithmReport, BanditEnv, RegretTrace};
pub use design::{ActionSet, CovMatrix, Design, DesignSolution};
pub use error::{Error, Result};
pub use estimator::{CatoniParams, PopArtConfig, SampleBatch, SparseEstimate};
pub use instances::{InstanceSpec, ThetaCase};
pub use linalg::{Matrix, Vector};
