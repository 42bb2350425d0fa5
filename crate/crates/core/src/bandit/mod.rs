//! Sparse linear bandit environment and algorithms.

mod env;
mod etc;
mod phase_elim;
mod report;

pub use env::{derive_seed, BanditEnv};
pub use etc::{
    estc_exploration_length, etc_exploration_length, run_estc_baseline, run_estc_baseline_with,
    run_etc_popart, run_etc_popart_with, ESTC_LASSO_MAX_ITER, ESTC_LASSO_TOL,
};
pub use phase_elim::{
    g_optimal_design, phased_elimination, run_restricted_phase_elim,
    run_restricted_phase_elim_with, support_recovery_length, PhaseElimOutcome, G_OPT_MAX_ITER,
    G_OPT_SLACK,
};
pub use report::{AlgorithmReport, RegretTrace};
