//! Catoni mean estimation, `popart`, `warm_popart` and the Lasso baseline.

mod batch;
mod catoni;
mod lasso;
mod popart;

pub use batch::{BatchView, CovariateView, Covariates, SampleBatch};
pub use catoni::{
    catoni_alpha, catoni_deviation_bound, catoni_estimate, psi, psi_prime, CatoniParams,
    MAX_ROOT_ITERS,
};
pub use lasso::{lasso_cd, lasso_objective, soft_threshold, LassoFit, PenaltyRule};
pub use popart::{
    hard_threshold, log_factor, one_sample_estimates, popart, popart_for_noise, popart_thresholds,
    warm_popart, warm_popart_min_samples, PopArtConfig, SparseEstimate,
};
