use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

use rand::distr::weighted::WeightedIndex;

use crate::bandit::report::RegretTrace;
use crate::design::{ActionSet, Design};
use crate::error::{Error, Result};
use crate::estimator::SampleBatch;
use crate::linalg::Vector;

/// splitmix64 output function
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combine a seed with a stream key into a well-mixed 64-bit seed.
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    finalize(finalize(seed) ^ key.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Linear bandit with Gaussian noise: pulling arm `a` at round `t` returns
/// `<theta*, a> + sigma * z_t`, where `z_t` depends only on `(seed, t)`.
#[derive(Debug, Clone)]
pub struct BanditEnv {
    actions: ActionSet,
    theta_star: Vector,
    sigma: f64,
    seed: u64,
    means: Vector,
    best: f64,
}

impl BanditEnv {
    pub fn new(actions: ActionSet, theta_star: Vector, sigma: f64, seed: u64) -> Result<Self> {
        if theta_star.len() != actions.dim() {
            return Err(Error::DimensionMismatch(format!(
                "theta has {} entries, arms have dimension {}",
                theta_star.len(),
                actions.dim()
            )));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and >= 0, got {sigma}"
            )));
        }
        let means = actions.rewards(&theta_star);
        let best = means.max();
        Ok(Self {
            actions,
            theta_star,
            sigma,
            seed,
            means,
            best,
        })
    }

    pub fn actions(&self) -> &ActionSet {
        &self.actions
    }

    pub fn theta_star(&self) -> &Vector {
        &self.theta_star
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_arms(&self) -> usize {
        self.actions.num_arms()
    }

    pub fn dim(&self) -> usize {
        self.actions.dim()
    }

    /// Number of nonzero entries of `theta*`.
    pub fn sparsity(&self) -> usize {
        self.theta_star.iter().filter(|x| **x != 0.0).count()
    }

    /// Sorted support of `theta*`.
    pub fn support(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.theta_star[i] != 0.0)
            .collect()
    }

    pub fn mean_reward(&self, arm: usize) -> f64 {
        self.means[arm]
    }

    pub fn best_mean(&self) -> f64 {
        self.best
    }

    /// Pseudo-regret of one pull of `arm`.
    pub fn gap(&self, arm: usize) -> f64 {
        self.best - self.means[arm]
    }

    /// `max_k ||a_k||_1 * ||theta*||_inf`, a valid bound on `max |<a, theta*>|`.
    pub fn default_r_max(&self) -> f64 {
        let arms = self.actions.arms();
        let max_l1 = (0..arms.nrows())
            .map(|k| arms.row(k).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        max_l1 * self.theta_star.amax()
    }

    /// Noise draw for round `round`.
    pub fn noise(&self, round: u64) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let mut rng = SplitMix64::seed_from_u64(derive_seed(self.seed, round));
        let z: f64 = StandardNormal.sample(&mut rng);
        self.sigma * z
    }

    pub fn pull(&self, arm: usize, round: u64) -> Result<f64> {
        if arm >= self.num_arms() {
            return Err(Error::ArmOutOfRange {
                index: arm,
                arms: self.num_arms(),
            });
        }
        Ok(self.means[arm] + self.noise(round))
    }

    /// `n` offline samples: arms i.i.d. from `design` using exploration
    /// stream `stream`, rewards observed at rounds `0..n`. Batches drawn with
    /// the same stream are prefixes of each other.
    pub fn draw_batch(&self, design: &Design, n: usize, stream: u64) -> Result<SampleBatch> {
        if design.len() != self.num_arms() {
            return Err(Error::DimensionMismatch(format!(
                "design over {} arms, environment has {}",
                design.len(),
                self.num_arms()
            )));
        }
        let sampler = WeightedIndex::new(design.weights().iter().copied())
            .map_err(|e| Error::InvalidParameter(format!("design cannot be sampled: {e}")))?;
        let mut rng = self.algorithm_rng(stream);
        let index: Vec<u32> = (0..n).map(|_| sampler.sample(&mut rng) as u32).collect();
        let rewards = index
            .iter()
            .enumerate()
            .map(|(t, &k)| self.means[k as usize] + self.noise(t as u64))
            .collect();
        SampleBatch::indexed(self.actions.arms().clone(), index, rewards)
    }

    /// Generator for an algorithm's own randomness (exploration draws),
    /// independent of the noise stream.
    pub(crate) fn algorithm_rng(&self, tag: u64) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(derive_seed(!self.seed, tag))
    }
}

/// Runs pulls against an environment and keeps the bookkeeping every
/// algorithm reports.
pub(crate) struct Recorder<'a> {
    env: &'a BanditEnv,
    pub trace: RegretTrace,
    pub pull_counts: Vec<usize>,
    pub arms_pulled: Vec<u32>,
}

impl<'a> Recorder<'a> {
    pub fn new(env: &'a BanditEnv, horizon: usize) -> Self {
        Self {
            env,
            trace: RegretTrace::with_capacity(horizon),
            pull_counts: vec![0; env.num_arms()],
            arms_pulled: Vec::with_capacity(horizon),
        }
    }

    pub fn round(&self) -> usize {
        self.arms_pulled.len()
    }

    /// Caller guarantees `arm < K`.
    pub fn pull(&mut self, arm: usize) -> f64 {
        let t = self.round() as u64;
        let reward = self.env.means[arm] + self.env.noise(t);
        self.trace.push(self.env.gap(arm));
        self.pull_counts[arm] += 1;
        self.arms_pulled.push(arm as u32);
        reward
    }

    /// Pull `arm` for `rounds` rounds without keeping the rewards.
    pub fn repeat(&mut self, arm: usize, rounds: usize) {
        let gap = self.env.gap(arm);
        for _ in 0..rounds {
            self.trace.push(gap);
        }
        self.pull_counts[arm] += rounds;
        self.arms_pulled
            .extend(std::iter::repeat_n(arm as u32, rounds));
    }
}
