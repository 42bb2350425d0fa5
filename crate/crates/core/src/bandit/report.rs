use crate::estimator::SparseEstimate;

/// Per-round pseudo-regret and its running sum.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegretTrace {
    instantaneous: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RegretTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            instantaneous: Vec::with_capacity(n),
            cumulative: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, regret: f64) {
        let total = self.total() + regret;
        self.instantaneous.push(regret);
        self.cumulative.push(total);
    }

    pub fn len(&self) -> usize {
        self.instantaneous.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instantaneous.is_empty()
    }

    pub fn instantaneous(&self) -> &[f64] {
        &self.instantaneous
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Cumulative regret after all recorded rounds.
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Cumulative regret after the first `t` rounds.
    pub fn after(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.cumulative[t - 1]
        }
    }
}

/// What a bandit run returns.
#[derive(Debug, Clone)]
pub struct AlgorithmReport {
    pub regret: RegretTrace,
    pub estimate: Option<SparseEstimate>,
    pub recovered_support: Option<Vec<usize>>,
    /// Rounds spent before the estimate was formed.
    pub exploration_length: usize,
    pub pull_counts: Vec<usize>,
    /// Arm index of every round.
    pub arms_pulled: Vec<u32>,
    /// Set when support recovery came back empty and the run fell back to
    /// a greedy commit.
    pub empty_support: bool,
    pub committed_arm: Option<usize>,
    pub warnings: Vec<String>,
}

impl AlgorithmReport {
    pub fn horizon(&self) -> usize {
        self.regret.len()
    }
}
