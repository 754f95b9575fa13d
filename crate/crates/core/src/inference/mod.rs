//! Bayesian posterior maintenance over dynamics parameters: discretized
//! grid posteriors for the bounded scalar/vector transition parameters and a
//! conjugate Gaussian posterior for regression coefficients.

mod blr;
mod grid;

pub use blr::{blr_sample, blr_update, default_beta_prior, GaussianPosterior, COV_SYMMETRY_TOL};
pub use grid::{GridPosterior, NORMALIZATION_TOL};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("posterior must be normalized before sampling")]
    NotNormalized,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
}

/// Success/failure tallies for each Bernoulli transition parameter. Counts
/// only increase; they are sufficient for every grid posterior in the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SufficientCounts {
    counts: Vec<(u64, u64)>,
}

impl SufficientCounts {
    pub fn new(dim: usize) -> Self {
        Self {
            counts: vec![(0, 0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn record_success(&mut self, param: usize) {
        self.counts[param].0 += 1;
    }

    pub fn record_failure(&mut self, param: usize) {
        self.counts[param].1 += 1;
    }

    pub fn success(&self, param: usize) -> u64 {
        self.counts[param].0
    }

    pub fn failure(&self, param: usize) -> u64 {
        self.counts[param].1
    }

    /// Total number of recorded observations.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|(s, f)| s + f).sum()
    }

    /// Add another tally into this one (pooling two batches).
    pub fn merge(&mut self, other: &SufficientCounts) {
        assert_eq!(self.dim(), other.dim(), "count dimensions must match");
        for (mine, theirs) in self.counts.iter_mut().zip(other.counts.iter()) {
            mine.0 += theirs.0;
            mine.1 += theirs.1;
        }
    }
}
