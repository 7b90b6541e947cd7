//! Single-worker local search with dynamic scoring.
//!
//! The search minimizes a weighted penalty: each falsified hard constraint
//! contributes `w(hc)·max(0, b − lhs)` and the objective contributes
//! `w(oc)·Σ cᵢ·lᵢ`. A flip's score is the decrease of the hard part
//! (`hscore`) plus a dynamic ratio `p` times the decrease of the objective
//! part (`oscore`). `p` grows while feasible assignments keep showing up and
//! shrinks otherwise. Pool polarity weights further scale the score
//! depending on the flip direction.

mod state;
mod worker;

pub use state::SearchState;
pub use worker::{run_worker, WorkerOutcome, WorkerSetup, WorkerStats};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(&'static str),
    #[error("assignment has {got} variables, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Steps between ratio updates (`K`).
    pub ratio_window: u64,
    /// Steps without a new best before restarting from the pool (`R`).
    pub restart_after: u64,
    /// Ratio multiplier, strictly greater than 1.
    pub ratio_inc: f64,
    pub seed: u64,
    /// Upper bound for every constraint weight and the objective weight.
    pub weight_cap: i64,
    /// Number of candidate variables sampled per step.
    pub sample_size: usize,
    /// The ratio is clamped to `[min, max]`.
    pub ratio_bounds: (f64, f64),
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            ratio_window: 566_024,
            restart_after: 86_295,
            ratio_inc: 1.15,
            seed: 0,
            weight_cap: 1_000_000,
            sample_size: 50,
            ratio_bounds: (1e-4, 1e4),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.ratio_window == 0 {
            return Err(SearchError::Config("K must be at least 1"));
        }
        if self.restart_after == 0 {
            return Err(SearchError::Config("R must be at least 1"));
        }
        if self.ratio_inc.is_nan() || self.ratio_inc <= 1.0 || !self.ratio_inc.is_finite() {
            return Err(SearchError::Config("inc must be greater than 1"));
        }
        if self.weight_cap < 1 {
            return Err(SearchError::Config("weight cap must be at least 1"));
        }
        if self.sample_size == 0 {
            return Err(SearchError::Config("sample size must be at least 1"));
        }
        let (lo, hi) = self.ratio_bounds;
        let ordered = lo > 0.0 && lo <= 1.0 && hi >= 1.0 && hi.is_finite();
        if !ordered {
            return Err(SearchError::Config(
                "ratio bounds must satisfy 0 < min <= 1 <= max",
            ));
        }
        Ok(())
    }
}
