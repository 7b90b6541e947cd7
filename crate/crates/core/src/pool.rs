//! Shared pool of feasible solutions.
//!
//! Entries are rated by a mix of their objective rank and their diversity
//! rank (sum of Hamming distances to the other entries); the worst-rated
//! entry is evicted when the pool is full. The pool also keeps a per-variable
//! polarity density weight, nudged towards the polarities of every inserted
//! solution, which workers read lock-free to bias their flip scores.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use log::trace;
use rand::Rng;

use crate::assignment::{Assignment, Var};
use crate::formula::PboInstance;

/// A feasible assignment of the original instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub assignment: Assignment,
    pub objective: i64,
    pub source_worker: usize,
    pub discovery_step: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PoolError {
    #[error("solution violates the instance constraints")]
    Infeasible,
    #[error("assignment lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid pool configuration: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolConfig {
    pub capacity: usize,
    /// Weight of the objective rank in the mixed rating, in `[0, 1]`.
    pub p_star: f64,
    /// Polarity weight step.
    pub beta: f64,
    /// Polarity weights stay within `[1 − epsilon, 1 + epsilon]`.
    pub epsilon: f64,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            capacity: 18,
            p_star: 0.58,
            beta: 0.03,
            epsilon: 0.144,
        }
    }
}

impl PoolConfig {
    pub fn validate(&self) -> Result<(), PoolError> {
        if self.capacity == 0 {
            return Err(PoolError::Config("pool size must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.p_star) {
            return Err(PoolError::Config("p* must lie in [0, 1]"));
        }
        if self.beta.is_nan() || self.beta < 0.0 {
            return Err(PoolError::Config("beta must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(PoolError::Config("epsilon must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Source of per-variable polarity weights for scoring.
pub trait PolarityWeights {
    fn weight(&self, v: Var) -> f64;
}

/// All weights 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeutralPolarity;

impl PolarityWeights for NeutralPolarity {
    fn weight(&self, _v: Var) -> f64 {
        1.0
    }
}

impl PolarityWeights for [f64] {
    fn weight(&self, v: Var) -> f64 {
        self[v.index()]
    }
}

impl PolarityWeights for Vec<f64> {
    fn weight(&self, v: Var) -> f64 {
        self[v.index()]
    }
}

/// Polarity density weights. Writers are serialized by the pool lock;
/// readers never block and may observe a weight one insertion stale.
#[derive(Debug)]
pub struct PolarityTable {
    weights: Vec<AtomicU64>,
    beta: f64,
    epsilon: f64,
}

impl PolarityTable {
    pub fn new(num_vars: usize, beta: f64, epsilon: f64) -> Self {
        PolarityTable {
            weights: (0..num_vars)
                .map(|_| AtomicU64::new(1f64.to_bits()))
                .collect(),
            beta,
            epsilon,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn bounds(&self) -> (f64, f64) {
        (1.0 - self.epsilon, 1.0 + self.epsilon)
    }

    /// Move every weight one `beta` step towards the polarity it has in `s`,
    /// clamped to the bounds.
    pub fn update(&self, s: &Assignment) {
        let (lo, hi) = self.bounds();
        for (w, value) in self.weights.iter().zip(s.iter()) {
            let old = f64::from_bits(w.load(Ordering::Relaxed));
            let new = if value {
                (old + self.beta).min(hi)
            } else {
                (old - self.beta).max(lo)
            };
            w.store(new.to_bits(), Ordering::Relaxed);
        }
    }

    pub fn snapshot(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| f64::from_bits(w.load(Ordering::Relaxed)))
            .collect()
    }
}

impl PolarityWeights for PolarityTable {
    #[inline]
    fn weight(&self, v: Var) -> f64 {
        f64::from_bits(self.weights[v.index()].load(Ordering::Relaxed))
    }
}

/// Number of differing positions.
pub fn hamming(a: &Assignment, b: &Assignment) -> Result<usize, PoolError> {
    if a.len() != b.len() {
        return Err(PoolError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.distance(b))
}

/// `rank_obj·p* + rank_div·(1 − p*)` for items given in age order as
/// `(objective, diversity)`. Rank 1 is the lowest objective and the highest
/// diversity; ties go to the older item.
pub fn mixed_ratings(items: &[(i64, u64)], p_star: f64) -> Vec<f64> {
    let n = items.len();
    let mut rank_obj = vec![0usize; n];
    let mut rank_div = vec![0usize; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (items[i].0, i));
    for (r, &i) in order.iter().enumerate() {
        rank_obj[i] = r + 1;
    }
    order.sort_by_key(|&i| (std::cmp::Reverse(items[i].1), i));
    for (r, &i) in order.iter().enumerate() {
        rank_div[i] = r + 1;
    }
    (0..n)
        .map(|i| rank_obj[i] as f64 * p_star + rank_div[i] as f64 * (1.0 - p_star))
        .collect()
}

/// Sum of distances from each assignment to all the others.
fn diversities(assignments: &[&Assignment]) -> Vec<u64> {
    let n = assignments.len();
    let mut div = vec![0u64; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = assignments[i].distance(assignments[j]) as u64;
            div[i] += d;
            div[j] += d;
        }
    }
    div
}

#[derive(Debug, Clone, PartialEq)]
pub enum InsertOutcome {
    Inserted,
    /// Inserted after evicting this entry.
    Replaced(Solution),
    Rejected(RejectReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    Duplicate,
    /// The candidate itself had the worst mixed rating.
    Worst,
}

#[derive(Debug)]
pub struct SolutionPool<'a> {
    instance: &'a PboInstance,
    config: PoolConfig,
    entries: Mutex<Vec<Solution>>,
    polarity: PolarityTable,
}

impl<'a> SolutionPool<'a> {
    pub fn new(instance: &'a PboInstance, config: PoolConfig) -> Result<Self, PoolError> {
        config.validate()?;
        Ok(SolutionPool {
            instance,
            polarity: PolarityTable::new(instance.num_vars(), config.beta, config.epsilon),
            entries: Mutex::new(Vec::with_capacity(config.capacity)),
            config,
        })
    }

    pub fn config(&self) -> &PoolConfig {
        &self.config
    }

    pub fn polarity(&self) -> &PolarityTable {
        &self.polarity
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Vec<Solution>> {
        self.entries.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn debug_validate(&self, entries: &[Solution]) {
        if cfg!(debug_assertions) {
            for e in entries {
                assert!(
                    self.instance.is_feasible(&e.assignment),
                    "pool holds an infeasible entry"
                );
            }
        }
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> Vec<Solution> {
        let entries = self.lock();
        self.debug_validate(&entries);
        entries.clone()
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.lock().is_empty()
    }

    /// Sum of Hamming distances from `s` to every entry.
    pub fn diversity(&self, s: &Assignment) -> u64 {
        self.lock()
            .iter()
            .map(|e| e.assignment.distance(s) as u64)
            .sum()
    }

    /// Mixed rating of every entry, in insertion order.
    pub fn rate_all(&self) -> Vec<(Solution, f64)> {
        let entries = self.lock();
        let refs: Vec<&Assignment> = entries.iter().map(|e| &e.assignment).collect();
        let div = diversities(&refs);
        let items: Vec<(i64, u64)> = entries.iter().map(|e| e.objective).zip(div).collect();
        let ratings = mixed_ratings(&items, self.config.p_star);
        entries.iter().cloned().zip(ratings).collect()
    }

    /// Offer a solution. When full, the candidate is rated together with the
    /// entries and the worst of them all is dropped.
    ///
    /// An infeasible candidate is an error: workers only submit feasible
    /// solutions, so it signals a solver bug.
    pub fn try_insert(&self, s: Solution) -> Result<InsertOutcome, PoolError> {
        if s.assignment.len() != self.instance.num_vars() {
            return Err(PoolError::LengthMismatch(
                s.assignment.len(),
                self.instance.num_vars(),
            ));
        }
        if !self.instance.is_feasible(&s.assignment)
            || self.instance.objective().value(&s.assignment) != s.objective
        {
            return Err(PoolError::Infeasible);
        }
        let mut entries = self.lock();
        if entries.iter().any(|e| e.assignment == s.assignment) {
            return Ok(InsertOutcome::Rejected(RejectReason::Duplicate));
        }
        if entries.len() < self.config.capacity {
            trace!("pool insert obj={} size={}", s.objective, entries.len() + 1);
            self.polarity.update(&s.assignment);
            entries.push(s);
            return Ok(InsertOutcome::Inserted);
        }

        let mut refs: Vec<&Assignment> = entries.iter().map(|e| &e.assignment).collect();
        refs.push(&s.assignment);
        let div = diversities(&refs);
        let items: Vec<(i64, u64)> = entries
            .iter()
            .map(|e| e.objective)
            .chain([s.objective])
            .zip(div.iter().copied())
            .collect();
        let ratings = mixed_ratings(&items, self.config.p_star);
        // the youngest wins ties for eviction, so a tied candidate is rejected
        let worst = (0..ratings.len())
            .rev()
            .max_by(|&a, &b| ratings[a].total_cmp(&ratings[b]).then(a.cmp(&b)))
            .expect("non-empty");
        let candidate = ratings.len() - 1;
        if worst == candidate {
            trace!(
                "pool reject obj={} div={} r_mix={:.3}",
                s.objective,
                div[candidate],
                ratings[candidate]
            );
            return Ok(InsertOutcome::Rejected(RejectReason::Worst));
        }
        let evicted = entries.remove(worst);
        trace!(
            "pool evict obj={} div={} r_mix={:.3}; insert obj={} div={} r_mix={:.3}",
            evicted.objective,
            div[worst],
            ratings[worst],
            s.objective,
            div[candidate],
            ratings[candidate]
        );
        self.polarity.update(&s.assignment);
        entries.push(s);
        Ok(InsertOutcome::Replaced(evicted))
    }

    /// Restart point for a worker whose best is `caller_best`: an entry no
    /// worse than it, drawn with probability proportional to its improvement
    /// `obj* − obj`. Falls back to `caller_best` when nothing improves.
    pub fn select_for_restart<R: Rng + ?Sized>(
        &self,
        caller_best_obj: i64,
        caller_best: &Solution,
        rng: &mut R,
    ) -> Solution {
        let entries = self.lock();
        self.debug_validate(&entries);
        let candidates: Vec<(&Solution, u128)> = entries
            .iter()
            .filter(|e| e.objective <= caller_best_obj)
            .map(|e| (e, (caller_best_obj as i128 - e.objective as i128) as u128))
            .chain([(caller_best, 0)])
            .collect();
        let total: u128 = candidates.iter().map(|&(_, d)| d).sum();
        if total == 0 {
            return caller_best.clone();
        }
        let mut r = rng.random_range(0..total);
        for (s, d) in candidates {
            if r < d {
                return s.clone();
            }
            r -= d;
        }
        unreachable!("draw below the total weight")
    }

    /// Uniformly random entry, for workers that have no feasible solution.
    pub fn random_entry<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Solution> {
        let entries = self.lock();
        if entries.is_empty() {
            return None;
        }
        Some(entries[rng.random_range(0..entries.len())].clone())
    }
}
