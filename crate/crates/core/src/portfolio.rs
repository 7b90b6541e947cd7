//! Master/worker orchestration.
//!
//! The master picks assumed literals, presolves one copy of the instance per
//! worker, starts the workers on scoped threads and folds their improvement
//! events into a global best until the cutoff raises the shared stop flag.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use log::{info, warn};

use crate::assignment::Var;
use crate::formula::PboInstance;
use crate::pool::{PoolConfig, PoolError, Solution, SolutionPool};
use crate::presolve::{assume_and_propagate, select_assumed_literals, PresolveResult};
use crate::search::{run_worker, SearchConfig, SearchError, WorkerSetup, WorkerStats};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PortfolioError {
    #[error("invalid portfolio configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Pool(#[from] PoolError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioConfig {
    /// Number of worker threads `T`.
    pub num_workers: usize,
    /// Wall-clock limit.
    pub cutoff: Option<Duration>,
    /// Per-worker step budget.
    pub max_steps: Option<u64>,
    /// Base seed. Worker `i` (0-based) uses `seed + i`.
    pub seed: u64,
    pub search: SearchConfig,
    pub pool: PoolConfig,
    /// Stop as soon as a solution this good is known.
    pub target_objective: Option<i64>,
    /// Restart stagnating workers from pool solutions.
    pub sharing: bool,
    /// Bias scores with pool polarity weights.
    pub polarity: bool,
}

impl Default for PortfolioConfig {
    fn default() -> Self {
        PortfolioConfig {
            num_workers: 32,
            cutoff: Some(Duration::from_secs(300)),
            max_steps: None,
            seed: 0,
            search: SearchConfig::default(),
            pool: PoolConfig::default(),
            target_objective: None,
            sharing: true,
            polarity: true,
        }
    }
}

impl PortfolioConfig {
    pub fn validate(&self) -> Result<(), PortfolioError> {
        if self.num_workers == 0 {
            return Err(PortfolioError::Config("at least one worker is required"));
        }
        if self.cutoff.is_none() && self.max_steps.is_none() {
            return Err(PortfolioError::Config(
                "either a cutoff or a step budget is required",
            ));
        }
        self.search.validate()?;
        self.pool.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    FeasibleFound,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Option<Solution>,
    pub status: RunStatus,
    /// Indexed by worker.
    pub workers: Vec<WorkerStats>,
    /// Presolve conflicts and other notes worth reporting.
    pub diagnostics: Vec<String>,
    pub elapsed: Duration,
}

/// Running minimum over improvement events; the earliest of equal
/// objectives is kept.
#[derive(Debug, Clone, Default)]
pub struct BestTracker {
    best: Option<Solution>,
}

impl BestTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns whether `s` became the new best.
    pub fn offer(&mut self, s: &Solution) -> bool {
        if self
            .best
            .as_ref()
            .is_some_and(|b| b.objective <= s.objective)
        {
            return false;
        }
        self.best = Some(s.clone());
        true
    }

    pub fn best(&self) -> Option<&Solution> {
        self.best.as_ref()
    }

    pub fn into_best(self) -> Option<Solution> {
        self.best
    }
}

/// Minimum-objective solution of an event stream, earliest on ties.
pub fn aggregate_best<I>(events: I) -> Option<Solution>
where
    I: IntoIterator<Item = (usize, Solution)>,
{
    let mut tracker = BestTracker::new();
    for (_, s) in events {
        tracker.offer(&s);
    }
    tracker.into_best()
}

/// Assumed literal for each worker. Workers beyond the available pairs run
/// without an assumption.
pub fn plan_assumptions(
    num_workers: usize,
    num_vars: usize,
    seed: u64,
) -> Vec<Option<(Var, bool)>> {
    let usable = num_workers.min(2 * num_vars);
    let lits = select_assumed_literals(usable, num_vars, seed).literals;
    (0..num_workers)
        .map(|i| lits.get(i).copied().filter(|_| i < usable))
        .collect()
}

/// Presolve under `assumption`, falling back to the opposite polarity and
/// then to no assumption when propagation conflicts.
pub fn presolve_worker(
    inst: &PboInstance,
    assumption: Option<(Var, bool)>,
    diagnostics: &mut Vec<String>,
) -> PresolveResult {
    let Some((v, b)) = assumption else {
        return PresolveResult::identity(inst);
    };
    let r = assume_and_propagate(inst, v, b);
    if !r.is_conflict() {
        return r;
    }
    let flipped = assume_and_propagate(inst, v, !b);
    if !flipped.is_conflict() {
        diagnostics.push(format!(
            "{} = {} propagates to a conflict; {} = {} is entailed",
            inst.name(v),
            b as u8,
            inst.name(v),
            !b as u8
        ));
        return flipped;
    }
    diagnostics.push(format!(
        "both polarities of {} propagate to a conflict; running without an assumption",
        inst.name(v)
    ));
    PresolveResult::identity(inst)
}

/// Solve `inst` with `cfg.num_workers` workers. `on_improvement` is called on
/// the master thread for every strict improvement of the global best.
pub fn run_portfolio(
    inst: &PboInstance,
    cfg: &PortfolioConfig,
    on_improvement: &mut dyn FnMut(&Solution),
) -> Result<RunResult, PortfolioError> {
    cfg.validate()?;
    let start = Instant::now();
    let deadline = cfg.cutoff.map(|c| start + c);
    let mut diagnostics = Vec::new();

    let plan = plan_assumptions(cfg.num_workers, inst.num_vars(), cfg.seed);
    let unassumed = plan.iter().filter(|a| a.is_none()).count();
    if unassumed > 0 {
        warn!(
            "{unassumed} of {} workers run without an assumed literal",
            cfg.num_workers
        );
    }
    let presolved: Vec<PresolveResult> = plan
        .iter()
        .map(|&a| presolve_worker(inst, a, &mut diagnostics))
        .collect();

    let pool = SolutionPool::new(inst, cfg.pool.clone())?;
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Solution>();
    let mut tracker = BestTracker::new();

    let outcomes = thread::scope(|scope| {
        let handles: Vec<_> = presolved
            .iter()
            .enumerate()
            .map(|(i, pr)| {
                let tx = tx.clone();
                let setup = WorkerSetup {
                    id: i,
                    original: inst,
                    presolve: pr,
                    config: SearchConfig {
                        seed: cfg.seed.wrapping_add(i as u64),
                        ..cfg.search.clone()
                    },
                    pool: &pool,
                    stop: &stop,
                    max_steps: cfg.max_steps,
                    sharing: cfg.sharing,
                    polarity: cfg.polarity,
                };
                thread::Builder::new()
                    .name(format!("worker-{i}"))
                    .spawn_scoped(scope, move || {
                        // a closed channel only means the master stopped listening
                        run_worker(setup, &mut |s| {
                            let _ = tx.send(s.clone());
                        })
                    })
                    .expect("failed to spawn worker thread")
            })
            .collect();
        drop(tx);

        loop {
            let msg = match deadline {
                Some(d) => match d.checked_duration_since(Instant::now()) {
                    Some(left) => rx.recv_timeout(left),
                    None => Err(mpsc::RecvTimeoutError::Timeout),
                },
                None => rx.recv().map_err(|_| mpsc::RecvTimeoutError::Disconnected),
            };
            match msg {
                Ok(s) => {
                    if tracker.offer(&s) {
                        on_improvement(&s);
                        if cfg.target_objective.is_some_and(|t| s.objective <= t) {
                            stop.store(true, Ordering::Relaxed);
                        }
                    }
                }
                Err(mpsc::RecvTimeoutError::Timeout) => {
                    stop.store(true, Ordering::Relaxed);
                    // drain the rest without a deadline
                    for s in rx.iter() {
                        if tracker.offer(&s) {
                            on_improvement(&s);
                        }
                    }
                    break;
                }
                Err(mpsc::RecvTimeoutError::Disconnected) => break,
            }
        }
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut workers = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        if let Some(b) = &o.best {
            // every worker best was already sent as an event
            debug_assert!(tracker.best().is_some_and(|t| t.objective <= b.objective));
        }
        workers.push(o.stats);
    }
    let best = tracker.into_best();
    if let Some(b) = &best {
        assert!(inst.is_feasible(&b.assignment), "global best is infeasible");
    }
    let status = if best.is_some() {
        RunStatus::FeasibleFound
    } else {
        RunStatus::Unknown
    };
    let elapsed = start.elapsed();
    info!(
        "portfolio done in {:.2?}: {} steps over {} workers, best {:?}",
        elapsed,
        workers.iter().map(|w| w.steps).sum::<u64>(),
        workers.len(),
        best.as_ref().map(|b| b.objective)
    );
    Ok(RunResult {
        best,
        status,
        workers,
        diagnostics,
        elapsed,
    })
}
