use std::sync::atomic::{AtomicBool, Ordering};

use log::{debug, trace};

use super::{SearchConfig, SearchError, SearchState};
use crate::assignment::{Assignment, Var};
use crate::formula::PboInstance;
use crate::pool::{
    InsertOutcome, NeutralPolarity, PolarityTable, PolarityWeights, Solution, SolutionPool,
};
use crate::presolve::PresolveResult;

/// Everything one worker needs. The pool and stop flag are shared.
pub struct WorkerSetup<'s, 'a> {
    pub id: usize,
    pub original: &'a PboInstance,
    pub presolve: &'s PresolveResult,
    pub config: SearchConfig,
    pub pool: &'s SolutionPool<'a>,
    pub stop: &'s AtomicBool,
    /// Optional step budget, mostly for reproducible runs.
    pub max_steps: Option<u64>,
    /// Restart from pool entries; otherwise from the worker's own best.
    pub sharing: bool,
    /// Scale scores by the pool's polarity weights.
    pub polarity: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorkerStats {
    pub worker: usize,
    pub steps: u64,
    pub restarts: u64,
    pub improvements: u64,
    pub pool_insertions: u64,
    pub assumption: Option<(Var, bool)>,
    pub fixed_vars: usize,
}

#[derive(Debug, Clone)]
pub struct WorkerOutcome {
    /// Best solution in the original variable space.
    pub best: Option<Solution>,
    pub stats: WorkerStats,
}

/// Polarity weights of the original variables, seen through the presolve
/// renumbering.
struct MappedPolarity<'p> {
    table: &'p PolarityTable,
    presolve: &'p PresolveResult,
}

impl PolarityWeights for MappedPolarity<'_> {
    #[inline]
    fn weight(&self, v: Var) -> f64 {
        self.table.weight(self.presolve.original_var(v))
    }
}

/// Run local search until the stop flag is raised or the step budget is
/// spent. `on_improvement` sees every new worker-best solution, lifted to
/// the original variables.
///
/// # Panics
///
/// If the presolve result is a conflict, or if a lifted solution violates
/// the original instance.
pub fn run_worker(
    setup: WorkerSetup<'_, '_>,
    on_improvement: &mut dyn FnMut(&Solution),
) -> Result<WorkerOutcome, SearchError> {
    let WorkerSetup {
        id,
        original,
        presolve,
        config,
        pool,
        stop,
        max_steps,
        sharing,
        polarity,
    } = setup;
    let inst = presolve
        .simplified()
        .expect("worker started on a presolve conflict");
    let mut stats = WorkerStats {
        worker: id,
        assumption: presolve.assumption(),
        fixed_vars: presolve.num_fixed(),
        ..WorkerStats::default()
    };
    let mut state = SearchState::new(inst, config.clone())?;
    if stop.load(Ordering::Relaxed) {
        return Ok(WorkerOutcome { best: None, stats });
    }

    let mapped = MappedPolarity {
        table: pool.polarity(),
        presolve,
    };
    let weights: &dyn PolarityWeights = if polarity { &mapped } else { &NeutralPolarity };
    let mut best: Option<Solution> = None;
    let mut submit = |state: &SearchState<'_>,
                      best: &mut Option<Solution>,
                      stats: &mut WorkerStats| {
        let (obj, a) = state.best().expect("called after an improvement");
        let lifted = presolve.lift(a);
        // never disabled: an infeasible submission is a solver bug
        assert!(
            original.is_feasible(&lifted),
            "worker {id} produced an infeasible solution"
        );
        let objective = obj + presolve.objective_offset();
        debug_assert_eq!(objective, original.objective().value(&lifted));
        let sol = Solution {
            assignment: lifted,
            objective,
            source_worker: id,
            discovery_step: state.steps(),
        };
        stats.improvements += 1;
        match pool.try_insert(sol.clone()) {
            Ok(InsertOutcome::Inserted | InsertOutcome::Replaced(_)) => stats.pool_insertions += 1,
            Ok(InsertOutcome::Rejected(_)) => {}
            Err(e) => panic!("pool refused a worker solution: {e}"),
        }
        trace!("worker {id} step {} obj {}", state.steps(), objective);
        on_improvement(&sol);
        *best = Some(sol);
    };

    if state.check_best() {
        submit(&state, &mut best, &mut stats);
    }
    if inst.num_vars() == 0 {
        stats.steps = state.steps();
        return Ok(WorkerOutcome { best, stats });
    }

    let mut iterations: u64 = 0;
    loop {
        if stop.load(Ordering::Relaxed) || max_steps.is_some_and(|m| iterations >= m) {
            break;
        }
        iterations += 1;
        let improved = match state.pick_variable(weights) {
            Some(v) => state.flip(v),
            None => state.escape_local_optimum(),
        };
        if improved {
            submit(&state, &mut best, &mut stats);
        }
        if iterations.is_multiple_of(config.ratio_window) {
            state.update_ratio();
        }
        if state.steps_since_improvement() >= config.restart_after {
            stats.restarts += 1;
            let start = restart_point(&mut state, presolve, pool, best.as_ref(), sharing);
            match start {
                Some(a) => {
                    state.restart_from(a)?;
                    if state.check_best() {
                        submit(&state, &mut best, &mut stats);
                    }
                }
                None => state.reset_stagnation(),
            }
        }
    }
    stats.steps = state.steps();
    debug!(
        "worker {id} done: steps={} restarts={} improvements={} best={:?}",
        stats.steps,
        stats.restarts,
        stats.improvements,
        best.as_ref().map(|b| b.objective)
    );
    Ok(WorkerOutcome { best, stats })
}

/// Where to continue after `R` stagnant steps, in the worker's own space.
/// A pool entry that contradicts the worker's fixed variables is replaced by
/// the worker's own best.
fn restart_point(
    state: &mut SearchState<'_>,
    presolve: &PresolveResult,
    pool: &SolutionPool<'_>,
    best: Option<&Solution>,
    sharing: bool,
) -> Option<Assignment> {
    match (sharing, best) {
        (true, Some(b)) => {
            let picked = pool.select_for_restart(b.objective, b, state.rng());
            presolve
                .project(&picked.assignment)
                .or_else(|| state_best(state))
        }
        (true, None) => pool
            .random_entry(state.rng())
            .and_then(|s| presolve.project(&s.assignment)),
        (false, _) => state_best(state),
    }
}

fn state_best(state: &SearchState<'_>) -> Option<Assignment> {
    state.best().map(|(_, a)| a.clone())
}
