//! Parallel portfolio local search for pseudo-Boolean optimization.
//!
//! Several local-search workers, each diversified by an assumed literal and
//! unit propagation, share feasible solutions through a rated pool. Pool
//! statistics bias each worker's flip scores towards polarities common in
//! good solutions.

pub mod assignment;
pub mod formula;
pub mod generate;
pub mod oracle;
pub mod pool;
pub mod portfolio;
pub mod presolve;
pub mod score;
pub mod search;

pub use assignment::{Assignment, Lit, Var};
pub use formula::{
    constraint_violation, normalize, objective_value, parse_opb, write_opb, Constraint,
    FormulaError, Objective, ParseError, PboInstance, RawConstraint, RelOp, Term,
};
pub use generate::{generate_instance, generate_instance_with_model, GeneratorParams};
pub use oracle::{brute_force_solve, OracleError, MAX_ORACLE_VARS};
pub use pool::{
    hamming, mixed_ratings, InsertOutcome, NeutralPolarity, PolarityTable, PolarityWeights,
    PoolConfig, PoolError, RejectReason, Solution, SolutionPool,
};
pub use portfolio::{
    aggregate_best, plan_assumptions, presolve_worker, run_portfolio, BestTracker, PortfolioConfig,
    PortfolioError, RunResult, RunStatus,
};
pub use presolve::{
    assume_and_propagate, lift_solution, select_assumed_literals, AssumedLiterals, PresolveResult,
};
pub use score::{competition_score, InstanceScores, ResultRecord, ScoreReport, SolverSummary};
pub use search::{
    run_worker, SearchConfig, SearchError, SearchState, WorkerOutcome, WorkerSetup, WorkerStats,
};
