//! Exhaustive solver for small instances, used as a test oracle.

use crate::assignment::Assignment;
use crate::formula::PboInstance;

/// `(variable index, coefficient, positive)`.
type Flat = (usize, i64, bool);

/// Largest instance the oracle accepts.
pub const MAX_ORACLE_VARS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("brute force needs at most {MAX_ORACLE_VARS} variables, got {0}")]
    TooManyVariables(usize),
}

/// Minimum-objective model, ties to the lexicographically smallest
/// assignment (x1 most significant). `None` when infeasible.
pub fn brute_force_solve(inst: &PboInstance) -> Result<Option<(Assignment, i64)>, OracleError> {
    let n = inst.num_vars();
    if n > MAX_ORACLE_VARS {
        return Err(OracleError::TooManyVariables(n));
    }
    let bit = |i: usize| 1u32 << (n - 1 - i);
    let lit_true = |mask: u32, i: usize, positive: bool| (mask & bit(i) != 0) == positive;
    let constraints: Vec<(Vec<Flat>, i64)> = inst
        .constraints()
        .iter()
        .map(|c| {
            let terms = c
                .terms()
                .iter()
                .map(|t| (t.lit.var().index(), t.coef, t.lit.is_positive()))
                .collect();
            (terms, c.degree())
        })
        .collect();
    let objective: Vec<Flat> = inst
        .objective()
        .terms()
        .iter()
        .map(|t| (t.lit.var().index(), t.coef, t.lit.is_positive()))
        .collect();

    let mut best: Option<(u32, i64)> = None;
    for mask in 0..(1u32 << n) {
        let feasible = constraints.iter().all(|(terms, degree)| {
            let lhs: i64 = terms
                .iter()
                .filter(|&&(i, _, p)| lit_true(mask, i, p))
                .map(|t| t.1)
                .sum();
            lhs >= *degree
        });
        if !feasible {
            continue;
        }
        let obj: i64 = objective
            .iter()
            .filter(|&&(i, _, p)| lit_true(mask, i, p))
            .map(|t| t.1)
            .sum();
        if best.is_none_or(|(_, b)| obj < b) {
            best = Some((mask, obj));
        }
    }
    Ok(best.map(|(mask, obj)| {
        (
            Assignment::from_bools((0..n).map(|i| mask & bit(i) != 0)),
            obj,
        )
    }))
}
