//! Competition-style scoring of solver results.

use std::collections::BTreeMap;

use num_rational::Ratio;

/// `(1 + cost_best + offset) / (1 + cost_s + offset)`, where `offset` is the
/// instance's `Σ|cᵢ|` over negative objective coefficients.
///
/// # Panics
///
/// If `cost_best > cost_s` or the denominator is not positive.
pub fn competition_score(cost_best: i64, cost_s: i64, negative_offset: i64) -> Ratio<i128> {
    assert!(
        cost_best <= cost_s,
        "cost_best {cost_best} exceeds cost_s {cost_s}"
    );
    assert!(negative_offset >= 0);
    let num = 1 + cost_best as i128 + negative_offset as i128;
    let den = 1 + cost_s as i128 + negative_offset as i128;
    assert!(
        den > 0 && num > 0,
        "costs below the objective's lower bound"
    );
    Ratio::new(num, den)
}

/// One solver's result on one instance. `cost` is `None` when no solution
/// was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRecord {
    pub instance: String,
    pub solver: String,
    pub cost: Option<i64>,
    pub negative_offset: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceScores {
    pub instance: String,
    pub cost_best: Option<i64>,
    /// Per solver: its cost and score; unsolved counts as score 0.
    pub solvers: BTreeMap<String, (Option<i64>, Ratio<i128>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSummary {
    pub solver: String,
    pub avg_score: f64,
    pub wins: usize,
    pub solved: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub instances: Vec<InstanceScores>,
    pub solvers: Vec<SolverSummary>,
}

impl ScoreReport {
    /// Score every solver on every instance it appears with. A solver missing
    /// from an instance counts as unsolved there. Duplicate records keep the
    /// cheaper cost. Ties for the best cost count as a win for each tied
    /// solver.
    pub fn from_records(records: &[ResultRecord]) -> ScoreReport {
        let mut by_instance: BTreeMap<&str, BTreeMap<&str, (Option<i64>, i64)>> = BTreeMap::new();
        let mut solver_names: BTreeMap<&str, ()> = BTreeMap::new();
        for r in records {
            solver_names.insert(&r.solver, ());
            let entry = by_instance
                .entry(&r.instance)
                .or_default()
                .entry(&r.solver)
                .or_insert((None, r.negative_offset));
            entry.0 = match (entry.0, r.cost) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            entry.1 = entry.1.max(r.negative_offset);
        }

        let mut instances = Vec::new();
        let mut totals: BTreeMap<&str, (Ratio<i128>, usize, usize)> = solver_names
            .keys()
            .map(|&s| (s, (Ratio::from_integer(0), 0, 0)))
            .collect();
        for (inst, results) in &by_instance {
            let offset = results.values().map(|r| r.1).max().unwrap_or(0);
            let cost_best = results.values().filter_map(|r| r.0).min();
            let mut solvers = BTreeMap::new();
            for &s in solver_names.keys() {
                let cost = results.get(s).and_then(|r| r.0);
                let sc = match (cost_best, cost) {
                    (Some(b), Some(c)) => competition_score(b, c, offset),
                    _ => Ratio::from_integer(0),
                };
                let t = totals.get_mut(s).expect("known solver");
                t.0 += sc;
                if cost.is_some() {
                    t.2 += 1;
                    if cost == cost_best {
                        t.1 += 1;
                    }
                }
                solvers.insert(s.to_string(), (cost, sc));
            }
            instances.push(InstanceScores {
                instance: inst.to_string(),
                cost_best,
                solvers,
            });
        }
        let n = instances.len().max(1) as i128;
        let solvers = totals
            .into_iter()
            .map(|(s, (sum, wins, solved))| {
                let avg = sum / n;
                SolverSummary {
                    solver: s.to_string(),
                    avg_score: *avg.numer() as f64 / *avg.denom() as f64,
                    wins,
                    solved,
                }
            })
            .collect();
        ScoreReport { instances, solvers }
    }
}
