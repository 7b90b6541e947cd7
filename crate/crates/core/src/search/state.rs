use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SearchConfig, SearchError};
use crate::assignment::{Assignment, Var};
use crate::formula::PboInstance;
use crate::pool::PolarityWeights;

const NOT_FALSIFIED: u32 = u32::MAX;
const SPOT_CHECK_PERIOD: u64 = 4096;

#[derive(Debug, Clone, Copy)]
struct Occurrence {
    constraint: u32,
    coef: i64,
    positive: bool,
}

#[inline]
fn violation(degree: i64, lhs: i64) -> i128 {
    (degree as i128 - lhs as i128).max(0)
}

/// Unweighted decrease of `max(0, b − lhs)` when a term with coefficient
/// `coef` and current truth `lit_true` is flipped.
#[inline]
fn unit_gain(degree: i64, lhs: i64, coef: i64, lit_true: bool) -> i128 {
    let after = if lit_true { lhs - coef } else { lhs + coef };
    violation(degree, lhs) - violation(degree, after)
}

/// One worker's local-search state over a (simplified) instance.
///
/// Constraint left-hand sides, the falsified-constraint set, the objective
/// value and every variable's `hscore` are maintained incrementally on each
/// flip.
#[derive(Debug, Clone)]
pub struct SearchState<'a> {
    inst: &'a PboInstance,
    config: SearchConfig,
    rng: ChaCha8Rng,

    occurs: Vec<Vec<Occurrence>>,
    max_coef: Vec<i64>,
    /// Objective change when the variable goes from 0 to 1.
    obj_gain: Vec<i64>,
    obj_vars: Vec<Var>,

    assignment: Assignment,
    lhs: Vec<i64>,
    hscore: Vec<i128>,
    falsified: Vec<u32>,
    falsified_pos: Vec<u32>,
    falsified_terms: usize,
    objective: i64,

    hard_weights: Vec<i64>,
    obj_weight: i64,
    ratio: f64,

    best: Option<(i64, Assignment)>,
    steps: u64,
    steps_since_improvement: u64,
    window_feasible: bool,
}

impl<'a> SearchState<'a> {
    /// Start from the all-zero assignment with unit weights and ratio 1.
    pub fn new(inst: &'a PboInstance, config: SearchConfig) -> Result<Self, SearchError> {
        config.validate()?;
        let n = inst.num_vars();
        let m = inst.constraints().len();
        let mut occurs = vec![Vec::new(); n];
        for (ci, c) in inst.constraints().iter().enumerate() {
            for t in c.terms() {
                occurs[t.lit.var().index()].push(Occurrence {
                    constraint: ci as u32,
                    coef: t.coef,
                    positive: t.lit.is_positive(),
                });
            }
        }
        let mut obj_gain = vec![0i64; n];
        for t in inst.objective().terms() {
            let g = &mut obj_gain[t.lit.var().index()];
            *g += if t.lit.is_positive() { t.coef } else { -t.coef };
        }
        let obj_vars = (0..n).filter(|&i| obj_gain[i] != 0).map(Var::new).collect();
        let mut state = SearchState {
            inst,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            occurs,
            max_coef: inst
                .constraints()
                .iter()
                .map(|c| c.terms().iter().map(|t| t.coef).max().unwrap_or(0))
                .collect(),
            obj_gain,
            obj_vars,
            assignment: Assignment::zeros(n),
            lhs: vec![0; m],
            hscore: vec![0; n],
            falsified: Vec::new(),
            falsified_pos: vec![NOT_FALSIFIED; m],
            falsified_terms: 0,
            objective: 0,
            hard_weights: vec![1; m],
            obj_weight: 1,
            ratio: 1.0,
            best: None,
            steps: 0,
            steps_since_improvement: 0,
            window_feasible: false,
        };
        state.rebuild();
        Ok(state)
    }

    fn rebuild(&mut self) {
        let inst = self.inst;
        self.falsified.clear();
        self.falsified_pos.fill(NOT_FALSIFIED);
        self.falsified_terms = 0;
        for (ci, c) in inst.constraints().iter().enumerate() {
            self.lhs[ci] = c.lhs(&self.assignment);
            if self.lhs[ci] < c.degree() {
                self.mark_falsified(ci);
            }
        }
        self.objective = inst.objective().value(&self.assignment);
        for i in 0..inst.num_vars() {
            self.hscore[i] = self.hscore_from_scratch(Var::new(i));
        }
    }

    fn mark_falsified(&mut self, ci: usize) {
        self.falsified_pos[ci] = self.falsified.len() as u32;
        self.falsified.push(ci as u32);
        self.falsified_terms += self.inst.constraints()[ci].terms().len();
    }

    fn unmark_falsified(&mut self, ci: usize) {
        let pos = self.falsified_pos[ci] as usize;
        let last = *self.falsified.last().expect("constraint is marked");
        self.falsified[pos] = last;
        self.falsified_pos[last as usize] = pos as u32;
        self.falsified.pop();
        self.falsified_pos[ci] = NOT_FALSIFIED;
        self.falsified_terms -= self.inst.constraints()[ci].terms().len();
    }

    pub fn instance(&self) -> &'a PboInstance {
        self.inst
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    /// Current objective value.
    pub fn objective(&self) -> i64 {
        self.objective
    }

    pub fn is_feasible(&self) -> bool {
        self.falsified.is_empty()
    }

    pub fn num_falsified(&self) -> usize {
        self.falsified.len()
    }

    /// Unweighted `Σ max(0, b − lhs)`.
    pub fn total_violation(&self) -> i64 {
        self.falsified
            .iter()
            .map(|&ci| self.inst.constraints()[ci as usize].degree() - self.lhs[ci as usize])
            .sum()
    }

    pub fn hard_weight(&self, constraint: usize) -> i64 {
        self.hard_weights[constraint]
    }

    pub fn set_hard_weight(&mut self, constraint: usize, weight: i64) {
        assert!(weight >= 1);
        let delta = weight - self.hard_weights[constraint];
        self.add_hard_weight(constraint, delta);
    }

    fn add_hard_weight(&mut self, ci: usize, delta: i64) {
        if delta == 0 {
            return;
        }
        self.hard_weights[ci] += delta;
        let c = &self.inst.constraints()[ci];
        let lhs = self.lhs[ci];
        for t in c.terms() {
            let gain = unit_gain(c.degree(), lhs, t.coef, t.lit.is_true(&self.assignment));
            self.hscore[t.lit.var().index()] += delta as i128 * gain;
        }
    }

    pub fn obj_weight(&self) -> i64 {
        self.obj_weight
    }

    pub fn set_obj_weight(&mut self, weight: i64) {
        assert!(weight >= 1);
        self.obj_weight = weight;
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn set_ratio(&mut self, ratio: f64) {
        assert!(ratio > 0.0 && ratio.is_finite());
        self.ratio = ratio;
    }

    /// Best feasible `(objective, assignment)` seen so far.
    pub fn best(&self) -> Option<(i64, &Assignment)> {
        self.best.as_ref().map(|(o, a)| (*o, a))
    }

    pub fn best_objective(&self) -> Option<i64> {
        self.best.as_ref().map(|b| b.0)
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn steps_since_improvement(&self) -> u64 {
        self.steps_since_improvement
    }

    pub fn reset_stagnation(&mut self) {
        self.steps_since_improvement = 0;
    }

    pub fn window_feasible_found(&self) -> bool {
        self.window_feasible
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Decrease of the weighted hard penalty if `v` were flipped (cached).
    #[inline]
    pub fn hscore(&self, v: Var) -> i128 {
        self.hscore[v.index()]
    }

    /// Decrease of `w(oc)·Σ cᵢ·lᵢ` if `v` were flipped.
    #[inline]
    pub fn oscore(&self, v: Var) -> i128 {
        let g = self.obj_gain[v.index()] as i128;
        let decrease = if self.assignment.get(v) { g } else { -g };
        self.obj_weight as i128 * decrease
    }

    /// `hscore + p·oscore`.
    #[inline]
    pub fn dynamic_score(&self, v: Var) -> f64 {
        self.hscore(v) as f64 + self.ratio * self.oscore(v) as f64
    }

    /// Dynamic score scaled by the polarity weight: multiplied for a 0 → 1
    /// flip, divided for a 1 → 0 flip.
    #[inline]
    pub fn combined_score(&self, v: Var, wpd: f64) -> f64 {
        let s = self.dynamic_score(v);
        if self.assignment.get(v) {
            s / wpd
        } else {
            s * wpd
        }
    }

    /// Recompute `hscore(v)` from the constraint definitions.
    pub fn hscore_from_scratch(&self, v: Var) -> i128 {
        let value = self.assignment.get(v);
        self.occurs[v.index()]
            .iter()
            .map(|o| {
                let c = &self.inst.constraints()[o.constraint as usize];
                let lhs = c.lhs(&self.assignment);
                self.hard_weights[o.constraint as usize] as i128
                    * unit_gain(c.degree(), lhs, o.coef, value == o.positive)
            })
            .sum()
    }

    /// Compare every cache against a from-scratch evaluation.
    pub fn caches_consistent(&self) -> bool {
        let inst = self.inst;
        let lhs_ok = inst
            .constraints()
            .iter()
            .enumerate()
            .all(|(ci, c)| self.lhs[ci] == c.lhs(&self.assignment));
        let falsified_ok = inst.constraints().iter().enumerate().all(|(ci, c)| {
            (self.falsified_pos[ci] != NOT_FALSIFIED) == !c.is_satisfied(&self.assignment)
        });
        let terms: usize = self
            .falsified
            .iter()
            .map(|&ci| inst.constraints()[ci as usize].terms().len())
            .sum();
        lhs_ok
            && falsified_ok
            && terms == self.falsified_terms
            && self.objective == inst.objective().value(&self.assignment)
            && (0..inst.num_vars()).all(|i| self.hscore[i] == self.hscore_from_scratch(Var::new(i)))
    }

    /// Toggle `v`, update all caches, and record a new best if the result is
    /// feasible and strictly better. Returns whether a new best was found.
    pub fn flip(&mut self, v: Var) -> bool {
        let inst = self.inst;
        let old_value = self.assignment.get(v);
        for k in 0..self.occurs[v.index()].len() {
            let occ = self.occurs[v.index()][k];
            let ci = occ.constraint as usize;
            let c = &inst.constraints()[ci];
            let d = c.degree();
            let was_true = old_value == occ.positive;
            let old_lhs = self.lhs[ci];
            let new_lhs = if was_true {
                old_lhs - occ.coef
            } else {
                old_lhs + occ.coef
            };
            // while lhs stays at least max_coef above the degree no single
            // flip can falsify the constraint, so every gain is zero
            if old_lhs.min(new_lhs) < d.saturating_add(self.max_coef[ci]) {
                let w = self.hard_weights[ci] as i128;
                for t in c.terms() {
                    let u = t.lit.var();
                    let (before, after) = if u == v {
                        (was_true, !was_true)
                    } else {
                        let tt = t.lit.is_true(&self.assignment);
                        (tt, tt)
                    };
                    self.hscore[u.index()] += w
                        * (unit_gain(d, new_lhs, t.coef, after)
                            - unit_gain(d, old_lhs, t.coef, before));
                }
            }
            self.lhs[ci] = new_lhs;
            match (old_lhs < d, new_lhs < d) {
                (true, false) => self.unmark_falsified(ci),
                (false, true) => self.mark_falsified(ci),
                _ => {}
            }
        }
        self.assignment.flip(v);
        let g = self.obj_gain[v.index()];
        self.objective += if old_value { -g } else { g };
        self.steps += 1;
        self.steps_since_improvement += 1;
        if cfg!(debug_assertions)
            && self.steps.is_multiple_of(SPOT_CHECK_PERIOD)
            && inst.num_vars() > 0
        {
            let u = Var::new((self.steps / SPOT_CHECK_PERIOD) as usize % inst.num_vars());
            assert_eq!(
                self.hscore(u),
                self.hscore_from_scratch(u),
                "stale hscore for {u}"
            );
        }
        self.check_best()
    }

    /// If the current assignment is feasible, note it for the ratio window
    /// and record it when it beats the best. Returns whether it did.
    pub fn check_best(&mut self) -> bool {
        if !self.is_feasible() {
            return false;
        }
        self.window_feasible = true;
        if self
            .best
            .as_ref()
            .is_some_and(|(b, _)| self.objective >= *b)
        {
            return false;
        }
        self.best = Some((self.objective, self.assignment.clone()));
        self.steps_since_improvement = 0;
        true
    }

    /// Variable with the greatest positive combined score among a sample of
    /// candidates drawn from falsified constraints and objective variables.
    /// Ties are broken uniformly at random.
    pub fn pick_variable<P: PolarityWeights + ?Sized>(&mut self, weights: &P) -> Option<Var> {
        let total = self.falsified_terms + self.obj_vars.len();
        if total == 0 {
            return None;
        }
        let mut best: Option<Var> = None;
        let mut best_score = 0.0f64;
        let mut ties = 0u32;
        let mut consider = |state: &mut Self, v: Var| {
            let s = state.combined_score(v, weights.weight(v));
            if s > best_score {
                best_score = s;
                best = Some(v);
                ties = 1;
            } else if s == best_score && best.is_some() {
                ties += 1;
                if state.rng.random_range(0..ties) == 0 {
                    best = Some(v);
                }
            }
        };
        let inst = self.inst;
        if total <= self.config.sample_size {
            for k in 0..self.falsified.len() {
                let ci = self.falsified[k] as usize;
                for t in inst.constraints()[ci].terms() {
                    consider(self, t.lit.var());
                }
            }
            for k in 0..self.obj_vars.len() {
                let v = self.obj_vars[k];
                consider(self, v);
            }
        } else {
            for _ in 0..self.config.sample_size {
                let r = self.rng.random_range(0..total);
                let v = if r < self.falsified_terms {
                    // uniform constraint, then uniform term
                    let ci =
                        self.falsified[self.rng.random_range(0..self.falsified.len())] as usize;
                    let terms = inst.constraints()[ci].terms();
                    if terms.is_empty() {
                        continue;
                    }
                    terms[self.rng.random_range(0..terms.len())].lit.var()
                } else {
                    self.obj_vars[r - self.falsified_terms]
                };
                consider(self, v);
            }
        }
        best
    }

    /// Local-optimum escape: bump the weights of falsified constraints (and
    /// of the objective when feasible), then make one random-walk flip.
    /// Returns whether the walk flip produced a new best.
    pub fn escape_local_optimum(&mut self) -> bool {
        let cap = self.config.weight_cap;
        for k in 0..self.falsified.len() {
            let ci = self.falsified[k] as usize;
            if self.hard_weights[ci] < cap {
                self.add_hard_weight(ci, 1);
            }
        }
        if self.is_feasible() && self.obj_weight < cap {
            self.obj_weight += 1;
        }
        match self.walk_variable() {
            Some(v) => self.flip(v),
            None => false,
        }
    }

    fn walk_variable(&mut self) -> Option<Var> {
        let inst = self.inst;
        if !self.falsified.is_empty() {
            let ci = self.falsified[self.rng.random_range(0..self.falsified.len())] as usize;
            let terms = inst.constraints()[ci].terms();
            // a false literal always exists unless the constraint is unsatisfiable
            let helpful = terms
                .iter()
                .filter(|t| !t.lit.is_true(&self.assignment))
                .count();
            if helpful == 0 {
                // an empty constraint can never be repaired, so walk anywhere
                return match terms.len() {
                    0 => {
                        let n = inst.num_vars();
                        (n > 0).then(|| Var::new(self.rng.random_range(0..n)))
                    }
                    len => Some(terms[self.rng.random_range(0..len)].lit.var()),
                };
            }
            let pick = self.rng.random_range(0..helpful);
            return terms
                .iter()
                .filter(|t| !t.lit.is_true(&self.assignment))
                .nth(pick)
                .map(|t| t.lit.var());
        }
        if !self.obj_vars.is_empty() {
            for _ in 0..self.config.sample_size {
                let v = self.obj_vars[self.rng.random_range(0..self.obj_vars.len())];
                if self.oscore(v) > 0 {
                    return Some(v);
                }
            }
            return Some(self.obj_vars[self.rng.random_range(0..self.obj_vars.len())]);
        }
        let n = inst.num_vars();
        (n > 0).then(|| Var::new(self.rng.random_range(0..n)))
    }

    /// End of a `K`-step window: raise `p` if a feasible assignment was
    /// visited during the window, lower it otherwise.
    pub fn update_ratio(&mut self) -> f64 {
        let inc = self.config.ratio_inc;
        let (lo, hi) = self.config.ratio_bounds;
        let p = if self.window_feasible {
            self.ratio * inc
        } else {
            self.ratio / inc
        };
        self.ratio = p.clamp(lo, hi);
        self.window_feasible = false;
        self.ratio
    }

    /// Continue from `a`. Weights and ratio are kept; the best solution is
    /// only updated by the next [`SearchState::check_best`].
    pub fn restart_from(&mut self, a: Assignment) -> Result<(), SearchError> {
        if a.len() != self.inst.num_vars() {
            return Err(SearchError::DimensionMismatch {
                got: a.len(),
                expected: self.inst.num_vars(),
            });
        }
        self.assignment = a;
        self.rebuild();
        self.steps_since_improvement = 0;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::fixtures::three_var;
    use crate::formula::parse_opb;
    use crate::pool::NeutralPolarity;
    use proptest::prelude::*;

    fn bools(v: &[u8]) -> Assignment {
        Assignment::from_bools(v.iter().map(|&b| b == 1))
    }

    fn x(i: usize) -> Var {
        Var::from_opb(i)
    }

    fn example_state(inst: &PboInstance) -> SearchState<'_> {
        let mut st = SearchState::new(inst, SearchConfig::default()).unwrap();
        st.restart_from(bools(&[1, 0, 0])).unwrap();
        st.set_hard_weight(0, 2);
        st
    }

    #[test]
    fn three_var_scores() {
        let inst = three_var();
        let st = example_state(&inst);
        let h: Vec<i128> = (1..=3).map(|i| st.hscore(x(i))).collect();
        let o: Vec<i128> = (1..=3).map(|i| st.oscore(x(i))).collect();
        assert_eq!(h, [-4, 6, 6]);
        assert_eq!(o, [10, -20, -30]);
        assert!(st.caches_consistent());
    }

    #[test]
    fn dynamic_score_and_selection() {
        let inst = three_var();
        let mut st = example_state(&inst);
        st.set_ratio(2.0);
        let s: Vec<f64> = (1..=3).map(|i| st.dynamic_score(x(i))).collect();
        assert_eq!(s, [16.0, -34.0, -54.0]);
        assert_eq!(st.pick_variable(&NeutralPolarity), Some(x(1)));
        st.set_ratio(0.1);
        let s: Vec<f64> = (1..=3).map(|i| st.dynamic_score(x(i))).collect();
        assert_eq!(s, [-3.0, 4.0, 3.0]);
        assert_eq!(st.pick_variable(&NeutralPolarity), Some(x(2)));
        st.set_ratio(1.0);
        let s: Vec<f64> = (1..=3).map(|i| st.dynamic_score(x(i))).collect();
        assert_eq!(s, [6.0, -14.0, -24.0]);
    }

    #[test]
    fn polarity_weighted_score() {
        let inst = three_var();
        let st = example_state(&inst);
        let wpd = [1.1, 1.1, 0.9];
        let got: Vec<f64> = (0..3)
            .map(|i| st.combined_score(Var::new(i), wpd[i]))
            .collect();
        let want = [6.0 / 1.1, -14.0 * 1.1, -24.0 * 0.9];
        for (g, w) in got.iter().zip(want) {
            assert!(((g - w) / w).abs() < 1e-12);
        }
        for i in 0..3 {
            assert_eq!(
                st.combined_score(Var::new(i), 1.0),
                st.dynamic_score(Var::new(i))
            );
        }
    }

    #[test]
    fn no_positive_score_means_no_pick() {
        // feasible and already at the objective minimum
        let inst = parse_opb("min: +1 x1 ;\n+1 x2 >= 1 ;").unwrap();
        let mut st = SearchState::new(&inst, SearchConfig::default()).unwrap();
        st.restart_from(bools(&[0, 1])).unwrap();
        assert_eq!(st.pick_variable(&NeutralPolarity), None);
    }

    #[test]
    fn unused_variable_scores_zero() {
        let inst = parse_opb("* #variable= 3 #constraint= 1\n+1 x1 >= 1 ;").unwrap();
        let st = SearchState::new(&inst, SearchConfig::default()).unwrap();
        assert_eq!(st.hscore(x(3)), 0);
        assert_eq!(st.oscore(x(3)), 0);
    }

    #[test]
    fn ratio_updates() {
        let inst = three_var();
        let cfg = SearchConfig::default();
        let mut st = SearchState::new(&inst, cfg.clone()).unwrap();
        assert!((st.update_ratio() - 1.0 / 1.15).abs() < 1e-12);
        let mut st = SearchState::new(&inst, cfg.clone()).unwrap();
        st.restart_from(bools(&[1, 1, 0])).unwrap();
        st.check_best();
        assert!(st.window_feasible_found());
        assert!((st.update_ratio() - 1.15).abs() < 1e-12);
        assert!(!st.window_feasible_found());
        let bad = SearchConfig {
            ratio_inc: 1.0,
            ..cfg
        };
        assert!(SearchState::new(&inst, bad).is_err());
    }

    #[test]
    fn flip_examples() {
        let inst = three_var();
        let mut st = SearchState::new(&inst, SearchConfig::default()).unwrap();
        st.restart_from(bools(&[1, 0, 0])).unwrap();
        assert_eq!(st.total_violation(), 3);
        assert!(st.flip(x(2)));
        assert_eq!(st.assignment(), &bools(&[1, 1, 0]));
        assert!(st.is_feasible());
        assert_eq!(st.objective(), 30);
        assert_eq!(st.best_objective(), Some(30));
        assert_eq!(st.steps(), 1);

        st.restart_from(bools(&[1, 0, 0])).unwrap();
        st.flip(x(1));
        assert_eq!(st.total_violation(), 5);
        assert!(st.caches_consistent());
    }

    #[test]
    fn escape_bumps_falsified_weight_and_walks() {
        let inst = three_var();
        let mut st = SearchState::new(&inst, SearchConfig::default()).unwrap();
        st.set_hard_weight(0, 2);
        st.escape_local_optimum();
        assert_eq!(st.hard_weight(0), 3);
        assert_eq!(st.obj_weight(), 1);
        assert_eq!(st.assignment().iter().filter(|&b| b).count(), 1);
        assert!(st.caches_consistent());
    }

    #[test]
    fn escape_when_feasible_bumps_objective_weight() {
        let inst = three_var();
        let mut st = SearchState::new(&inst, SearchConfig::default()).unwrap();
        st.restart_from(bools(&[1, 1, 0])).unwrap();
        st.check_best();
        st.escape_local_optimum();
        assert_eq!(st.obj_weight(), 2);
        // the walk flips an objective variable that lowers the cost
        let flipped = st.assignment().distance(&bools(&[1, 1, 0]));
        assert_eq!(flipped, 1);
        assert!(st.objective() < 30);
    }

    #[test]
    fn empty_unsatisfiable_constraint_does_not_stall() {
        // the duplicate literals cancel, leaving no terms and degree 1
        let inst = parse_opb("min: +1 x2 ;\n+1 x1 +1 ~x1 >= 2 ;\n+1 x2 >= 1 ;\n").unwrap();
        assert!(inst.constraints().iter().any(|c| c.terms().is_empty()));
        let mut st = SearchState::new(&inst, SearchConfig::default()).unwrap();
        for _ in 0..200 {
            match st.pick_variable(&NeutralPolarity) {
                Some(v) => {
                    st.flip(v);
                }
                None => {
                    st.escape_local_optimum();
                }
            }
            assert!(st.caches_consistent());
        }
        assert!(!st.is_feasible());
    }

    #[test]
    fn degenerate_escape_flips_something() {
        let inst = PboInstance::new(2, Vec::new(), crate::formula::Objective::zero()).unwrap();
        let mut st = SearchState::new(&inst, SearchConfig::default()).unwrap();
        st.escape_local_optimum();
        assert_eq!(st.steps(), 1);
        assert_eq!(st.assignment().iter().filter(|&b| b).count(), 1);
    }

    #[test]
    fn restart_defers_best_update() {
        // feasible everywhere; objective x1*10 + x2*8
        let inst = parse_opb("min: +10 x1 +8 x2 ;\n+1 x1 +1 x2 >= 1 ;").unwrap();
        let mut st = SearchState::new(&inst, SearchConfig::default()).unwrap();
        st.restart_from(bools(&[1, 0])).unwrap();
        assert!(st.check_best());
        assert_eq!(st.best_objective(), Some(10));
        st.restart_from(bools(&[0, 1])).unwrap();
        assert_eq!(st.best_objective(), Some(10));
        assert!(st.check_best());
        assert_eq!(st.best_objective(), Some(8));
        assert_eq!(st.best().unwrap().1, &bools(&[0, 1]));
        assert!(matches!(
            st.restart_from(bools(&[1])),
            Err(SearchError::DimensionMismatch {
                got: 1,
                expected: 2
            })
        ));
    }

    #[test]
    fn ratio_is_clamped() {
        let inst = three_var();
        let mut st = SearchState::new(&inst, SearchConfig::default()).unwrap();
        for _ in 0..200 {
            st.update_ratio();
        }
        assert_eq!(st.ratio(), 1e-4);
    }

    fn instance_and_flips() -> impl Strategy<Value = (String, Vec<usize>)> {
        let term = (1i64..=7, 1usize..=8, any::<bool>())
            .prop_map(|(c, v, p)| format!("+{c} {}x{v}", if p { "" } else { "~" }));
        let constraint = (prop::collection::vec(term, 1..6), 1i64..=12)
            .prop_map(|(ts, d)| format!("{} >= {d} ;", ts.join(" ")));
        let obj = prop::collection::vec((-9i64..=9, 1usize..=8), 0..8).prop_map(|ts| {
            ts.iter()
                .map(|(c, v)| format!("{c:+} x{v}"))
                .collect::<Vec<_>>()
                .join(" ")
        });
        (
            obj,
            prop::collection::vec(constraint, 0..6),
            prop::collection::vec(0usize..8, 0..60),
        )
            .prop_map(|(o, cs, flips)| {
                (
                    format!(
                        "* #variable= 8 #constraint= {}\nmin: {o} ;\n{}\n",
                        cs.len(),
                        cs.join("\n")
                    ),
                    flips,
                )
            })
    }

    proptest! {
        #[test]
        fn caches_stay_coherent((text, flips) in instance_and_flips(), bumps in prop::collection::vec(any::<bool>(), 60)) {
            let inst = parse_opb(&text).unwrap();
            let mut st = SearchState::new(&inst, SearchConfig { seed: flips.len() as u64, ..SearchConfig::default() }).unwrap();
            let mut best_seq = Vec::new();
            for (i, &f) in flips.iter().enumerate() {
                if bumps[i] {
                    st.escape_local_optimum();
                } else {
                    st.flip(Var::new(f));
                }
                prop_assert!(st.caches_consistent());
                if let Some(b) = st.best_objective() {
                    if best_seq.last() != Some(&b) {
                        best_seq.push(b);
                    }
                }
                if let Some((obj, a)) = st.best() {
                    prop_assert!(inst.is_feasible(a));
                    prop_assert_eq!(obj, inst.objective().value(a));
                }
            }
            prop_assert!(best_seq.windows(2).all(|w| w[1] < w[0]));
        }

        #[test]
        fn double_flip_is_identity((text, flips) in instance_and_flips()) {
            let inst = parse_opb(&text).unwrap();
            let mut st = SearchState::new(&inst, SearchConfig::default()).unwrap();
            for &f in &flips {
                st.flip(Var::new(f));
            }
            let (a, viol, obj) = (st.assignment().clone(), st.total_violation(), st.objective());
            let h: Vec<i128> = (0..8).map(|i| st.hscore(Var::new(i))).collect();
            st.flip(Var::new(3));
            st.flip(Var::new(3));
            prop_assert_eq!(st.assignment(), &a);
            prop_assert_eq!(st.total_violation(), viol);
            prop_assert_eq!(st.objective(), obj);
            let h2: Vec<i128> = (0..8).map(|i| st.hscore(Var::new(i))).collect();
            prop_assert_eq!(h, h2);
        }
    }
}
