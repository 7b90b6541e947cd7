//! Literal-assume diversification and unit propagation.
//!
//! Each worker fixes one randomly chosen variable and propagates the
//! consequences through the constraints, yielding a smaller instance over the
//! remaining free variables. Solutions of the smaller instance are lifted back
//! by re-inserting the fixed values.

use std::collections::VecDeque;

use log::{debug, warn};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assignment::{Assignment, Var};
use crate::formula::{Constraint, Objective, PboInstance, Term};

/// Assumptions for a set of workers: worker `k` receives `literals[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssumedLiterals {
    /// Pairs `(v, false), (v, true)` for each selected variable, in order.
    pub literals: Vec<(Var, bool)>,
    /// Set when there were fewer variables than requested pairs and the
    /// variables were drawn with replacement.
    pub with_replacement: bool,
}

/// Pick `⌈T/2⌉` distinct random variables and emit both polarities of each,
/// the 0-value first. For odd `T` the last entry is a spare.
pub fn select_assumed_literals(num_workers: usize, num_vars: usize, seed: u64) -> AssumedLiterals {
    let pairs = num_workers.div_ceil(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (vars, with_replacement): (Vec<usize>, bool) = if num_vars >= pairs {
        (index::sample(&mut rng, num_vars, pairs).into_vec(), false)
    } else if num_vars == 0 {
        warn!("no variables to assume; workers run without an assumption");
        (Vec::new(), true)
    } else {
        warn!("only {num_vars} variables for {pairs} assumption pairs; sampling with replacement");
        (
            (0..pairs).map(|_| rng.random_range(0..num_vars)).collect(),
            true,
        )
    };
    let literals = vars
        .into_iter()
        .flat_map(|v| [(Var::new(v), false), (Var::new(v), true)])
        .collect();
    AssumedLiterals {
        literals,
        with_replacement,
    }
}

/// Outcome of propagating an assumption.
#[derive(Debug, Clone)]
pub struct PresolveResult {
    simplified: Option<PboInstance>,
    fixed: Vec<Option<bool>>,
    free: Vec<Var>,
    objective_offset: i64,
    assumption: Option<(Var, bool)>,
}

impl PresolveResult {
    /// No assumption, nothing fixed; the simplified instance is a copy.
    pub fn identity(inst: &PboInstance) -> Self {
        PresolveResult {
            simplified: Some(inst.clone()),
            fixed: vec![None; inst.num_vars()],
            free: (0..inst.num_vars()).map(Var::new).collect(),
            objective_offset: 0,
            assumption: None,
        }
    }

    pub fn is_conflict(&self) -> bool {
        self.simplified.is_none()
    }

    /// The simplified instance; `None` on conflict.
    pub fn simplified(&self) -> Option<&PboInstance> {
        self.simplified.as_ref()
    }

    pub fn assumption(&self) -> Option<(Var, bool)> {
        self.assumption
    }

    /// Fixed original variables with their values.
    pub fn fixed(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.fixed
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| (Var::new(i), b)))
    }

    pub fn fixed_value(&self, original: Var) -> Option<bool> {
        self.fixed[original.index()]
    }

    pub fn num_fixed(&self) -> usize {
        self.fixed.iter().filter(|v| v.is_some()).count()
    }

    pub fn original_num_vars(&self) -> usize {
        self.fixed.len()
    }

    /// Original variable behind simplified variable `v`.
    #[inline]
    pub fn original_var(&self, v: Var) -> Var {
        self.free[v.index()]
    }

    /// Objective contribution of the fixed variables: original objective of
    /// a lifted assignment = simplified objective + this offset.
    pub fn objective_offset(&self) -> i64 {
        self.objective_offset
    }

    /// Extend an assignment of the simplified variables with the fixed values.
    pub fn lift(&self, a: &Assignment) -> Assignment {
        assert_eq!(
            a.len(),
            self.free.len(),
            "assignment is not over the simplified variables"
        );
        let mut out = Assignment::zeros(self.fixed.len());
        for (i, value) in self.fixed.iter().enumerate() {
            if let Some(b) = value {
                out.set(Var::new(i), *b);
            }
        }
        for (i, &orig) in self.free.iter().enumerate() {
            out.set(orig, a.get(Var::new(i)));
        }
        out
    }

    /// Restrict an original-space assignment to the free variables. `None`
    /// when it disagrees with a fixed value.
    pub fn project(&self, original: &Assignment) -> Option<Assignment> {
        assert_eq!(original.len(), self.fixed.len());
        let consistent = self.fixed().all(|(v, b)| original.get(v) == b);
        consistent.then(|| Assignment::from_bools(self.free.iter().map(|&v| original.get(v))))
    }
}

/// Lift a simplified-space assignment back to the original variables.
pub fn lift_solution(a: &Assignment, r: &PresolveResult) -> Assignment {
    r.lift(a)
}

struct Propagator<'a> {
    inst: &'a PboInstance,
    occurs: Vec<Vec<(u32, u32)>>,
    by_coef: Vec<Vec<u32>>,
    live: Vec<Vec<bool>>,
    degree: Vec<i64>,
    sum: Vec<i64>,
    deleted: Vec<bool>,
    fixed: Vec<Option<bool>>,
    queue: VecDeque<(Var, bool)>,
}

struct Conflict;

impl<'a> Propagator<'a> {
    fn new(inst: &'a PboInstance) -> Self {
        let mut occurs = vec![Vec::new(); inst.num_vars()];
        for (ci, c) in inst.constraints().iter().enumerate() {
            for (ti, t) in c.terms().iter().enumerate() {
                occurs[t.lit.var().index()].push((ci as u32, ti as u32));
            }
        }
        let by_coef = inst
            .constraints()
            .iter()
            .map(|c| {
                let mut order: Vec<u32> = (0..c.terms().len() as u32).collect();
                order.sort_by_key(|&t| std::cmp::Reverse(c.terms()[t as usize].coef));
                order
            })
            .collect();
        Propagator {
            inst,
            occurs,
            by_coef,
            live: inst
                .constraints()
                .iter()
                .map(|c| vec![true; c.terms().len()])
                .collect(),
            degree: inst.constraints().iter().map(Constraint::degree).collect(),
            sum: inst
                .constraints()
                .iter()
                .map(Constraint::coef_sum)
                .collect(),
            deleted: vec![false; inst.constraints().len()],
            fixed: vec![None; inst.num_vars()],
            queue: VecDeque::new(),
        }
    }

    fn enqueue(&mut self, var: Var, value: bool) -> Result<(), Conflict> {
        match self.fixed[var.index()] {
            Some(v) if v == value => Ok(()),
            Some(_) => Err(Conflict),
            None => {
                self.fixed[var.index()] = Some(value);
                self.queue.push_back((var, value));
                Ok(())
            }
        }
    }

    fn run(&mut self) -> Result<(), Conflict> {
        while let Some((var, value)) = self.queue.pop_front() {
            for k in 0..self.occurs[var.index()].len() {
                let (ci, ti) = self.occurs[var.index()][k];
                let (ci, ti) = (ci as usize, ti as usize);
                if self.deleted[ci] || !self.live[ci][ti] {
                    continue;
                }
                let term = self.inst.constraints()[ci].terms()[ti];
                if term.lit.eval(value) {
                    self.degree[ci] -= term.coef;
                }
                self.live[ci][ti] = false;
                self.sum[ci] -= term.coef;
                if self.degree[ci] <= 0 {
                    self.deleted[ci] = true;
                    continue;
                }
                if self.sum[ci] < self.degree[ci] {
                    return Err(Conflict);
                }
                self.force_from(ci)?;
            }
        }
        Ok(())
    }

    /// Enqueue every live literal with `S − a + 1 ≤ degree`.
    fn force_from(&mut self, ci: usize) -> Result<(), Conflict> {
        let slack = self.sum[ci] - self.degree[ci];
        for k in 0..self.by_coef[ci].len() {
            let ti = self.by_coef[ci][k] as usize;
            let term = self.inst.constraints()[ci].terms()[ti];
            if term.coef <= slack {
                break;
            }
            if self.live[ci][ti] {
                self.enqueue(term.lit.var(), term.lit.satisfying_value())?;
            }
        }
        Ok(())
    }
}

/// Fix `var = value` and run unit propagation to a fixed point.
///
/// On a contradiction the result is a conflict with no simplified instance.
pub fn assume_and_propagate(inst: &PboInstance, var: Var, value: bool) -> PresolveResult {
    assert!(
        var.index() < inst.num_vars(),
        "assumed variable out of range"
    );
    let mut prop = Propagator::new(inst);
    let outcome = prop.enqueue(var, value).and_then(|()| prop.run());
    if outcome.is_err() {
        debug!("assumption {var}={} conflicts", value as u8);
        return PresolveResult {
            simplified: None,
            fixed: prop.fixed,
            free: Vec::new(),
            objective_offset: 0,
            assumption: Some((var, value)),
        };
    }

    let mut new_index = vec![u32::MAX; inst.num_vars()];
    let mut free = Vec::new();
    for (i, f) in prop.fixed.iter().enumerate() {
        if f.is_none() {
            new_index[i] = free.len() as u32;
            free.push(Var::new(i));
        }
    }
    let rename = |t: &Term| {
        let v = Var::new(new_index[t.lit.var().index()] as usize);
        Term::new(t.coef, crate::assignment::Lit::new(v, t.lit.is_positive()))
    };

    let mut constraints = Vec::new();
    for (ci, c) in inst.constraints().iter().enumerate() {
        if prop.deleted[ci] {
            continue;
        }
        let terms: Vec<Term> = c
            .terms()
            .iter()
            .zip(&prop.live[ci])
            .filter(|(_, &alive)| alive)
            .map(|(t, _)| {
                debug_assert!(prop.fixed[t.lit.var().index()].is_none());
                rename(t)
            })
            .collect();
        constraints.push(
            Constraint::new(terms, prop.degree[ci]).expect("sub-constraint of a valid constraint"),
        );
    }

    let mut offset = 0i64;
    let mut obj_terms = Vec::new();
    for t in inst.objective().terms() {
        match prop.fixed[t.lit.var().index()] {
            Some(value) => {
                if t.lit.eval(value) {
                    offset += t.coef;
                }
            }
            None => obj_terms.push(rename(t)),
        }
    }
    let objective = Objective::new(obj_terms).expect("subset of a valid objective");
    let names = free.iter().map(|&v| inst.name(v).to_string()).collect();
    let simplified = PboInstance::with_names(free.len(), constraints, objective, names)
        .expect("renamed variables are in range");
    debug!(
        "assumption {var}={}: fixed {} variables, {} constraints left",
        value as u8,
        inst.num_vars() - free.len(),
        simplified.constraints().len()
    );
    PresolveResult {
        simplified: Some(simplified),
        fixed: prop.fixed,
        free,
        objective_offset: offset,
        assumption: Some((var, value)),
    }
}
