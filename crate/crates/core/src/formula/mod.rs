//! Pseudo-Boolean formulas in normalized form.
//!
//! Every constraint is stored as `Σ aᵢ·lᵢ ≥ b` with strictly positive integer
//! coefficients and at most one term per variable. The objective is a
//! minimization `Σ cᵢ·lᵢ` with arbitrary-sign coefficients.

mod normalize;
mod opb;

pub use normalize::{normalize, RawConstraint, RelOp};
pub use opb::{parse_opb, write_opb, ParseError};

use crate::assignment::{Assignment, Lit, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("variable {var} out of range for an instance with {num_vars} variables")]
    VarOutOfRange { var: Var, num_vars: usize },
    #[error("constraint coefficient {0} is not strictly positive")]
    NonPositiveCoefficient(i64),
    #[error("variable {0} occurs more than once in a constraint")]
    DuplicateVariable(Var),
    #[error("integer overflow")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub coef: i64,
    pub lit: Lit,
}

impl Term {
    pub fn new(coef: i64, lit: Lit) -> Self {
        Term { coef, lit }
    }
}

/// A normalized `Σ aᵢ·lᵢ ≥ degree` constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    terms: Vec<Term>,
    degree: i64,
    coef_sum: i64,
}

impl Constraint {
    /// Terms must have positive coefficients over distinct variables and a
    /// coefficient sum that fits in `i64`. Terms are sorted by variable.
    pub fn new(mut terms: Vec<Term>, degree: i64) -> Result<Self, FormulaError> {
        terms.sort_by_key(|t| t.lit.var());
        let mut coef_sum: i64 = 0;
        for (i, t) in terms.iter().enumerate() {
            if t.coef <= 0 {
                return Err(FormulaError::NonPositiveCoefficient(t.coef));
            }
            if i > 0 && terms[i - 1].lit.var() == t.lit.var() {
                return Err(FormulaError::DuplicateVariable(t.lit.var()));
            }
            coef_sum = coef_sum.checked_add(t.coef).ok_or(FormulaError::Overflow)?;
        }
        Ok(Constraint {
            terms,
            degree,
            coef_sum,
        })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    /// `S = Σ aᵢ`.
    pub fn coef_sum(&self) -> i64 {
        self.coef_sum
    }

    /// Satisfied by every assignment.
    pub fn is_trivial(&self) -> bool {
        self.degree <= 0
    }

    pub fn lhs(&self, a: &Assignment) -> i64 {
        self.terms
            .iter()
            .filter(|t| t.lit.is_true(a))
            .map(|t| t.coef)
            .sum()
    }

    /// `max(0, degree − lhs)`; zero exactly on satisfying assignments.
    pub fn violation(&self, a: &Assignment) -> i64 {
        (self.degree - self.lhs(a)).max(0)
    }

    pub fn is_satisfied(&self, a: &Assignment) -> bool {
        self.lhs(a) >= self.degree
    }
}

/// Minimization objective `Σ cᵢ·lᵢ`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Objective {
    terms: Vec<Term>,
    negative_offset: i64,
}

impl Objective {
    /// Merges repeated literals, drops zero coefficients and sorts terms.
    /// Fails when `Σ|cᵢ|` does not fit in `i64`.
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Result<Self, FormulaError> {
        let mut terms: Vec<Term> = terms.into_iter().collect();
        terms.sort_by_key(|t| (t.lit.var(), !t.lit.is_positive()));
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.lit == t.lit => {
                    last.coef = last
                        .coef
                        .checked_add(t.coef)
                        .ok_or(FormulaError::Overflow)?;
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coef != 0);
        let mut abs_sum: i64 = 0;
        let mut negative_offset: i64 = 0;
        for t in &merged {
            let abs = t.coef.checked_abs().ok_or(FormulaError::Overflow)?;
            abs_sum = abs_sum.checked_add(abs).ok_or(FormulaError::Overflow)?;
            if t.coef < 0 {
                negative_offset += abs;
            }
        }
        Ok(Objective {
            terms: merged,
            negative_offset,
        })
    }

    pub fn zero() -> Self {
        Objective::default()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ |cᵢ|` over negative coefficients.
    pub fn negative_offset(&self) -> i64 {
        self.negative_offset
    }

    /// Exact `Σ cᵢ·lᵢ`. Cannot overflow: construction bounds `Σ|cᵢ|`.
    pub fn value(&self, a: &Assignment) -> i64 {
        self.terms
            .iter()
            .filter(|t| t.lit.is_true(a))
            .map(|t| t.coef)
            .sum()
    }

    /// Smallest value any assignment can reach, ignoring constraints.
    pub fn trivial_lower_bound(&self) -> i64 {
        // per variable, the cheaper of its two polarities
        let mut bound = 0i64;
        let mut i = 0;
        while i < self.terms.len() {
            let var = self.terms[i].lit.var();
            let (mut when_true, mut when_false) = (0i64, 0i64);
            while i < self.terms.len() && self.terms[i].lit.var() == var {
                let t = self.terms[i];
                if t.lit.is_positive() {
                    when_true += t.coef;
                } else {
                    when_false += t.coef;
                }
                i += 1;
            }
            bound += when_true.min(when_false);
        }
        bound
    }
}

/// A pseudo-Boolean optimization instance: minimize the objective subject to
/// every constraint. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PboInstance {
    num_vars: usize,
    constraints: Vec<Constraint>,
    objective: Objective,
    names: Vec<String>,
}

impl PboInstance {
    /// Trivially satisfied constraints are dropped.
    pub fn new(
        num_vars: usize,
        constraints: Vec<Constraint>,
        objective: Objective,
    ) -> Result<Self, FormulaError> {
        let names = (1..=num_vars).map(|i| format!("x{i}")).collect();
        Self::with_names(num_vars, constraints, objective, names)
    }

    /// Like [`PboInstance::new`] but with explicit display names, e.g. the
    /// original names of the variables of a simplified instance.
    pub fn with_names(
        num_vars: usize,
        mut constraints: Vec<Constraint>,
        objective: Objective,
        names: Vec<String>,
    ) -> Result<Self, FormulaError> {
        assert_eq!(names.len(), num_vars, "one name per variable");
        let check = |t: &Term| {
            if t.lit.var().index() >= num_vars {
                Err(FormulaError::VarOutOfRange {
                    var: t.lit.var(),
                    num_vars,
                })
            } else {
                Ok(())
            }
        };
        for c in &constraints {
            c.terms().iter().try_for_each(check)?;
        }
        objective.terms().iter().try_for_each(check)?;
        constraints.retain(|c| !c.is_trivial());
        Ok(PboInstance {
            num_vars,
            constraints,
            objective,
            names,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_feasible(&self, a: &Assignment) -> bool {
        a.len() == self.num_vars && self.constraints.iter().all(|c| c.is_satisfied(a))
    }

    pub fn total_violation(&self, a: &Assignment) -> i64 {
        self.constraints.iter().map(|c| c.violation(a)).sum()
    }
}

/// `max(0, b − Σ aᵢ·lᵢ)`.
pub fn constraint_violation(c: &Constraint, a: &Assignment) -> i64 {
    c.violation(a)
}

pub fn objective_value(o: &Objective, a: &Assignment) -> i64 {
    o.value(a)
}
