use std::collections::BTreeMap;
use std::fmt;

use super::{Constraint, FormulaError, Term};
use crate::assignment::{Assignment, Lit, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
}

impl RelOp {
    pub fn holds(self, lhs: i128, rhs: i128) -> bool {
        match self {
            RelOp::Ge => lhs >= rhs,
            RelOp::Gt => lhs > rhs,
            RelOp::Le => lhs <= rhs,
            RelOp::Lt => lhs < rhs,
            RelOp::Eq => lhs == rhs,
        }
    }
}

impl fmt::Display for RelOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelOp::Ge => ">=",
            RelOp::Gt => ">",
            RelOp::Le => "<=",
            RelOp::Lt => "<",
            RelOp::Eq => "=",
        })
    }
}

/// An integer linear pseudo-Boolean constraint as written in the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawConstraint {
    pub terms: Vec<(i64, Lit)>,
    pub op: RelOp,
    pub rhs: i64,
}

impl RawConstraint {
    pub fn holds(&self, a: &Assignment) -> bool {
        let lhs: i128 = self
            .terms
            .iter()
            .filter(|(_, l)| l.is_true(a))
            .map(|&(c, _)| c as i128)
            .sum();
        self.op.holds(lhs, self.rhs as i128)
    }
}

/// Rewrite a raw constraint as one or two `≥` constraints with positive
/// coefficients. Constraints that come out trivially satisfied (degree ≤ 0)
/// are still returned; callers drop them with [`Constraint::is_trivial`].
pub fn normalize(raw: &RawConstraint) -> Result<Vec<Constraint>, FormulaError> {
    // Σ coef[v]·x_v (op) rhs over positive variables only.
    let mut coefs: BTreeMap<Var, i128> = BTreeMap::new();
    let mut rhs = raw.rhs as i128;
    for &(c, lit) in &raw.terms {
        let c = c as i128;
        if lit.is_positive() {
            *coefs.entry(lit.var()).or_default() += c;
        } else {
            // c·~x = c − c·x
            *coefs.entry(lit.var()).or_default() -= c;
            rhs -= c;
        }
    }
    let negated = || coefs.iter().map(|(&v, &c)| (v, -c)).collect::<Vec<_>>();
    let direct = || coefs.iter().map(|(&v, &c)| (v, c)).collect::<Vec<_>>();
    match raw.op {
        RelOp::Ge => Ok(vec![at_least(direct(), rhs)?]),
        RelOp::Gt => Ok(vec![at_least(direct(), rhs + 1)?]),
        RelOp::Le => Ok(vec![at_least(negated(), -rhs)?]),
        RelOp::Lt => Ok(vec![at_least(negated(), -rhs + 1)?]),
        RelOp::Eq => Ok(vec![at_least(direct(), rhs)?, at_least(negated(), -rhs)?]),
    }
}

/// `Σ c·x ≥ degree` with arbitrary-sign `c`: negative terms become
/// `|c|·~x` and move `|c|` onto the degree.
fn at_least(coefs: Vec<(Var, i128)>, mut degree: i128) -> Result<Constraint, FormulaError> {
    let mut terms = Vec::with_capacity(coefs.len());
    for (v, c) in coefs {
        if c == 0 {
            continue;
        }
        let lit = if c > 0 {
            v.positive()
        } else {
            degree -= c;
            v.negative()
        };
        let coef = i64::try_from(c.abs()).map_err(|_| FormulaError::Overflow)?;
        terms.push(Term::new(coef, lit));
    }
    let degree = if degree <= 0 {
        0
    } else {
        i64::try_from(degree).map_err(|_| FormulaError::Overflow)?
    };
    Constraint::new(terms, degree)
}
