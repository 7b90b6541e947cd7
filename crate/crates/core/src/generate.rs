//! Seeded random instances with a planted model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assignment::{Assignment, Lit, Var};
use crate::formula::{Constraint, FormulaError, Objective, PboInstance, Term};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub num_vars: usize,
    pub num_constraints: usize,
    /// Coefficients are drawn from `1..=max_coeff` (objective: nonzero in
    /// `-max_coeff..=max_coeff`).
    pub max_coeff: i64,
    /// Probability that a variable occurs in a given constraint.
    pub density: f64,
    pub seed: u64,
}

impl GeneratorParams {
    pub fn new(num_vars: usize, num_constraints: usize, seed: u64) -> Self {
        GeneratorParams {
            num_vars,
            num_constraints,
            max_coeff: 10,
            density: 0.3,
            seed,
        }
    }
}

/// See [`generate_instance_with_model`].
pub fn generate_instance(p: &GeneratorParams) -> Result<PboInstance, FormulaError> {
    generate_instance_with_model(p).map(|(inst, _)| inst)
}

/// A random instance together with the model it was planted around. Every
/// constraint has at least one term; its degree lies between 1 and the
/// planted model's left-hand side, so the model is feasible.
///
/// # Panics
///
/// If `num_vars` or `max_coeff` is zero, or `density` is outside `(0, 1]`.
pub fn generate_instance_with_model(
    p: &GeneratorParams,
) -> Result<(PboInstance, Assignment), FormulaError> {
    assert!(p.num_vars > 0, "need at least one variable");
    assert!(p.max_coeff > 0, "max_coeff must be positive");
    assert!(
        p.density > 0.0 && p.density <= 1.0,
        "density must be in (0, 1]"
    );
    let n = p.num_vars;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let model = Assignment::from_bools((0..n).map(|_| rng.random_bool(0.5)));

    let mut constraints = Vec::with_capacity(p.num_constraints);
    for _ in 0..p.num_constraints {
        let mut vars: Vec<usize> = (0..n).filter(|_| rng.random_bool(p.density)).collect();
        if vars.is_empty() {
            vars.push(rng.random_range(0..n));
        }
        let mut terms: Vec<Term> = vars
            .iter()
            .map(|&i| {
                Term::new(
                    rng.random_range(1..=p.max_coeff),
                    Lit::new(Var::new(i), rng.random_bool(0.5)),
                )
            })
            .collect();
        if !terms.iter().any(|t| t.lit.is_true(&model)) {
            let k = rng.random_range(0..terms.len());
            terms[k].lit = !terms[k].lit;
        }
        let planted: i64 = terms
            .iter()
            .filter(|t| t.lit.is_true(&model))
            .map(|t| t.coef)
            .sum();
        let degree = rng.random_range(1..=planted);
        constraints.push(Constraint::new(terms, degree)?);
    }

    let objective = Objective::new((0..n).filter_map(|i| {
        let c = rng.random_range(-p.max_coeff..=p.max_coeff);
        (c != 0).then(|| Term::new(c, Var::new(i).positive()))
    }))?;
    Ok((PboInstance::new(n, constraints, objective)?, model))
}
