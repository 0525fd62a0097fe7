//! Adapter over `microlp`'s revised simplex.

use microlp::{ComparisonOp, OptimizationDirection, Problem, Solution};

use super::bnb::Relaxation;
use super::{LinearProgram, LpOutcome, Relation, Sense};
use crate::error::{Error, Result};

fn build(lp: &LinearProgram, lower: &[f64], upper: &[f64]) -> (Problem, Vec<microlp::Variable>) {
    let mut problem = Problem::new(match lp.sense {
        Sense::Minimize => OptimizationDirection::Minimize,
        Sense::Maximize => OptimizationDirection::Maximize,
    });
    let vars: Vec<_> = lp
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| problem.add_var(v.objective, (lower[j], upper[j])))
        .collect();
    for c in &lp.constraints {
        let terms: Vec<(microlp::Variable, f64)> =
            c.coeffs.iter().map(|&(j, a)| (vars[j], a)).collect();
        problem.add_constraint(terms, op(c.relation), c.rhs);
    }
    (problem, vars)
}

fn op(relation: Relation) -> ComparisonOp {
    match relation {
        Relation::Le => ComparisonOp::Le,
        Relation::Ge => ComparisonOp::Ge,
        Relation::Eq => ComparisonOp::Eq,
    }
}

fn classify(err: microlp::Error) -> Result<LpOutcome> {
    match err {
        microlp::Error::Infeasible => Ok(LpOutcome::Infeasible),
        microlp::Error::Unbounded => Ok(LpOutcome::Unbounded),
        other => Err(Error::Numerical(other.to_string())),
    }
}

fn into_solution(outcome: microlp::SolveOutcome) -> Result<Solution> {
    outcome
        .into_solution()
        .map_err(|_| Error::Numerical("LP solve was interrupted".into()))
}

pub(crate) fn solve_once(lp: &LinearProgram, lower: &[f64], upper: &[f64]) -> Result<LpOutcome> {
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return Ok(LpOutcome::Infeasible);
    }
    let (problem, vars) = build(lp, lower, upper);
    match problem.solve() {
        Ok(outcome) => {
            let sol = into_solution(outcome)?;
            Ok(LpOutcome::Optimal {
                objective: sol.objective(),
                values: vars.iter().map(|&v| sol.var_value_raw(v)).collect(),
            })
        }
        Err(e) => classify(e),
    }
}

/// Keeps the factorized basis so fixing a variable re-solves from a warm start.
#[derive(Clone)]
pub(crate) struct SparseRelaxation {
    solution: Solution,
    vars: std::sync::Arc<Vec<microlp::Variable>>,
}

impl Relaxation for SparseRelaxation {
    fn root(lp: &LinearProgram) -> Result<std::result::Result<Self, LpOutcome>> {
        let lower: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
        let upper: Vec<f64> = lp.variables.iter().map(|v| v.upper).collect();
        let (problem, vars) = build(lp, &lower, &upper);
        match problem.solve() {
            Ok(outcome) => Ok(Ok(SparseRelaxation {
                solution: into_solution(outcome)?,
                vars: std::sync::Arc::new(vars),
            })),
            Err(e) => classify(e).map(Err),
        }
    }

    fn objective(&self) -> f64 {
        self.solution.objective()
    }

    fn values(&self) -> Vec<f64> {
        self.vars
            .iter()
            .map(|&v| self.solution.var_value_raw(v))
            .collect()
    }

    fn fix(self, var: usize, value: f64) -> Result<Option<Self>> {
        let v = self.vars[var];
        match self.solution.fix_var(v, value) {
            Ok(outcome) => Ok(Some(SparseRelaxation {
                solution: into_solution(outcome)?,
                vars: self.vars,
            })),
            Err(microlp::Error::Infeasible) => Ok(None),
            Err(other) => Err(Error::Numerical(other.to_string())),
        }
    }
}
