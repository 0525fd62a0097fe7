//! Linear and mixed-binary programs: a model representation, two LP
//! backends, and a branch-and-bound driver.

mod bnb;
mod dense;
mod mps;
mod sparse;

use std::time::Duration;

use crate::error::{Error, Result};

pub use mps::write_mps;

/// Feasibility tolerance used when checking solutions.
pub const FEAS_TOL: f64 = 1e-6;
/// Distance from {0, 1} at which a binary counts as integral.
pub const INT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * values[j]).sum()
    }

    pub fn is_satisfied(&self, values: &[f64], tol: f64) -> bool {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => lhs <= self.rhs + tol,
            Relation::Ge => lhs >= self.rhs - tol,
            Relation::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            variables: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, objective: f64) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            objective,
        });
        self.variables.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(values)
            .map(|(v, x)| v.objective * x)
            .sum()
    }

    /// Largest violation of any bound or row.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.variables.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
        }
        for c in &self.constraints {
            let lhs = c.activity(values);
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || !v.objective.is_finite() {
                return Err(Error::validation(format!("variable {} has a NaN field", v.name)));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(Error::validation(format!("variable {} has an empty domain", v.name)));
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(Error::validation(format!("row {} has a non-finite rhs", c.name)));
            }
            for &(j, a) in &c.coeffs {
                if j >= n {
                    return Err(Error::validation(format!(
                        "row {} references column {j} of {n}",
                        c.name
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::validation(format!(
                        "row {} has a non-finite coefficient",
                        c.name
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedIntegerProgram {
    pub lp: LinearProgram,
    /// Integrality mask; integral variables are binaries.
    pub integral: Vec<bool>,
    /// Branching tier: fractional variables in a higher tier branch first.
    pub priority: Vec<u32>,
}

impl MixedIntegerProgram {
    pub fn new(sense: Sense) -> Self {
        MixedIntegerProgram {
            lp: LinearProgram::new(sense),
            integral: Vec::new(),
            priority: Vec::new(),
        }
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64, objective: f64) -> usize {
        self.integral.push(false);
        self.priority.push(0);
        self.lp.add_var(name, lower, upper, objective)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, objective: f64, priority: u32) -> usize {
        self.integral.push(true);
        self.priority.push(priority);
        self.lp.add_var(name, 0.0, 1.0, objective)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.lp.add_constraint(name, coeffs, relation, rhs)
    }

    pub fn num_vars(&self) -> usize {
        self.lp.num_vars()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.lp.variables.iter().position(|v| v.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        self.lp.validate()?;
        if self.integral.len() != self.lp.num_vars() || self.priority.len() != self.lp.num_vars() {
            return Err(Error::validation("integrality mask does not match the variable count"));
        }
        for (v, &int) in self.lp.variables.iter().zip(&self.integral) {
            if int && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(Error::validation(format!(
                    "integral variable {} must lie within [0, 1]",
                    v.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    LimitReached,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MipSolution {
    pub status: Status,
    /// Incumbent objective; NaN without an incumbent.
    pub objective: f64,
    pub values: Vec<f64>,
    /// Best proven bound in the model's own sense.
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub wall_seconds: f64,
}

impl MipSolution {
    fn without_solution(status: Status, n: usize) -> Self {
        MipSolution {
            status,
            objective: f64::NAN,
            values: vec![0.0; n],
            bound: f64::NAN,
            gap: f64::INFINITY,
            nodes: 0,
            wall_seconds: 0.0,
        }
    }

    pub fn has_incumbent(&self) -> bool {
        !self.objective.is_nan()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LpBackend {
    /// Dense bounded-variable tableau simplex.
    Dense,
    /// Sparse revised simplex with warm-started re-solves.
    #[default]
    Sparse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MipLimits {
    pub time: Option<Duration>,
    pub nodes: Option<usize>,
    pub abs_gap: f64,
    pub backend: LpBackend,
}

impl Default for MipLimits {
    fn default() -> Self {
        MipLimits {
            time: None,
            nodes: None,
            abs_gap: 1e-6,
            backend: LpBackend::default(),
        }
    }
}

/// Outcome of a single LP solve with explicit bounds.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { objective: f64, values: Vec<f64> },
    Infeasible,
    Unbounded,
}

pub fn solve_lp(lp: &LinearProgram) -> Result<MipSolution> {
    solve_lp_with(lp, LpBackend::default())
}

pub fn solve_lp_with(lp: &LinearProgram, backend: LpBackend) -> Result<MipSolution> {
    lp.validate()?;
    let start = std::time::Instant::now();
    let lower: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = lp.variables.iter().map(|v| v.upper).collect();
    let outcome = match backend {
        LpBackend::Dense => dense::solve(lp, &lower, &upper)?,
        LpBackend::Sparse => sparse::solve_once(lp, &lower, &upper)?,
    };
    let mut sol = match outcome {
        LpOutcome::Optimal { objective, values } => MipSolution {
            status: Status::Optimal,
            objective,
            values,
            bound: objective,
            gap: 0.0,
            nodes: 1,
            wall_seconds: 0.0,
        },
        LpOutcome::Infeasible => MipSolution::without_solution(Status::Infeasible, lp.num_vars()),
        LpOutcome::Unbounded => MipSolution::without_solution(Status::Unbounded, lp.num_vars()),
    };
    sol.wall_seconds = start.elapsed().as_secs_f64();
    Ok(sol)
}

pub fn solve_mip(mip: &MixedIntegerProgram, limits: &MipLimits) -> Result<MipSolution> {
    mip.validate()?;
    match limits.backend {
        LpBackend::Dense => bnb::branch_and_bound::<dense::DenseRelaxation>(mip, limits),
        LpBackend::Sparse => bnb::branch_and_bound::<sparse::SparseRelaxation>(mip, limits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn both() -> [LpBackend; 2] {
        [LpBackend::Dense, LpBackend::Sparse]
    }

    #[test]
    fn single_variable_max() {
        for b in both() {
            let mut lp = LinearProgram::new(Sense::Maximize);
            let x = lp.add_var("x", 0.0, f64::INFINITY, 1.0);
            lp.add_constraint("cap", vec![(x, 1.0)], Relation::Le, 3.0);
            let sol = solve_lp_with(&lp, b).unwrap();
            assert_eq!(sol.status, Status::Optimal);
            assert!((sol.objective - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn contradictory_rows() {
        for b in both() {
            let mut lp = LinearProgram::new(Sense::Minimize);
            let x = lp.add_var("x", 0.0, f64::INFINITY, 0.0);
            lp.add_constraint("a", vec![(x, 1.0)], Relation::Le, 0.0);
            lp.add_constraint("b", vec![(x, 1.0)], Relation::Ge, 1.0);
            assert_eq!(solve_lp_with(&lp, b).unwrap().status, Status::Infeasible);
        }
    }

    #[test]
    fn unbounded_ray() {
        for b in both() {
            let mut lp = LinearProgram::new(Sense::Maximize);
            let x = lp.add_var("x", 0.0, f64::INFINITY, 1.0);
            let y = lp.add_var("y", 0.0, f64::INFINITY, 0.0);
            lp.add_constraint("a", vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
            assert_eq!(solve_lp_with(&lp, b).unwrap().status, Status::Unbounded);
        }
    }

    #[test]
    fn free_and_flipped_columns() {
        for b in both() {
            // min x + y with x free, y <= 2, x - y >= -5, x + y >= -1
            let mut lp = LinearProgram::new(Sense::Minimize);
            let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
            let y = lp.add_var("y", f64::NEG_INFINITY, 2.0, 1.0);
            lp.add_constraint("a", vec![(x, 1.0), (y, -1.0)], Relation::Ge, -5.0);
            lp.add_constraint("b", vec![(x, 1.0), (y, 1.0)], Relation::Ge, -1.0);
            let sol = solve_lp_with(&lp, b).unwrap();
            assert_eq!(sol.status, Status::Optimal);
            assert!((sol.objective + 1.0).abs() < 1e-9, "{b:?} {}", sol.objective);
            assert!(lp.max_violation(&sol.values) < 1e-9);
        }
    }

    #[test]
    fn knapsack_pick_one() {
        for b in both() {
            let mut mip = MixedIntegerProgram::new(Sense::Maximize);
            let x = mip.add_binary("x", 3.0, 0);
            let y = mip.add_binary("y", 2.0, 0);
            mip.add_constraint("one", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
            let limits = MipLimits { backend: b, ..Default::default() };
            let sol = solve_mip(&mip, &limits).unwrap();
            assert_eq!(sol.status, Status::Optimal);
            assert!((sol.objective - 3.0).abs() < 1e-9);
            assert_eq!(sol.values, vec![1.0, 0.0]);
        }
    }

    #[test]
    fn integral_relaxation_needs_no_branching() {
        // s-t cut dual on a 2-arc path: min 3a + 5b, a + b >= 1
        let mut mip = MixedIntegerProgram::new(Sense::Minimize);
        let a = mip.add_binary("a", 3.0, 0);
        let b = mip.add_binary("b", 5.0, 0);
        mip.add_constraint("path", vec![(a, 1.0), (b, 1.0)], Relation::Ge, 1.0);
        let sol = solve_mip(&mip, &MipLimits::default()).unwrap();
        assert_eq!(sol.nodes, 1);
        assert_eq!(sol.objective, 3.0);
    }

    #[test]
    fn infeasible_mip() {
        let mut mip = MixedIntegerProgram::new(Sense::Minimize);
        let a = mip.add_binary("a", 1.0, 0);
        let b = mip.add_binary("b", 1.0, 0);
        mip.add_constraint("half", vec![(a, 2.0), (b, 2.0)], Relation::Eq, 1.0);
        let sol = solve_mip(&mip, &MipLimits::default()).unwrap();
        assert_eq!(sol.status, Status::Infeasible);
        assert!(!sol.has_incumbent());
    }

    #[test]
    fn node_limit_reports_bound() {
        let mut mip = MixedIntegerProgram::new(Sense::Maximize);
        let vars: Vec<usize> = (0..8).map(|i| mip.add_binary(format!("x{i}"), 1.0 + i as f64 * 0.1, 0)).collect();
        mip.add_constraint(
            "w",
            vars.iter().map(|&v| (v, 2.0)).collect(),
            Relation::Le,
            7.0,
        );
        let limits = MipLimits { nodes: Some(1), ..Default::default() };
        let sol = solve_mip(&mip, &limits).unwrap();
        assert_eq!(sol.status, Status::LimitReached);
        assert!(sol.bound >= 3.0);
    }

    #[test]
    fn rejects_bad_binary_bounds() {
        let mut mip = MixedIntegerProgram::new(Sense::Minimize);
        let x = mip.add_binary("x", 1.0, 0);
        mip.lp.variables[x].upper = 2.0;
        assert!(solve_mip(&mip, &MipLimits::default()).is_err());
    }
}
