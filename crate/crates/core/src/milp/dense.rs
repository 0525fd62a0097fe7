//! Bounded-variable primal simplex on a dense tableau.

use super::bnb::Relaxation;
use super::{LinearProgram, LpOutcome, Relation, Sense};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-7;
const DEGENERATE_STREAK: usize = 50;

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Clone, Copy, Debug)]
enum ColumnMap {
    /// `x = offset + col`
    Shift(usize, f64),
    /// `x = offset - col`
    Flip(usize, f64),
    /// `x = pos - neg`
    Split(usize, usize),
}

struct Tableau {
    m: usize,
    n: usize,
    a: Vec<f64>,
    /// Current values of the basic variables, one per row.
    b: Vec<f64>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    barred: Vec<bool>,
    d: Vec<f64>,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..self.n {
                    self.d[j] -= cb * self.a[i * self.n + j];
                }
            }
        }
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n {
            if self.is_basic[j] || self.barred[j] {
                continue;
            }
            let dj = self.d[j];
            let improving = if self.at_upper[j] { dj > COST_TOL } else { dj < -COST_TOL };
            if !improving {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|(_, v)| dj.abs() > v) {
                best = Some((j, dj.abs()));
            }
        }
        best.map(|(j, _)| j)
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let n = self.n;
        let p = self.a[r * n + j];
        for k in 0..n {
            self.a[r * n + k] /= p;
        }
        let row: Vec<f64> = self.a[r * n..(r + 1) * n].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * n + j];
            if f != 0.0 {
                for k in 0..n {
                    self.a[i * n + k] -= f * row[k];
                }
                self.a[i * n + j] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for k in 0..n {
                self.d[k] -= f * row[k];
            }
            self.d[j] = 0.0;
        }
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }

    fn run(&mut self, max_iter: usize) -> Result<Phase> {
        let mut streak = 0;
        for _ in 0..max_iter {
            let bland = streak >= DEGENERATE_STREAK;
            let Some(j) = self.entering(bland) else {
                return Ok(Phase::Optimal);
            };
            let sigma = if self.at_upper[j] { -1.0 } else { 1.0 };
            let mut step = self.upper[j];
            let mut leave: Option<(usize, bool, f64)> = None;
            for i in 0..self.m {
                let rate = -sigma * self.at(i, j);
                let bi = self.basis[i];
                let (limit, to_upper) = if rate < -PIVOT_TOL {
                    ((self.b[i] / -rate).max(0.0), false)
                } else if rate > PIVOT_TOL && self.upper[bi].is_finite() {
                    (((self.upper[bi] - self.b[i]) / rate).max(0.0), true)
                } else {
                    continue;
                };
                let take = match leave {
                    None => limit < step - 1e-12,
                    Some((r, _, _)) => {
                        limit < step - 1e-12
                            || (limit <= step + 1e-12
                                && if bland {
                                    bi < self.basis[r]
                                } else {
                                    rate.abs() > self.at(r, j).abs()
                                })
                    }
                };
                if take {
                    leave = Some((i, to_upper, limit));
                    step = step.min(limit);
                }
            }
            if !step.is_finite() {
                return Ok(Phase::Unbounded);
            }
            for i in 0..self.m {
                let delta = -sigma * self.at(i, j) * step;
                self.b[i] += delta;
                if self.b[i] < 0.0 && self.b[i] > -1e-9 {
                    self.b[i] = 0.0;
                }
            }
            let entering_value = if self.at_upper[j] {
                self.upper[j] - step
            } else {
                step
            };
            streak = if step < 1e-12 { streak + 1 } else { 0 };
            match leave {
                Some((r, to_upper, _)) => {
                    if self.at(r, j).abs() < 1e-10 {
                        return Err(Error::Numerical(format!(
                            "pivot element {:e} below threshold",
                            self.at(r, j)
                        )));
                    }
                    let leaving = self.basis[r];
                    self.at_upper[leaving] = to_upper;
                    self.pivot(r, j);
                    self.at_upper[j] = false;
                    self.b[r] = entering_value;
                }
                None => {
                    self.at_upper[j] = !self.at_upper[j];
                }
            }
        }
        Err(Error::Numerical(format!(
            "simplex exceeded {max_iter} iterations"
        )))
    }

    fn column_value(&self, j: usize) -> f64 {
        if self.is_basic[j] {
            let r = self.basis.iter().position(|&b| b == j).unwrap();
            self.b[r]
        } else if self.at_upper[j] {
            self.upper[j]
        } else {
            0.0
        }
    }
}

pub(crate) fn solve(lp: &LinearProgram, lower: &[f64], upper: &[f64]) -> Result<LpOutcome> {
    let mut maps = Vec::with_capacity(lp.num_vars());
    let mut col_upper = Vec::new();
    let mut col_cost = Vec::new();
    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    for (j, v) in lp.variables.iter().enumerate() {
        let (lo, hi) = (lower[j], upper[j]);
        if lo > hi + 1e-12 {
            return Ok(LpOutcome::Infeasible);
        }
        let c = sign * v.objective;
        if lo.is_finite() {
            maps.push(ColumnMap::Shift(col_upper.len(), lo));
            col_upper.push((hi - lo).max(0.0));
            col_cost.push(c);
        } else if hi.is_finite() {
            maps.push(ColumnMap::Flip(col_upper.len(), hi));
            col_upper.push(f64::INFINITY);
            col_cost.push(-c);
        } else {
            let pos = col_upper.len();
            maps.push(ColumnMap::Split(pos, pos + 1));
            col_upper.extend([f64::INFINITY, f64::INFINITY]);
            col_cost.extend([c, -c]);
        }
    }
    let structural = col_upper.len();
    let m = lp.constraints.len();

    // rows over structural columns, plus slack info
    let mut rows: Vec<(Vec<(usize, f64)>, f64, Option<f64>)> = Vec::with_capacity(m);
    for c in &lp.constraints {
        let mut coeffs = Vec::with_capacity(c.coeffs.len());
        let mut rhs = c.rhs;
        for &(j, a) in &c.coeffs {
            match maps[j] {
                ColumnMap::Shift(col, off) => {
                    coeffs.push((col, a));
                    rhs -= a * off;
                }
                ColumnMap::Flip(col, off) => {
                    coeffs.push((col, -a));
                    rhs -= a * off;
                }
                ColumnMap::Split(p, q) => {
                    coeffs.push((p, a));
                    coeffs.push((q, -a));
                }
            }
        }
        let slack = match c.relation {
            Relation::Le => Some(1.0),
            Relation::Ge => Some(-1.0),
            Relation::Eq => None,
        };
        rows.push((coeffs, rhs, slack));
    }
    let num_slack = rows.iter().filter(|r| r.2.is_some()).count();
    let mut needs_art = Vec::with_capacity(m);
    for (_, rhs, slack) in &rows {
        let flip = *rhs < 0.0;
        let slack_coef = slack.map(|s| if flip { -s } else { s });
        needs_art.push(slack_coef != Some(1.0));
    }
    let num_art = needs_art.iter().filter(|&&a| a).count();
    let n = structural + num_slack + num_art;

    let mut t = Tableau {
        m,
        n,
        a: vec![0.0; m * n],
        b: vec![0.0; m],
        upper: vec![f64::INFINITY; n],
        at_upper: vec![false; n],
        basis: vec![0; m],
        is_basic: vec![false; n],
        barred: vec![false; n],
        d: vec![0.0; n],
    };
    t.upper[..structural].copy_from_slice(&col_upper);
    let mut next_slack = structural;
    let mut next_art = structural + num_slack;
    for (i, (coeffs, rhs, slack)) in rows.iter().enumerate() {
        let f = if *rhs < 0.0 { -1.0 } else { 1.0 };
        for &(col, a) in coeffs {
            t.a[i * n + col] += f * a;
        }
        t.b[i] = f * rhs;
        if let Some(s) = slack {
            t.a[i * n + next_slack] = f * s;
            if !needs_art[i] {
                t.basis[i] = next_slack;
                t.is_basic[next_slack] = true;
            }
            next_slack += 1;
        }
        if needs_art[i] {
            t.a[i * n + next_art] = 1.0;
            t.basis[i] = next_art;
            t.is_basic[next_art] = true;
            next_art += 1;
        }
    }
    let max_iter = 50 * (m + n) + 10_000;
    let art_start = structural + num_slack;

    if num_art > 0 {
        let mut cost = vec![0.0; n];
        cost[art_start..].iter_mut().for_each(|c| *c = 1.0);
        t.price(&cost);
        t.run(max_iter)?;
        let infeas: f64 = (0..m)
            .filter(|&i| t.basis[i] >= art_start)
            .map(|i| t.b[i])
            .sum();
        if infeas > PHASE1_TOL {
            return Ok(LpOutcome::Infeasible);
        }
        for r in 0..m {
            if t.basis[r] < art_start {
                continue;
            }
            let replacement = (0..art_start)
                .filter(|&j| !t.is_basic[j])
                .max_by(|&p, &q| t.at(r, p).abs().total_cmp(&t.at(r, q).abs()).then(q.cmp(&p)));
            if let Some(j) = replacement.filter(|&j| t.at(r, j).abs() > PIVOT_TOL) {
                let value = t.column_value(j);
                t.pivot(r, j);
                t.at_upper[j] = false;
                t.b[r] = value;
            }
        }
        for j in art_start..n {
            t.upper[j] = 0.0;
            t.barred[j] = true;
        }
    }

    let mut cost = vec![0.0; n];
    cost[..structural].copy_from_slice(&col_cost);
    t.price(&cost);
    if let Phase::Unbounded = t.run(max_iter)? {
        return Ok(LpOutcome::Unbounded);
    }

    let cols: Vec<f64> = (0..structural).map(|j| t.column_value(j)).collect();
    let values: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            ColumnMap::Shift(c, off) => off + cols[c],
            ColumnMap::Flip(c, off) => off - cols[c],
            ColumnMap::Split(p, q) => cols[p] - cols[q],
        })
        .collect();
    Ok(LpOutcome::Optimal {
        objective: lp.objective_value(&values),
        values,
    })
}

/// Branch-and-bound node state: cold re-solve with tightened bounds.
#[derive(Clone)]
pub(crate) struct DenseRelaxation {
    lp: std::sync::Arc<LinearProgram>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: f64,
    values: Vec<f64>,
}

impl Relaxation for DenseRelaxation {
    fn root(lp: &LinearProgram) -> Result<std::result::Result<Self, LpOutcome>> {
        let lower: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
        let upper: Vec<f64> = lp.variables.iter().map(|v| v.upper).collect();
        match solve(lp, &lower, &upper)? {
            LpOutcome::Optimal { objective, values } => Ok(Ok(DenseRelaxation {
                lp: std::sync::Arc::new(lp.clone()),
                lower,
                upper,
                objective,
                values,
            })),
            other => Ok(Err(other)),
        }
    }

    fn objective(&self) -> f64 {
        self.objective
    }

    fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    fn fix(mut self, var: usize, value: f64) -> Result<Option<Self>> {
        self.lower[var] = value;
        self.upper[var] = value;
        match solve(&self.lp, &self.lower, &self.upper)? {
            LpOutcome::Optimal { objective, values } => {
                self.objective = objective;
                self.values = values;
                Ok(Some(self))
            }
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded => Err(Error::Numerical(
                "bounded subproblem reported unbounded".into(),
            )),
        }
    }
}
