//! Column-and-constraint generation for the interdiction game with
//! restructuring, plus an exhaustive oracle for small instances.

use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formulate::{self, MasterModel, PlanPool};
use crate::milp::{self, MipLimits, Status};
use crate::network::{self, LayeredNetwork};
use crate::restructure::{
    enumerate_y, enumerate_z, feasible, is_interdiction_feasible, InterdictionPlan,
    InterdictionRules, RestructurePlan, RestructureRules,
};

/// Float noise allowed on top of epsilon when comparing bounds.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    PartialInfo,
    Baseline,
    Enumerate,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::PartialInfo => "partial",
            Mode::Baseline => "baseline",
            Mode::Enumerate => "enumerate",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "partial" => Ok(Mode::PartialInfo),
            "baseline" => Ok(Mode::Baseline),
            "enumerate" => Ok(Mode::Enumerate),
            other => Err(Error::validation(format!(
                "unknown mode {other:?} (expected partial, baseline or enumerate)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CcgConfig {
    pub mode: Mode,
    pub epsilon: f64,
    pub time_limit: Option<Duration>,
    pub max_iterations: Option<usize>,
    /// Node cap for each master and subproblem solve.
    pub node_limit: Option<usize>,
    /// Upper limit on enumerated interdictions or plans in `Enumerate` mode.
    pub enumeration_cap: usize,
    pub backend: milp::LpBackend,
}

impl Default for CcgConfig {
    fn default() -> Self {
        CcgConfig {
            mode: Mode::PartialInfo,
            epsilon: 1e-4,
            time_limit: None,
            max_iterations: None,
            node_limit: None,
            enumeration_cap: 1_000_000,
            backend: milp::LpBackend::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CcgStatus {
    Optimal,
    TimeLimit,
    IterationLimit,
}

impl fmt::Display for CcgStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CcgStatus::Optimal => "optimal",
            CcgStatus::TimeLimit => "time_limit",
            CcgStatus::IterationLimit => "iteration_limit",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Master objective.
    pub eta: f64,
    /// Subproblem value at the master's interdiction; `None` when the loop
    /// stopped before solving it.
    pub eta_hat: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    pub interdicted: Vec<usize>,
    pub pool_size: usize,
    pub new_plan: bool,
    pub master_seconds: f64,
    pub subproblem_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CcgResult {
    pub mode: Mode,
    pub lower: f64,
    pub upper: f64,
    pub status: CcgStatus,
    pub interdiction: InterdictionPlan,
    pub restructuring: RestructurePlan,
    pub iterations: Vec<IterationRecord>,
    /// Subproblem plans returned over the run, duplicates included.
    pub plans_visited: usize,
    pub wall_seconds: f64,
}

impl CcgResult {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    /// Gap relative to the upper bound, 0 when both bounds are 0.
    pub fn relative_gap(&self) -> f64 {
        if self.upper.abs() <= f64::EPSILON {
            0.0
        } else {
            (self.upper - self.lower).max(0.0) / self.upper
        }
    }
}

struct Clock {
    start: Instant,
    limit: Option<Duration>,
}

impl Clock {
    fn remaining(&self) -> Option<Duration> {
        self.limit.map(|l| l.saturating_sub(self.start.elapsed()))
    }

    fn expired(&self) -> bool {
        self.remaining().is_some_and(|r| r.is_zero())
    }

    fn limits(&self, config: &CcgConfig) -> MipLimits {
        MipLimits {
            time: self.remaining(),
            nodes: config.node_limit,
            backend: config.backend,
            ..Default::default()
        }
    }
}

/// Best restructuring against a fixed interdiction: value and plan.
pub fn evaluate_after_plan(
    net: &LayeredNetwork,
    rules: &RestructureRules,
    y: &InterdictionPlan,
    limits: &MipLimits,
) -> Result<(f64, RestructurePlan)> {
    let sub = formulate::build_subproblem(net, rules, y)?;
    let sol = milp::solve_mip(&sub.mip, limits)?;
    if !sol.has_incumbent() {
        return Err(Error::Internal(format!("subproblem ended {:?} without a plan", sol.status)));
    }
    let plan = sub.plan(&sol.values);
    let report = feasible(net, rules, y, &plan);
    if !report.is_feasible() {
        return Err(Error::Internal(format!(
            "subproblem plan violates {:?}",
            report.families()
        )));
    }
    let snet = network::split_nodes(net)?;
    Ok((network::max_flow(&snet, y, &plan).value, plan))
}

/// Interdiction without restructuring: optimal value and plan.
pub fn solve_mfnip(
    net: &LayeredNetwork,
    rules: &InterdictionRules,
    limits: &MipLimits,
) -> Result<(f64, InterdictionPlan, Status)> {
    let model = formulate::build_mfnip(net, rules)?;
    let sol = milp::solve_mip(&model.mip, limits)?;
    if !sol.has_incumbent() {
        return Err(match sol.status {
            Status::Infeasible => Error::Infeasible("no interdiction plan satisfies the rules".into()),
            other => Error::Internal(format!("interdiction model ended {other:?} without a plan")),
        });
    }
    let y = model.interdiction(&sol.values);
    let snet = network::split_nodes(net)?;
    let value = network::max_flow(&snet, &y, &RestructurePlan::empty(net.restructurable_arcs.len())).value;
    Ok((value, y, sol.status))
}

pub fn solve(
    net: &LayeredNetwork,
    irules: &InterdictionRules,
    rrules: &RestructureRules,
    config: &CcgConfig,
) -> Result<CcgResult> {
    if !(config.epsilon >= 0.0) {
        return Err(Error::validation("epsilon must be non-negative"));
    }
    if !(irules.budget >= 0.0) {
        return Err(Error::validation("interdiction budget must be non-negative"));
    }
    net.validate()?;
    rrules.validate(net)?;
    if config.mode == Mode::Enumerate {
        return solve_enumerate(net, irules, rrules, config.enumeration_cap);
    }
    let build: fn(&LayeredNetwork, &InterdictionRules, &PlanPool) -> Result<MasterModel> =
        match config.mode {
            Mode::Baseline => formulate::build_baseline_master,
            _ => formulate::build_master,
        };
    let clock = Clock {
        start: Instant::now(),
        limit: config.time_limit,
    };
    let m = net.restructurable_arcs.len();
    let snet = network::split_nodes(net)?;
    let mut pool = PlanPool::seeded(m);
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut incumbent = (InterdictionPlan::none(net.num_nodes()), RestructurePlan::empty(m));
    let mut log: Vec<IterationRecord> = Vec::new();
    let mut plans_visited = 0;
    let mut last_duration = Duration::ZERO;

    let status = loop {
        let iteration = log.len() + 1;
        if config.max_iterations.is_some_and(|cap| iteration > cap) {
            break CcgStatus::IterationLimit;
        }
        if let Some(limit) = clock.limit {
            if iteration > 1 && clock.start.elapsed() + last_duration >= limit {
                break CcgStatus::TimeLimit;
            }
        }
        let began = Instant::now();

        let master = build(net, irules, &pool)?;
        let sol = milp::solve_mip(&master.mip, &clock.limits(config))?;
        let master_seconds = began.elapsed().as_secs_f64();
        match sol.status {
            Status::Optimal => lower = lower.max(sol.objective),
            Status::LimitReached => lower = lower.max(sol.bound),
            Status::Infeasible => {
                return Err(Error::Infeasible("no interdiction plan satisfies the rules".into()))
            }
            Status::Unbounded => return Err(Error::Internal("master is unbounded".into())),
        }
        let mut record = IterationRecord {
            iteration,
            eta: sol.objective,
            eta_hat: None,
            lower,
            upper,
            interdicted: Vec::new(),
            pool_size: pool.len(),
            new_plan: false,
            master_seconds,
            subproblem_seconds: 0.0,
        };
        if sol.status == Status::LimitReached {
            log.push(record);
            break CcgStatus::TimeLimit;
        }
        if upper - lower <= config.epsilon + BOUND_SLACK {
            log.push(record);
            break CcgStatus::Optimal;
        }

        let y_hat = master.interdiction(&sol.values);
        if !is_interdiction_feasible(net, irules, &y_hat) {
            return Err(Error::Internal("master returned an infeasible interdiction".into()));
        }
        record.interdicted = y_hat.interdicted();
        let sub_began = Instant::now();
        let sub = formulate::build_subproblem(net, rrules, &y_hat)?;
        let sub_sol = milp::solve_mip(&sub.mip, &clock.limits(config))?;
        record.subproblem_seconds = sub_began.elapsed().as_secs_f64();
        if sub_sol.status != Status::Optimal {
            log.push(record);
            break CcgStatus::TimeLimit;
        }
        let plan = sub.plan(&sub_sol.values);
        let report = feasible(net, rrules, &y_hat, &plan);
        if !report.is_feasible() {
            return Err(Error::Internal(format!(
                "subproblem plan violates {:?}",
                report.families()
            )));
        }
        let eta_hat = network::max_flow(&snet, &y_hat, &plan).value;
        plans_visited += 1;
        if eta_hat < upper - 1e-9 {
            upper = eta_hat;
            incumbent = (y_hat.clone(), plan.clone());
        }
        record.eta_hat = Some(eta_hat);
        record.upper = upper;
        record.new_plan = pool.push(plan, iteration, y_hat);
        record.pool_size = pool.len();
        let repeated = !record.new_plan;
        log.push(record);
        last_duration = began.elapsed();

        // A repeated plan already bounds the master from below by its value.
        if upper - lower <= config.epsilon + BOUND_SLACK || repeated {
            break CcgStatus::Optimal;
        }
        if clock.expired() {
            break CcgStatus::TimeLimit;
        }
    };

    Ok(CcgResult {
        mode: config.mode,
        lower,
        upper,
        status,
        interdiction: incumbent.0,
        restructuring: incumbent.1,
        iterations: log,
        plans_visited,
        wall_seconds: clock.start.elapsed().as_secs_f64(),
    })
}

/// Exact optimum by enumerating every interdiction and every plan.
pub fn solve_enumerate(
    net: &LayeredNetwork,
    irules: &InterdictionRules,
    rrules: &RestructureRules,
    cap: usize,
) -> Result<CcgResult> {
    let start = Instant::now();
    let snet = network::split_nodes(net)?;
    let mut best: Option<(f64, InterdictionPlan, RestructurePlan)> = None;
    let mut plans_visited = 0;
    let ys = enumerate_y(net, irules, cap)?;
    if ys.is_empty() {
        return Err(Error::Infeasible("no interdiction plan satisfies the rules".into()));
    }
    for y in ys {
        let mut response: Option<(f64, RestructurePlan)> = None;
        for z in enumerate_z(net, rrules, &y, cap)? {
            plans_visited += 1;
            let value = network::max_flow(&snet, &y, &z).value;
            if response.as_ref().is_none_or(|(v, _)| value > *v + 1e-12) {
                response = Some((value, z));
            }
        }
        let (value, z) = response.expect("the empty plan is always feasible");
        if best.as_ref().is_none_or(|(v, _, _)| value < *v - 1e-12) {
            best = Some((value, y, z));
        }
    }
    let (value, y, z) = best.expect("at least one interdiction");
    Ok(CcgResult {
        mode: Mode::Enumerate,
        lower: value,
        upper: value,
        status: CcgStatus::Optimal,
        interdiction: y,
        restructuring: z,
        iterations: Vec::new(),
        plans_visited,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
