//! Builders for every optimization model the solver uses.
//!
//! Cut blocks use node potentials `pi` (1 on the source side, 0 on the sink
//! side, with `pi[s] = 1`, `pi[t] = 0` and other pinned potentials folded
//! into the right-hand sides)
//! and cut indicators `theta` on capacitated arcs only. Uncapacitated arcs
//! never appear in a minimum cut, so their rows carry no `theta`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::milp::{self, LinearProgram, MixedIntegerProgram, Relation, Sense, Status};
use crate::network::{self, ArcOrigin, LayeredNetwork, NodeId, SplitNetwork};
use crate::restructure::{
    interdicted_neighbours, permissions, InterdictionPlan, InterdictionRules, RestructurePlan,
    RestructureRules, Side,
};

/// Branching tiers.
const PRIORITY_Y: u32 = 2;
const PRIORITY_LINK: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct PoolEntry {
    pub plan: RestructurePlan,
    pub iteration: usize,
    /// The interdiction the plan answered; `None` for the seed plan.
    pub source: Option<InterdictionPlan>,
}

/// Restructuring plans that have been added to the master, in order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlanPool {
    entries: Vec<PoolEntry>,
}

impl PlanPool {
    /// A pool holding only the null plan.
    pub fn seeded(num_arcs: usize) -> Self {
        PlanPool {
            entries: vec![PoolEntry {
                plan: RestructurePlan::empty(num_arcs),
                iteration: 0,
                source: None,
            }],
        }
    }

    /// Adds a plan unless it is already present; returns whether it was new.
    pub fn push(&mut self, plan: RestructurePlan, iteration: usize, source: InterdictionPlan) -> bool {
        if self.contains(&plan) {
            return false;
        }
        self.entries.push(PoolEntry {
            plan,
            iteration,
            source: Some(source),
        });
        true
    }

    pub fn contains(&self, plan: &RestructurePlan) -> bool {
        self.entries.iter().any(|e| &e.plan == plan)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn plans(&self) -> impl Iterator<Item = &RestructurePlan> {
        self.entries.iter().map(|e| &e.plan)
    }
}

/// Column indices of one plan's cut variables.
#[derive(Clone, Debug, PartialEq)]
pub struct DualBlock {
    /// Per split node; `None` for the terminals and nodes with a pinned potential.
    pub pi: Vec<Option<usize>>,
    /// Per split arc (base arcs then restructurable arcs); `None` for arcs
    /// without a cut indicator.
    pub theta: Vec<Option<usize>>,
}

/// A master or MFNIP model together with the columns callers need.
#[derive(Clone, Debug)]
pub struct MasterModel {
    pub mip: MixedIntegerProgram,
    pub y: Vec<usize>,
    pub eta: Option<usize>,
    pub w_in: BTreeMap<NodeId, usize>,
    pub w_out: BTreeMap<NodeId, usize>,
    pub f: Vec<Option<usize>>,
    pub blocks: Vec<DualBlock>,
}

impl MasterModel {
    pub fn interdiction(&self, values: &[f64]) -> InterdictionPlan {
        InterdictionPlan {
            y: self.y.iter().map(|&j| values[j] > 0.5).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SubproblemModel {
    pub mip: MixedIntegerProgram,
    pub z_in: Vec<Option<usize>>,
    pub z_out: Vec<Option<usize>>,
    /// Flow column per split arc, `None` where the arc cannot carry flow.
    pub flow: Vec<Option<usize>>,
}

impl SubproblemModel {
    pub fn plan(&self, values: &[f64]) -> RestructurePlan {
        let pick = |cols: &[Option<usize>]| -> Vec<bool> {
            cols.iter().map(|c| c.is_some_and(|j| values[j] > 0.5)).collect()
        };
        RestructurePlan {
            z_in: pick(&self.z_in),
            z_out: pick(&self.z_out),
        }
    }
}

/// Attacker columns and the rows of `Y`.
fn add_interdiction_block(
    mip: &mut MixedIntegerProgram,
    net: &LayeredNetwork,
    rules: &InterdictionRules,
) -> Vec<usize> {
    let adj = net.adjacency();
    let y: Vec<usize> = net
        .nodes
        .iter()
        .map(|node| {
            let j = mip.add_binary(format!("y[{}]", node.id), 0.0, PRIORITY_Y + node.layer);
            let affordable = node.interdiction_cost <= rules.budget + 1e-9;
            let climbable = node.tau as usize <= adj.children[node.id].len();
            if !(affordable && climbable) {
                mip.lp.variables[j].upper = 0.0;
            }
            j
        })
        .collect();
    let budget: Vec<(usize, f64)> = net
        .nodes
        .iter()
        .filter(|n| n.interdiction_cost != 0.0)
        .map(|n| (y[n.id], n.interdiction_cost))
        .collect();
    mip.add_constraint("budget", budget, Relation::Le, rules.budget);
    for node in &net.nodes {
        if node.tau == 0 {
            continue;
        }
        let mut row = vec![(y[node.id], node.tau as f64)];
        row.extend(adj.children[node.id].iter().map(|&c| (y[c], -1.0)));
        mip.add_constraint(format!("ladder[{}]", node.id), row, Relation::Le, 0.0);
    }
    if let Some(lead) = &rules.leadership {
        let row = lead.nodes.iter().map(|&i| (y[i], 1.0)).collect();
        mip.add_constraint("leadership", row, Relation::Ge, lead.min_count as f64);
    }
    y
}

/// Potentials some minimum cut always attains: a node fed only by the source
/// with at least its outgoing capacity sits on the source side, and a node
/// draining only into the sink with at least its incoming capacity sits on
/// the sink side.
fn pinned_potentials(snet: &SplitNetwork) -> Vec<Option<f64>> {
    let n = snet.num_nodes;
    let mut into = vec![Vec::new(); n];
    let mut out = vec![Vec::new(); n];
    for arc in snet.arcs.iter().chain(&snet.restructurable) {
        into[arc.head].push(arc);
        out[arc.tail].push(arc);
    }
    let total = |arcs: &[&network::SplitArc]| -> Option<f64> {
        arcs.iter()
            .map(|a| (!a.is_uncapacitated()).then_some(a.capacity))
            .sum()
    };
    let mut pins = vec![None; n];
    pins[snet.source] = Some(1.0);
    pins[snet.sink] = Some(0.0);
    for v in 0..n {
        if v == snet.source || v == snet.sink {
            continue;
        }
        let fed = into[v].iter().all(|a| a.tail == snet.source);
        if fed && !into[v].is_empty() {
            if let (Some(supply), Some(onward)) = (total(&into[v]), total(&out[v])) {
                if supply >= onward {
                    pins[v] = Some(1.0);
                    continue;
                }
            }
        }
        let drains = out[v].iter().all(|a| a.head == snet.sink);
        if drains && !out[v].is_empty() {
            if let (Some(demand), Some(inflow)) = (total(&out[v]), total(&into[v])) {
                if demand >= inflow {
                    pins[v] = Some(0.0);
                }
            }
        }
    }
    pins
}

/// Per restructurable arc activated by the plan, the column that switches
/// its row on.
type Switch<'a> = dyn Fn(usize, Side) -> usize + 'a;

/// Shifted cut rows for one plan. Returns the block and the `u * theta` terms.
fn add_cut_block(
    mip: &mut MixedIntegerProgram,
    snet: &SplitNetwork,
    k: usize,
    y: &[usize],
    plan: Option<&RestructurePlan>,
    switch: &Switch<'_>,
) -> (DualBlock, Vec<(usize, f64)>) {
    let pins = pinned_potentials(snet);
    let pi: Vec<Option<usize>> = pins
        .iter()
        .enumerate()
        .map(|(v, pin)| {
            pin.is_none()
                .then(|| mip.add_continuous(format!("pi[{k}][{v}]"), 0.0, 1.0, 0.0))
        })
        .collect();
    // terms and constant of pi[v] with the pinned nodes folded in
    let pot = |v: usize| -> (Option<usize>, f64) { (pi[v], pins[v].unwrap_or(0.0)) };
    let mut theta = vec![None; snet.total_arcs()];
    let mut cost = Vec::new();
    for (a, arc) in snet.arcs.iter().enumerate() {
        let (head, hc) = pot(arc.head);
        let (tail, tc) = pot(arc.tail);
        let mut row = Vec::with_capacity(4);
        if let Some(h) = head {
            row.push((h, 1.0));
        }
        if let Some(t) = tail {
            row.push((t, -1.0));
        }
        let mut rhs = tc - hc;
        if row.is_empty() && rhs <= 0.0 && !matches!(arc.origin, ArcOrigin::Node(_)) {
            continue;
        }
        if !arc.is_uncapacitated() {
            if arc.capacity == 0.0 {
                continue;
            }
            let th = mip.add_continuous(format!("theta[{k}][{a}]"), 0.0, 1.0, 0.0);
            theta[a] = Some(th);
            row.push((th, 1.0));
            cost.push((th, arc.capacity));
        }
        if let ArcOrigin::Node(i) = arc.origin {
            row.push((y[i], 1.0));
        }
        if row.is_empty() {
            continue;
        }
        if rhs == 0.0 {
            rhs = 0.0;
        }
        mip.add_constraint(format!("cut[{k}][{a}]"), row, Relation::Ge, rhs);
    }
    if let Some(plan) = plan {
        for (r, side) in plan.activations() {
            let arc = &snet.restructurable[r];
            let w = switch(r, side);
            let (head, hc) = pot(arc.head);
            let (tail, tc) = pot(arc.tail);
            let mut row: Vec<(usize, f64)> = head.into_iter().map(|h| (h, 1.0)).collect();
            row.extend(tail.map(|t| (t, -1.0)));
            row.push((w, -1.0));
            mip.add_constraint(format!("cut_{side}[{k}][{r}]"), row, Relation::Ge, tc - hc - 1.0);
        }
    }
    (DualBlock { pi, theta }, cost)
}

/// MFNIP in shifted dual form: restructuring disabled.
pub fn build_mfnip(net: &LayeredNetwork, rules: &InterdictionRules) -> Result<MasterModel> {
    let snet = network::split_nodes(net)?;
    let mut mip = MixedIntegerProgram::new(Sense::Minimize);
    let y = add_interdiction_block(&mut mip, net, rules);
    let (block, cost) = add_cut_block(&mut mip, &snet, 0, &y, None, &|_, _| unreachable!());
    for (j, u) in cost {
        mip.lp.variables[j].objective = u;
    }
    Ok(MasterModel {
        mip,
        y,
        eta: None,
        w_in: BTreeMap::new(),
        w_out: BTreeMap::new(),
        f: vec![None],
        blocks: vec![block],
    })
}

fn add_eta(mip: &mut MixedIntegerProgram, snet: &SplitNetwork) -> usize {
    let cap: f64 = snet
        .arcs
        .iter()
        .filter(|a| !a.is_uncapacitated())
        .map(|a| a.capacity)
        .sum();
    mip.add_continuous("eta", 0.0, cap, 1.0)
}

fn add_eta_row(mip: &mut MixedIntegerProgram, k: usize, eta: usize, cost: Vec<(usize, f64)>) {
    let mut row = vec![(eta, 1.0)];
    row.extend(cost.into_iter().map(|(j, u)| (j, -u)));
    mip.add_constraint(format!("eta[{k}]"), row, Relation::Ge, 0.0);
}

/// Permission columns for every node some plan needs, with exact-degree
/// Big-M rows.
fn add_permissions(
    mip: &mut MixedIntegerProgram,
    net: &LayeredNetwork,
    pool: &PlanPool,
    y: &[usize],
) -> (BTreeMap<NodeId, usize>, BTreeMap<NodeId, usize>) {
    let adj = net.adjacency();
    let mut heads = std::collections::BTreeSet::new();
    let mut tails = std::collections::BTreeSet::new();
    for plan in pool.plans() {
        for (r, side) in plan.activations() {
            let arc = &net.restructurable_arcs[r];
            match side {
                Side::In => heads.insert(arc.head),
                Side::Out => tails.insert(arc.tail),
            };
        }
    }
    let mut w_in = BTreeMap::new();
    for j in heads {
        let w = mip.add_binary(format!("w_in[{j}]"), 0.0, PRIORITY_LINK);
        let parents = &adj.parents[j];
        if parents.is_empty() {
            mip.lp.variables[w].upper = 0.0;
        } else {
            let mut row = vec![(w, parents.len() as f64)];
            row.extend(parents.iter().map(|&p| (y[p], -1.0)));
            mip.add_constraint(format!("bigm_in[{j}]"), row, Relation::Ge, 0.0);
        }
        w_in.insert(j, w);
    }
    let mut w_out = BTreeMap::new();
    for i in tails {
        let w = mip.add_binary(format!("w_out[{i}]"), 0.0, PRIORITY_LINK);
        let children = &adj.children[i];
        if children.is_empty() {
            mip.lp.variables[w].upper = 0.0;
        } else {
            let mut row = vec![(w, children.len() as f64)];
            row.extend(children.iter().map(|&c| (y[c], -1.0)));
            mip.add_constraint(format!("bigm_out[{i}]"), row, Relation::Ge, 0.0);
        }
        w_out.insert(i, w);
    }
    (w_in, w_out)
}

fn check_pool(net: &LayeredNetwork, pool: &PlanPool) -> Result<()> {
    if pool.is_empty() {
        return Err(Error::validation("plan pool must hold at least the null plan"));
    }
    let m = net.restructurable_arcs.len();
    if pool.plans().any(|p| p.len() != m || p.z_out.len() != m) {
        return Err(Error::validation("pool plan does not match the restructurable arc count"));
    }
    Ok(())
}

/// Master with partial information: every pool plan is projected onto the
/// arcs the candidate interdiction permits.
pub fn build_master(
    net: &LayeredNetwork,
    irules: &InterdictionRules,
    pool: &PlanPool,
) -> Result<MasterModel> {
    master(net, irules, pool, false)
}

/// Master of the comparison method: a plan counts only when every arc in it
/// is permitted, tracked by one indicator `f[k]` per plan.
pub fn build_baseline_master(
    net: &LayeredNetwork,
    irules: &InterdictionRules,
    pool: &PlanPool,
) -> Result<MasterModel> {
    master(net, irules, pool, true)
}

fn master(
    net: &LayeredNetwork,
    irules: &InterdictionRules,
    pool: &PlanPool,
    baseline: bool,
) -> Result<MasterModel> {
    check_pool(net, pool)?;
    let snet = network::split_nodes(net)?;
    let mut mip = MixedIntegerProgram::new(Sense::Minimize);
    let eta = add_eta(&mut mip, &snet);
    let y = add_interdiction_block(&mut mip, net, irules);
    let (w_in, w_out) = add_permissions(&mut mip, net, pool, &y);
    let mut f = Vec::with_capacity(pool.len());
    let mut blocks = Vec::with_capacity(pool.len());
    for (k, plan) in pool.plans().enumerate() {
        let acts = plan.activations();
        let fk = if baseline && !acts.is_empty() {
            let fk = mip.add_binary(format!("f[{k}]"), 0.0, PRIORITY_LINK);
            let mut row = vec![(fk, 1.0)];
            for &(r, side) in &acts {
                let arc = &net.restructurable_arcs[r];
                let w = match side {
                    Side::In => w_in[&arc.head],
                    Side::Out => w_out[&arc.tail],
                };
                row.push((w, -1.0));
            }
            mip.add_constraint(format!("count[{k}]"), row, Relation::Ge, 1.0 - acts.len() as f64);
            Some(fk)
        } else {
            None
        };
        f.push(fk);
        let switch = |r: usize, side: Side| match (fk, side) {
            (Some(fk), _) => fk,
            (None, Side::In) => w_in[&net.restructurable_arcs[r].head],
            (None, Side::Out) => w_out[&net.restructurable_arcs[r].tail],
        };
        let (block, cost) = add_cut_block(&mut mip, &snet, k, &y, Some(plan), &switch);
        add_eta_row(&mut mip, k, eta, cost);
        blocks.push(block);
    }
    Ok(MasterModel {
        mip,
        y,
        eta: Some(eta),
        w_in,
        w_out,
        f,
        blocks,
    })
}

/// The defender's best response to a fixed interdiction.
pub fn build_subproblem(
    net: &LayeredNetwork,
    rules: &RestructureRules,
    y_hat: &InterdictionPlan,
) -> Result<SubproblemModel> {
    rules.validate(net)?;
    let snet = network::split_nodes(net)?;
    let adj = net.adjacency();
    let (children_hit, parents_hit) = interdicted_neighbours(&adj, y_hat);
    let w = permissions(net, y_hat);
    let m = net.restructurable_arcs.len();
    let mut mip = MixedIntegerProgram::new(Sense::Maximize);

    let mut flow = vec![None; snet.total_arcs()];
    for (a, arc) in snet.arcs.iter().enumerate() {
        let upper = match arc.origin {
            ArcOrigin::Node(i) if y_hat.is_interdicted(i) => 0.0,
            ArcOrigin::Base(_) => f64::INFINITY,
            _ => arc.capacity,
        };
        if upper == 0.0 {
            continue;
        }
        let obj = if arc.head == snet.sink { 1.0 } else { 0.0 };
        flow[a] = Some(mip.add_continuous(format!("x[{a}]"), 0.0, upper, obj));
    }
    let mut z_in = vec![None; m];
    let mut z_out = vec![None; m];
    for (r, arc) in net.restructurable_arcs.iter().enumerate() {
        if w.w_in[r] {
            z_in[r] = Some(mip.add_binary(format!("z_in[{r}]"), 0.0, PRIORITY_LINK));
        }
        if w.w_out[r] && !rules.out_forbidden(net, r) {
            z_out[r] = Some(mip.add_binary(format!("z_out[{r}]"), 0.0, PRIORITY_LINK));
        }
        if z_in[r].is_none() && z_out[r].is_none() {
            continue;
        }
        let big_m = net.nodes[arc.tail].capacity.min(net.nodes[arc.head].capacity);
        let a = snet.restructurable_index(r);
        let x = mip.add_continuous(format!("x[{a}]"), 0.0, big_m, 0.0);
        flow[a] = Some(x);
        let mut row = vec![(x, 1.0)];
        row.extend(z_in[r].iter().chain(&z_out[r]).map(|&z| (z, -big_m)));
        mip.add_constraint(format!("activate[{r}]"), row, Relation::Le, 0.0);
        if let (Some(zi), Some(zo)) = (z_in[r], z_out[r]) {
            mip.add_constraint(format!("one_side[{r}]"), vec![(zi, 1.0), (zo, 1.0)], Relation::Le, 1.0);
        }
    }

    let mut balance: Vec<Vec<(usize, f64)>> = vec![Vec::new(); snet.num_nodes];
    for (a, arc) in snet.all_arcs().enumerate() {
        if let Some(x) = flow[a] {
            balance[arc.tail].push((x, -1.0));
            balance[arc.head].push((x, 1.0));
        }
    }
    for (v, row) in balance.into_iter().enumerate() {
        if v != snet.source && v != snet.sink && !row.is_empty() {
            mip.add_constraint(format!("balance[{v}]"), row, Relation::Eq, 0.0);
        }
    }

    let n = net.nodes.len();
    let mut out_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut in_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut spend = Vec::new();
    for (r, arc) in net.restructurable_arcs.iter().enumerate() {
        if let Some(z) = z_out[r] {
            out_rows[arc.tail].push((z, 1.0));
            spend.push((z, rules.arc_cost[r]));
        }
        if let Some(z) = z_in[r] {
            in_rows[arc.head].push((z, 1.0));
            spend.push((z, rules.arc_cost[r]));
        }
    }
    for (i, row) in out_rows.into_iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        mip.add_constraint(format!("out_limit[{i}]"), row.clone(), Relation::Le, rules.l[i] as f64);
        let allowance = rules.k[i] as f64 * children_hit[i] as f64;
        mip.add_constraint(format!("out_reaction[{i}]"), row, Relation::Le, allowance);
    }
    for (j, row) in in_rows.into_iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        mip.add_constraint(format!("in_limit[{j}]"), row.clone(), Relation::Le, rules.s[j] as f64);
        let allowance = rules.k[j] as f64 * parents_hit[j] as f64;
        mip.add_constraint(format!("in_reaction[{j}]"), row, Relation::Le, allowance);
    }
    if !spend.is_empty() {
        mip.add_constraint("resources", spend, Relation::Le, rules.budget);
    }
    Ok(SubproblemModel {
        mip,
        z_in,
        z_out,
        flow,
    })
}

/// Optimal values of the two dual forms and the combinatorial flow for a
/// fixed `(y, z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualEquivalence {
    pub weighted: f64,
    pub shifted: f64,
    pub max_flow: f64,
}

/// Builds both dual LPs for fixed `(y, z)`: the capacity-weighted form with
/// unshifted rows, and the shifted form with plain capacities.
pub fn dual_lps(
    snet: &SplitNetwork,
    y: &InterdictionPlan,
    z: &RestructurePlan,
) -> (LinearProgram, LinearProgram) {
    let bound = snet.num_nodes as f64;
    let build = |shifted: bool| {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let pi: Vec<Option<usize>> = (0..snet.num_nodes)
            .map(|v| {
                (v != snet.source && v != snet.sink)
                    .then(|| lp.add_var(format!("pi[{v}]"), -bound, bound, 0.0))
            })
            .collect();
        for (a, arc) in snet.all_arcs().enumerate() {
            let (blocked, shift) = match arc.origin {
                ArcOrigin::Node(i) => (y.is_interdicted(i), -(y.is_interdicted(i) as u8 as f64)),
                ArcOrigin::Restructurable(r) => (!z.is_active(r), z.is_active(r) as u8 as f64 - 1.0),
                _ => (false, 0.0),
            };
            let cost = if shifted || !blocked { arc.capacity } else { 0.0 };
            let th = lp.add_var(format!("theta[{a}]"), 0.0, f64::INFINITY, cost);
            let mut row = vec![(th, 1.0)];
            let mut rhs = if shifted { shift } else { 0.0 };
            for (v, sign) in [(arc.head, 1.0), (arc.tail, -1.0)] {
                if v == snet.source {
                    rhs -= sign;
                } else if v != snet.sink {
                    row.push((pi[v].unwrap(), sign));
                }
            }
            lp.add_constraint(format!("cut[{a}]"), row, Relation::Ge, rhs);
        }
        lp
    };
    (build(false), build(true))
}

/// Solves both dual forms for a fixed pair and checks they agree with each
/// other and with the combinatorial max flow.
pub fn check_dual_equivalence(
    net: &LayeredNetwork,
    y: &InterdictionPlan,
    z: &RestructurePlan,
) -> Result<DualEquivalence> {
    check_dual_equivalence_with(net, y, z, milp::LpBackend::default())
}

pub fn check_dual_equivalence_with(
    net: &LayeredNetwork,
    y: &InterdictionPlan,
    z: &RestructurePlan,
    backend: milp::LpBackend,
) -> Result<DualEquivalence> {
    let snet = network::split_nodes(net)?;
    let (weighted_lp, shifted_lp) = dual_lps(&snet, y, z);
    let solve = |lp: &LinearProgram| -> Result<f64> {
        let sol = milp::solve_lp_with(lp, backend)?;
        if sol.status != Status::Optimal {
            return Err(Error::Internal(format!("dual LP ended {:?}", sol.status)));
        }
        Ok(sol.objective)
    };
    let report = DualEquivalence {
        weighted: solve(&weighted_lp)?,
        shifted: solve(&shifted_lp)?,
        max_flow: network::max_flow(&snet, y, z).value,
    };
    let agree = |a: f64, b: f64| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0);
    if !agree(report.weighted, report.shifted) || !agree(report.weighted, report.max_flow) {
        return Err(Error::Internal(format!(
            "dual forms disagree: weighted {}, shifted {}, max flow {}",
            report.weighted, report.shifted, report.max_flow
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve_mip, MipLimits};
    use crate::network::{NodeRecord, RestructurableArc};
    use crate::restructure::{enumerate_y, enumerate_z};

    /// Two suppliers over three users; user 4 only hangs off supplier 1.
    fn small() -> LayeredNetwork {
        let mut nodes = Vec::new();
        for (id, cap) in [(0, 2.0), (1, 1.5)] {
            let mut n = NodeRecord::new(id, 2, cap);
            n.supply = cap;
            n.interdiction_cost = 3.0;
            nodes.push(n);
        }
        for (id, cap) in [(2, 1.0), (3, 0.75), (4, 1.25)] {
            let mut n = NodeRecord::new(id, 1, cap);
            n.demand = cap;
            nodes.push(n);
        }
        LayeredNetwork {
            nodes,
            arcs: vec![(0, 2), (0, 3), (1, 4)],
            restructurable_arcs: vec![
                RestructurableArc { tail: 0, head: 4, cost: 1.0 },
                RestructurableArc { tail: 1, head: 2, cost: 1.0 },
                RestructurableArc { tail: 1, head: 3, cost: 1.0 },
            ],
            num_layers: 2,
        }
    }

    fn solve(m: &MixedIntegerProgram) -> f64 {
        let sol = solve_mip(m, &MipLimits::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        sol.objective
    }

    fn oracle_mfnip(net: &LayeredNetwork, rules: &InterdictionRules) -> f64 {
        let snet = network::split_nodes(net).unwrap();
        let z = RestructurePlan::empty(net.restructurable_arcs.len());
        enumerate_y(net, rules, 10_000)
            .unwrap()
            .iter()
            .map(|y| network::max_flow(&snet, y, &z).value)
            .fold(f64::INFINITY, f64::min)
    }

    fn oracle_bilevel(net: &LayeredNetwork, ir: &InterdictionRules, rr: &RestructureRules) -> f64 {
        let snet = network::split_nodes(net).unwrap();
        enumerate_y(net, ir, 10_000)
            .unwrap()
            .iter()
            .map(|y| {
                enumerate_z(net, rr, y, 10_000)
                    .unwrap()
                    .iter()
                    .map(|z| network::max_flow(&snet, y, z).value)
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn mfnip_zero_budget_is_base_flow() {
        let net = small();
        let model = build_mfnip(&net, &InterdictionRules::with_budget(0.0)).unwrap();
        assert!((solve(&model.mip) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn mfnip_cutting_all_users() {
        let net = small();
        let model = build_mfnip(&net, &InterdictionRules::with_budget(3.0)).unwrap();
        assert!(solve(&model.mip).abs() < 1e-9);
    }

    #[test]
    fn mfnip_matches_enumeration() {
        let mut net = small();
        net.nodes[0].tau = 1;
        for budget in [0.0, 1.0, 2.0, 4.0, 6.0] {
            let rules = InterdictionRules::with_budget(budget);
            let model = build_mfnip(&net, &rules).unwrap();
            let got = solve(&model.mip);
            assert!((got - oracle_mfnip(&net, &rules)).abs() < 1e-6, "budget {budget}");
        }
    }

    #[test]
    fn null_pool_master_is_mfnip() {
        let net = small();
        let rules = InterdictionRules::with_budget(2.0);
        let master = build_master(&net, &rules, &PlanPool::seeded(3)).unwrap();
        let mfnip = build_mfnip(&net, &rules).unwrap();
        assert!((solve(&master.mip) - solve(&mfnip.mip)).abs() < 1e-9);
    }

    #[test]
    fn full_pool_master_is_bilevel_optimum() {
        let net = small();
        let rr = RestructureRules::from_network(&net, 6.0);
        for budget in [1.0, 2.0, 3.0] {
            let ir = InterdictionRules::with_budget(budget);
            let mut pool = PlanPool::seeded(3);
            for y in enumerate_y(&net, &ir, 1000).unwrap() {
                for z in enumerate_z(&net, &rr, &y, 1000).unwrap() {
                    pool.push(z, 1, y.clone());
                }
            }
            let want = oracle_bilevel(&net, &ir, &rr);
            let partial = solve(&build_master(&net, &ir, &pool).unwrap().mip);
            let baseline = solve(&build_baseline_master(&net, &ir, &pool).unwrap().mip);
            assert!((partial - want).abs() < 1e-6, "budget {budget}: {partial} vs {want}");
            assert!((baseline - want).abs() < 1e-6, "budget {budget}: {baseline} vs {want}");
        }
    }

    #[test]
    fn adding_plans_never_lowers_master() {
        let net = small();
        let ir = InterdictionRules::with_budget(1.0);
        let rr = RestructureRules::from_network(&net, 6.0);
        let mut pool = PlanPool::seeded(3);
        let mut last = solve(&build_master(&net, &ir, &pool).unwrap().mip);
        for y in enumerate_y(&net, &ir, 1000).unwrap() {
            for z in enumerate_z(&net, &rr, &y, 1000).unwrap() {
                if pool.push(z, 1, y.clone()) {
                    let now = solve(&build_master(&net, &ir, &pool).unwrap().mip);
                    assert!(now >= last - 1e-9);
                    last = now;
                }
            }
        }
    }

    #[test]
    fn baseline_indicator_rules() {
        let net = small();
        let ir = InterdictionRules::with_budget(1.0);
        let mut plan = RestructurePlan::empty(3);
        plan.set(1, Side::In);
        let mut pool = PlanPool::seeded(3);
        pool.push(plan, 1, InterdictionPlan::none(5));
        let model = build_baseline_master(&net, &ir, &pool).unwrap();
        let f = model.f[1].unwrap();
        let w = model.w_in[&2];
        let y0 = model.y[0];
        // supplier 0 interdicted forces w_in[2] and then f[1]
        let mut mip = model.mip.clone();
        mip.lp.variables[y0].lower = 1.0;
        mip.lp.variables[f].upper = 0.0;
        mip.lp.constraints.retain(|c| c.name != "budget");
        assert_eq!(solve_mip(&mip, &MipLimits::default()).unwrap().status, Status::Infeasible);
        // nothing interdicted: f may drop to zero
        let mut mip = model.mip.clone();
        mip.lp.variables[f].upper = 0.0;
        mip.lp.variables[w].upper = 0.0;
        assert_eq!(solve_mip(&mip, &MipLimits::default()).unwrap().status, Status::Optimal);
    }

    #[test]
    fn subproblem_zero_interdiction() {
        let net = small();
        let rr = RestructureRules::from_network(&net, 6.0);
        let sub = build_subproblem(&net, &rr, &InterdictionPlan::none(5)).unwrap();
        let sol = solve_mip(&sub.mip, &MipLimits::default()).unwrap();
        assert!((sol.objective - 3.0).abs() < 1e-9);
        assert!(sub.plan(&sol.values).is_null());
    }

    #[test]
    fn subproblem_substitute_supplier() {
        // supplier 1 and its only user: losing supplier 1 lets user 4 ask supplier 0
        let net = small();
        let rr = RestructureRules::from_network(&net, 6.0);
        let y = InterdictionPlan::from_nodes(5, &[1]);
        let sub = build_subproblem(&net, &rr, &y).unwrap();
        let sol = solve_mip(&sub.mip, &MipLimits::default()).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
        let plan = sub.plan(&sol.values);
        assert!(crate::restructure::feasible(&net, &rr, &y, &plan).is_feasible());
    }

    #[test]
    fn subproblem_matches_enumeration() {
        let net = small();
        let snet = network::split_nodes(&net).unwrap();
        for budget in [0.0, 1.0, 6.0] {
            let rr = RestructureRules::from_network(&net, budget);
            for mask in 0..32u32 {
                let y = InterdictionPlan {
                    y: (0..5).map(|i| mask >> i & 1 == 1).collect(),
                };
                let sub = build_subproblem(&net, &rr, &y).unwrap();
                let got = solve(&sub.mip);
                let want = enumerate_z(&net, &rr, &y, 1000)
                    .unwrap()
                    .iter()
                    .map(|z| network::max_flow(&snet, &y, z).value)
                    .fold(0.0, f64::max);
                assert!((got - want).abs() < 1e-6, "mask {mask}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn dual_forms_agree_on_small_cases() {
        let net = small();
        let r = check_dual_equivalence(&net, &InterdictionPlan::none(5), &RestructurePlan::empty(3)).unwrap();
        assert!((r.max_flow - 3.0).abs() < 1e-9);
        let all = InterdictionPlan::from_nodes(5, &[0, 1]);
        let r = check_dual_equivalence(&net, &all, &RestructurePlan::empty(3)).unwrap();
        assert!(r.weighted.abs() < 1e-9 && r.shifted.abs() < 1e-9);
        let mut z = RestructurePlan::empty(3);
        z.set(0, Side::Out);
        let y = InterdictionPlan::from_nodes(5, &[1]);
        let r = check_dual_equivalence(&net, &y, &z).unwrap();
        assert!((r.max_flow - 2.0).abs() < 1e-9);
    }

    #[test]
    fn emitted_models_are_linear_and_named() {
        let net = small();
        let ir = InterdictionRules::with_budget(3.0);
        let mut pool = PlanPool::seeded(3);
        let mut plan = RestructurePlan::empty(3);
        plan.set(0, Side::Out);
        plan.set(1, Side::In);
        pool.push(plan, 1, InterdictionPlan::none(5));
        let model = build_master(&net, &ir, &pool).unwrap();
        let mut names: Vec<&str> = model.mip.lp.variables.iter().map(|v| v.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), model.mip.num_vars());
        assert!(model.mip.var_index("w_in[2]").is_some());
        assert!(model.mip.var_index("w_out[0]").is_some());
        assert!(model.mip.lp.constraints.iter().any(|c| c.name == "cut_out[1][0]"));
    }
}
