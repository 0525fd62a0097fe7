//! Attacker plans `y`, defender plans `(z_in, z_out)`, and the rule systems
//! that decide which of them are admissible.

use std::fmt;

use crate::error::{Error, Result};
use crate::network::{Adjacency, LayeredNetwork, NodeId};

const COST_TOL: f64 = 1e-9;

/// Which nodes the attacker removes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InterdictionPlan {
    pub y: Vec<bool>,
}

impl InterdictionPlan {
    pub fn none(num_nodes: usize) -> Self {
        InterdictionPlan {
            y: vec![false; num_nodes],
        }
    }

    pub fn from_nodes(num_nodes: usize, nodes: &[NodeId]) -> Self {
        let mut plan = Self::none(num_nodes);
        for &i in nodes {
            plan.y[i] = true;
        }
        plan
    }

    pub fn is_interdicted(&self, i: NodeId) -> bool {
        self.y.get(i).copied().unwrap_or(false)
    }

    pub fn interdicted(&self) -> Vec<NodeId> {
        (0..self.y.len()).filter(|&i| self.y[i]).collect()
    }

    pub fn count(&self) -> usize {
        self.y.iter().filter(|&&v| v).count()
    }
}

/// Side of a restructurable arc that initiates the activation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// The head node reaches out for a new supplier.
    In,
    /// The tail node reaches out for a new customer.
    Out,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::In => "in",
            Side::Out => "out",
        })
    }
}

/// The defender's activation of restructurable arcs, indexed like
/// `LayeredNetwork::restructurable_arcs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RestructurePlan {
    pub z_in: Vec<bool>,
    pub z_out: Vec<bool>,
}

impl RestructurePlan {
    pub fn empty(num_arcs: usize) -> Self {
        RestructurePlan {
            z_in: vec![false; num_arcs],
            z_out: vec![false; num_arcs],
        }
    }

    pub fn len(&self) -> usize {
        self.z_in.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_in.is_empty()
    }

    pub fn is_active(&self, r: usize) -> bool {
        self.z_in.get(r).copied().unwrap_or(false) || self.z_out.get(r).copied().unwrap_or(false)
    }

    pub fn is_null(&self) -> bool {
        !self.z_in.iter().chain(&self.z_out).any(|&v| v)
    }

    pub fn set(&mut self, r: usize, side: Side) {
        match side {
            Side::In => self.z_in[r] = true,
            Side::Out => self.z_out[r] = true,
        }
    }

    /// Activated `(arc index, side)` pairs, in arc order, `in` before `out`.
    pub fn activations(&self) -> Vec<(usize, Side)> {
        let mut out = Vec::new();
        for r in 0..self.len() {
            if self.z_in[r] {
                out.push((r, Side::In));
            }
            if self.z_out[r] {
                out.push((r, Side::Out));
            }
        }
        out
    }

    pub fn active_count(&self) -> usize {
        self.activations().len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermissionIndicators {
    pub w_in: Vec<bool>,
    pub w_out: Vec<bool>,
}

/// Leadership requirement: at least `min_count` of `nodes` must be interdicted.
#[derive(Clone, Debug, PartialEq)]
pub struct Leadership {
    pub nodes: Vec<NodeId>,
    pub min_count: u32,
}

/// The attacker's feasible set `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterdictionRules {
    pub budget: f64,
    pub leadership: Option<Leadership>,
}

impl InterdictionRules {
    pub fn with_budget(budget: f64) -> Self {
        InterdictionRules {
            budget,
            leadership: None,
        }
    }
}

/// The defender's rule system.
#[derive(Clone, Debug, PartialEq)]
pub struct RestructureRules {
    /// Resource budget `r`.
    pub budget: f64,
    pub k: Vec<u32>,
    pub l: Vec<u32>,
    pub s: Vec<u32>,
    pub arc_cost: Vec<f64>,
    pub promotable: Vec<bool>,
    pub cross_org: Vec<bool>,
}

impl RestructureRules {
    pub fn from_network(net: &LayeredNetwork, budget: f64) -> Self {
        RestructureRules {
            budget,
            k: net.nodes.iter().map(|n| n.k).collect(),
            l: net.nodes.iter().map(|n| n.l).collect(),
            s: net.nodes.iter().map(|n| n.s).collect(),
            arc_cost: net.restructurable_arcs.iter().map(|a| a.cost).collect(),
            promotable: net.nodes.iter().map(|n| n.promotable).collect(),
            cross_org: net.nodes.iter().map(|n| n.cross_org_recruitable).collect(),
        }
    }

    /// Arcs into promotable or cross-organization nodes may only be requested
    /// by their head.
    pub fn out_forbidden(&self, net: &LayeredNetwork, r: usize) -> bool {
        let head = net.restructurable_arcs[r].head;
        self.promotable[head] || self.cross_org[head]
    }

    pub fn validate(&self, net: &LayeredNetwork) -> Result<()> {
        let n = net.nodes.len();
        if [self.k.len(), self.l.len(), self.s.len(), self.promotable.len(), self.cross_org.len()]
            .iter()
            .any(|&len| len != n)
        {
            return Err(Error::validation("restructuring rules do not match the node count"));
        }
        if self.arc_cost.len() != net.restructurable_arcs.len() {
            return Err(Error::validation(
                "restructuring rules do not match the restructurable arc count",
            ));
        }
        if !self.budget.is_finite() || self.budget < 0.0 {
            return Err(Error::validation(format!(
                "restructuring budget {} must be a nonnegative number",
                self.budget
            )));
        }
        for i in 0..n {
            if self.l[i] > self.k[i] || self.s[i] > self.k[i] {
                return Err(Error::validation(format!(
                    "node {i}: out/in limits ({}, {}) must not exceed the per-neighbour allowance {}",
                    self.l[i], self.s[i], self.k[i]
                )));
            }
        }
        Ok(())
    }
}

/// Restructurable arcs grouped by endpoint.
#[derive(Clone, Debug)]
pub struct RArcIndex {
    pub out_of: Vec<Vec<usize>>,
    pub into: Vec<Vec<usize>>,
}

impl RArcIndex {
    pub fn new(net: &LayeredNetwork) -> Self {
        let n = net.nodes.len();
        let mut idx = RArcIndex {
            out_of: vec![Vec::new(); n],
            into: vec![Vec::new(); n],
        };
        for (r, a) in net.restructurable_arcs.iter().enumerate() {
            idx.out_of[a.tail].push(r);
            idx.into[a.head].push(r);
        }
        idx
    }
}

/// Number of interdicted children and parents of every node.
pub fn interdicted_neighbours(adj: &Adjacency, y: &InterdictionPlan) -> (Vec<u32>, Vec<u32>) {
    let n = adj.children.len();
    let count = |lists: &Vec<Vec<NodeId>>, i: usize| {
        lists[i].iter().filter(|&&c| y.is_interdicted(c)).count() as u32
    };
    (
        (0..n).map(|i| count(&adj.children, i)).collect(),
        (0..n).map(|i| count(&adj.parents, i)).collect(),
    )
}

pub fn permissions(net: &LayeredNetwork, y: &InterdictionPlan) -> PermissionIndicators {
    let adj = net.adjacency();
    let (children_hit, parents_hit) = interdicted_neighbours(&adj, y);
    PermissionIndicators {
        w_in: net
            .restructurable_arcs
            .iter()
            .map(|a| parents_hit[a.head] > 0)
            .collect(),
        w_out: net
            .restructurable_arcs
            .iter()
            .map(|a| children_hit[a.tail] > 0)
            .collect(),
    }
}

/// Keeps the part of `plan` still permitted by `w`.
pub fn project(plan: &RestructurePlan, w: &PermissionIndicators) -> RestructurePlan {
    RestructurePlan {
        z_in: plan.z_in.iter().zip(&w.w_in).map(|(&z, &w)| z && w).collect(),
        z_out: plan.z_out.iter().zip(&w.w_out).map(|(&z, &w)| z && w).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintFamily {
    OutLimit,
    InLimit,
    OutReaction,
    InReaction,
    SideExclusive,
    ResourceBudget,
    OrganizationalOut,
}

impl fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintFamily::OutLimit => "out-limit",
            ConstraintFamily::InLimit => "in-limit",
            ConstraintFamily::OutReaction => "out-reaction",
            ConstraintFamily::InReaction => "in-reaction",
            ConstraintFamily::SideExclusive => "side-exclusive",
            ConstraintFamily::ResourceBudget => "resource-budget",
            ConstraintFamily::OrganizationalOut => "organizational-out",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeasibilityReport {
    /// Sorted by constraint family, then by the order the rows were checked.
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn families(&self) -> Vec<ConstraintFamily> {
        let mut f: Vec<_> = self.violations.iter().map(|v| v.family).collect();
        f.dedup();
        f
    }
}

/// Checks `plan` against every row of `Z(y)`.
pub fn feasible(
    net: &LayeredNetwork,
    rules: &RestructureRules,
    y: &InterdictionPlan,
    plan: &RestructurePlan,
) -> FeasibilityReport {
    let adj = net.adjacency();
    let idx = RArcIndex::new(net);
    feasible_with(net, &adj, &idx, rules, y, plan)
}

pub fn feasible_with(
    net: &LayeredNetwork,
    adj: &Adjacency,
    idx: &RArcIndex,
    rules: &RestructureRules,
    y: &InterdictionPlan,
    plan: &RestructurePlan,
) -> FeasibilityReport {
    let (children_hit, parents_hit) = interdicted_neighbours(adj, y);
    let n = net.nodes.len();
    let out_sum = |i: usize| idx.out_of[i].iter().filter(|&&r| plan.z_out[r]).count() as u64;
    let in_sum = |j: usize| idx.into[j].iter().filter(|&&r| plan.z_in[r]).count() as u64;
    let mut violations = Vec::new();
    let mut push = |family, detail: String| violations.push(Violation { family, detail });

    for i in 0..n {
        let used = out_sum(i);
        if used > rules.l[i] as u64 {
            push(
                ConstraintFamily::OutLimit,
                format!("node {i} starts {used} new arcs, limit {}", rules.l[i]),
            );
        }
    }
    for j in 0..n {
        let used = in_sum(j);
        if used > rules.s[j] as u64 {
            push(
                ConstraintFamily::InLimit,
                format!("node {j} accepts {used} new arcs, limit {}", rules.s[j]),
            );
        }
    }
    for i in 0..n {
        let used = out_sum(i);
        let allowed = rules.k[i] as u64 * children_hit[i] as u64;
        if used > allowed {
            push(
                ConstraintFamily::OutReaction,
                format!(
                    "node {i} starts {used} new arcs but has {} interdicted children",
                    children_hit[i]
                ),
            );
        }
    }
    for j in 0..n {
        let used = in_sum(j);
        let allowed = rules.k[j] as u64 * parents_hit[j] as u64;
        if used > allowed {
            push(
                ConstraintFamily::InReaction,
                format!(
                    "node {j} accepts {used} new arcs but has {} interdicted parents",
                    parents_hit[j]
                ),
            );
        }
    }
    for r in 0..plan.len() {
        if plan.z_in[r] && plan.z_out[r] {
            push(
                ConstraintFamily::SideExclusive,
                format!("arc {r} is activated from both sides"),
            );
        }
    }
    let spent: f64 = (0..plan.len())
        .filter(|&r| plan.is_active(r))
        .map(|r| rules.arc_cost[r] * (plan.z_in[r] as u8 + plan.z_out[r] as u8) as f64)
        .sum();
    if spent > rules.budget + COST_TOL {
        push(
            ConstraintFamily::ResourceBudget,
            format!("restructuring spends {spent}, budget {}", rules.budget),
        );
    }
    for r in 0..plan.len() {
        if plan.z_out[r] && rules.out_forbidden(net, r) {
            let a = &net.restructurable_arcs[r];
            push(
                ConstraintFamily::OrganizationalOut,
                format!("arc ({},{}) may only be requested by its head", a.tail, a.head),
            );
        }
    }
    FeasibilityReport { violations }
}

#[derive(Clone, Debug, PartialEq)]
pub struct YViolation {
    pub constraint: &'static str,
    pub detail: String,
}

/// Checks `y` against the budget, climbing-the-ladder and leadership rows.
pub fn check_interdiction(
    net: &LayeredNetwork,
    rules: &InterdictionRules,
    y: &InterdictionPlan,
) -> Vec<YViolation> {
    let mut out = Vec::new();
    if y.y.len() != net.nodes.len() {
        out.push(YViolation {
            constraint: "shape",
            detail: format!("plan covers {} nodes, network has {}", y.y.len(), net.nodes.len()),
        });
        return out;
    }
    let cost: f64 = y
        .interdicted()
        .iter()
        .map(|&i| net.nodes[i].interdiction_cost)
        .sum();
    if cost > rules.budget + COST_TOL {
        out.push(YViolation {
            constraint: "budget",
            detail: format!("interdiction costs {cost}, budget {}", rules.budget),
        });
    }
    let adj = net.adjacency();
    let (children_hit, _) = interdicted_neighbours(&adj, y);
    for i in y.interdicted() {
        if net.nodes[i].tau > children_hit[i] {
            out.push(YViolation {
                constraint: "ladder",
                detail: format!(
                    "node {i} needs {} interdicted children, has {}",
                    net.nodes[i].tau, children_hit[i]
                ),
            });
        }
    }
    if let Some(lead) = &rules.leadership {
        let hit = lead.nodes.iter().filter(|&&i| y.is_interdicted(i)).count();
        if (hit as u32) < lead.min_count {
            out.push(YViolation {
                constraint: "leadership",
                detail: format!("{hit} leadership nodes interdicted, need {}", lead.min_count),
            });
        }
    }
    out
}

pub fn is_interdiction_feasible(
    net: &LayeredNetwork,
    rules: &InterdictionRules,
    y: &InterdictionPlan,
) -> bool {
    check_interdiction(net, rules, y).is_empty()
}

/// Every plan in `Y`, lowest layers decided first so the ladder rows can be
/// checked as soon as a node is decided.
pub fn enumerate_y(
    net: &LayeredNetwork,
    rules: &InterdictionRules,
    cap: usize,
) -> Result<Vec<InterdictionPlan>> {
    let adj = net.adjacency();
    let mut order: Vec<NodeId> = (0..net.nodes.len()).collect();
    order.sort_by_key(|&i| (net.nodes[i].layer, i));

    struct Walk<'a> {
        net: &'a LayeredNetwork,
        adj: &'a Adjacency,
        rules: &'a InterdictionRules,
        order: Vec<NodeId>,
        cap: usize,
        current: InterdictionPlan,
        out: Vec<InterdictionPlan>,
    }

    impl Walk<'_> {
        fn go(&mut self, pos: usize, spent: f64) -> Result<()> {
            if pos == self.order.len() {
                if let Some(lead) = &self.rules.leadership {
                    let hit = lead
                        .nodes
                        .iter()
                        .filter(|&&i| self.current.is_interdicted(i))
                        .count();
                    if (hit as u32) < lead.min_count {
                        return Ok(());
                    }
                }
                if self.out.len() >= self.cap {
                    return Err(Error::Resource {
                        what: "interdiction plans".into(),
                        cap: self.cap,
                    });
                }
                self.out.push(self.current.clone());
                return Ok(());
            }
            let i = self.order[pos];
            self.go(pos + 1, spent)?;
            let node = &self.net.nodes[i];
            let cost = spent + node.interdiction_cost;
            let hit = self.adj.children[i]
                .iter()
                .filter(|&&c| self.current.is_interdicted(c))
                .count() as u32;
            if cost <= self.rules.budget + COST_TOL && hit >= node.tau {
                self.current.y[i] = true;
                self.go(pos + 1, cost)?;
                self.current.y[i] = false;
            }
            Ok(())
        }
    }

    let mut walk = Walk {
        net,
        adj: &adj,
        rules,
        order,
        cap,
        current: InterdictionPlan::none(net.nodes.len()),
        out: Vec::new(),
    };
    walk.go(0, 0.0)?;
    Ok(walk.out)
}

/// Most permitted arcs `enumerate_z` accepts.
pub const MAX_ENUMERATED_ARCS: usize = 16;

/// Every plan in `Z(y)`.
pub fn enumerate_z(
    net: &LayeredNetwork,
    rules: &RestructureRules,
    y: &InterdictionPlan,
    cap: usize,
) -> Result<Vec<RestructurePlan>> {
    let w = permissions(net, y);
    let m = net.restructurable_arcs.len();
    let permitted: Vec<usize> = (0..m).filter(|&r| w.w_in[r] || w.w_out[r]).collect();
    if permitted.len() > MAX_ENUMERATED_ARCS {
        return Err(Error::Resource {
            what: format!("{} permitted restructurable arcs", permitted.len()),
            cap: MAX_ENUMERATED_ARCS,
        });
    }
    enumerate_z_over(net, rules, y, &permitted, cap)
}

/// Every plan in `Z(y)` that activates only arcs from `arcs`.
pub fn enumerate_z_over(
    net: &LayeredNetwork,
    rules: &RestructureRules,
    y: &InterdictionPlan,
    arcs: &[usize],
    cap: usize,
) -> Result<Vec<RestructurePlan>> {
    let w = permissions(net, y);
    let m = net.restructurable_arcs.len();
    let permitted: Vec<usize> = arcs
        .iter()
        .copied()
        .filter(|&r| w.w_in[r] || w.w_out[r])
        .collect();
    let adj = net.adjacency();
    let (children_hit, parents_hit) = interdicted_neighbours(&adj, y);
    let n = net.nodes.len();
    let out_cap: Vec<u64> = (0..n)
        .map(|i| (rules.l[i] as u64).min(rules.k[i] as u64 * children_hit[i] as u64))
        .collect();
    let in_cap: Vec<u64> = (0..n)
        .map(|j| (rules.s[j] as u64).min(rules.k[j] as u64 * parents_hit[j] as u64))
        .collect();

    struct Walk<'a> {
        net: &'a LayeredNetwork,
        rules: &'a RestructureRules,
        w: &'a PermissionIndicators,
        permitted: &'a [usize],
        out_cap: &'a [u64],
        in_cap: &'a [u64],
        out_used: Vec<u64>,
        in_used: Vec<u64>,
        plan: RestructurePlan,
        cap: usize,
        out: Vec<RestructurePlan>,
    }

    impl Walk<'_> {
        fn go(&mut self, pos: usize, spent: f64) -> Result<()> {
            if pos == self.permitted.len() {
                if self.out.len() >= self.cap {
                    return Err(Error::Resource {
                        what: "restructuring plans".into(),
                        cap: self.cap,
                    });
                }
                self.out.push(self.plan.clone());
                return Ok(());
            }
            self.go(pos + 1, spent)?;
            let r = self.permitted[pos];
            let arc = &self.net.restructurable_arcs[r];
            let cost = spent + self.rules.arc_cost[r];
            if cost > self.rules.budget + COST_TOL {
                return Ok(());
            }
            if self.w.w_in[r] && self.in_used[arc.head] < self.in_cap[arc.head] {
                self.in_used[arc.head] += 1;
                self.plan.z_in[r] = true;
                self.go(pos + 1, cost)?;
                self.plan.z_in[r] = false;
                self.in_used[arc.head] -= 1;
            }
            if self.w.w_out[r]
                && !self.rules.out_forbidden(self.net, r)
                && self.out_used[arc.tail] < self.out_cap[arc.tail]
            {
                self.out_used[arc.tail] += 1;
                self.plan.z_out[r] = true;
                self.go(pos + 1, cost)?;
                self.plan.z_out[r] = false;
                self.out_used[arc.tail] -= 1;
            }
            Ok(())
        }
    }

    let mut walk = Walk {
        net,
        rules,
        w: &w,
        permitted: &permitted,
        out_cap: &out_cap,
        in_cap: &in_cap,
        out_used: vec![0; n],
        in_used: vec![0; n],
        plan: RestructurePlan::empty(m),
        cap,
        out: Vec::new(),
    };
    walk.go(0, 0.0)?;
    Ok(walk.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{NodeRecord, RestructurableArc};
    use std::collections::BTreeSet;

    /// Two suppliers over three users; supplier 0 serves users 2 and 3,
    /// supplier 1 serves user 4. Every missing supplier-user pair is restructurable.
    fn star() -> LayeredNetwork {
        let mut nodes = Vec::new();
        for id in 0..2 {
            let mut n = NodeRecord::new(id, 2, 5.0);
            n.supply = 5.0;
            nodes.push(n);
        }
        for id in 2..5 {
            let mut n = NodeRecord::new(id, 1, 1.0);
            n.demand = 1.0;
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

    #[test]
    fn no_interdiction_means_no_permission() {
        let net = star();
        let w = permissions(&net, &InterdictionPlan::none(5));
        assert!(w.w_in.iter().chain(&w.w_out).all(|&v| !v));
    }

    #[test]
    fn interdicted_child_opens_all_out_arcs() {
        let net = star();
        let w = permissions(&net, &InterdictionPlan::from_nodes(5, &[4]));
        // node 1 lost its only child
        assert_eq!(w.w_out, vec![false, true, true]);
        assert_eq!(w.w_in, vec![false, false, false]);
        let w = permissions(&net, &InterdictionPlan::from_nodes(5, &[0]));
        // users 2 and 3 lost their supplier
        assert_eq!(w.w_in, vec![false, true, true]);
    }

    #[test]
    fn null_plan_is_feasible() {
        let net = star();
        let rules = RestructureRules::from_network(&net, 6.0);
        for y in [vec![], vec![0], vec![0, 1, 4]] {
            let y = InterdictionPlan::from_nodes(5, &y);
            assert!(feasible(&net, &rules, &y, &RestructurePlan::empty(3)).is_feasible());
        }
    }

    #[test]
    fn activation_without_interdiction_is_rejected() {
        let net = star();
        let rules = RestructureRules::from_network(&net, 6.0);
        let mut plan = RestructurePlan::empty(3);
        plan.set(0, Side::Out);
        let report = feasible(&net, &rules, &InterdictionPlan::none(5), &plan);
        assert_eq!(report.families(), vec![ConstraintFamily::OutReaction]);
    }

    #[test]
    fn one_lost_child_allows_one_new_out_arc() {
        let net = star();
        let rules = RestructureRules::from_network(&net, 6.0);
        let y = InterdictionPlan::from_nodes(5, &[4]);
        let mut plan = RestructurePlan::empty(3);
        plan.set(1, Side::Out);
        assert!(feasible(&net, &rules, &y, &plan).is_feasible());
        plan.set(2, Side::Out);
        let report = feasible(&net, &rules, &y, &plan);
        assert_eq!(
            report.families(),
            vec![ConstraintFamily::OutLimit, ConstraintFamily::OutReaction]
        );
    }

    #[test]
    fn report_order_is_stable() {
        let net = star();
        let mut rules = RestructureRules::from_network(&net, 0.0);
        rules.promotable[2] = true;
        let y = InterdictionPlan::none(5);
        let plan = RestructurePlan {
            z_in: vec![false, true, false],
            z_out: vec![false, true, false],
        };
        let report = feasible(&net, &rules, &y, &plan);
        assert_eq!(
            report.families(),
            vec![
                ConstraintFamily::OutReaction,
                ConstraintFamily::InReaction,
                ConstraintFamily::SideExclusive,
                ConstraintFamily::ResourceBudget,
                ConstraintFamily::OrganizationalOut,
            ]
        );
    }

    #[test]
    fn projection_cases() {
        let plan = RestructurePlan {
            z_in: vec![true, false, true],
            z_out: vec![false, false, false],
        };
        let w = PermissionIndicators {
            w_in: vec![false, true, true],
            w_out: vec![true, true, true],
        };
        let p = project(&plan, &w);
        assert_eq!(p.z_in, vec![false, false, true]);
        assert!(p.z_out.iter().all(|&v| !v));
        assert_eq!(project(&p, &w), p);
    }

    #[test]
    fn enumerate_z_without_interdiction() {
        let net = star();
        let rules = RestructureRules::from_network(&net, 6.0);
        let plans = enumerate_z(&net, &rules, &InterdictionPlan::none(5), 100).unwrap();
        assert_eq!(plans, vec![RestructurePlan::empty(3)]);
    }

    #[test]
    fn enumerate_z_single_arc_both_sides() {
        let mut net = star();
        net.restructurable_arcs.truncate(1);
        let rules = RestructureRules::from_network(&net, 6.0);
        // interdicting user 3 permits the tail side of (0,4); interdicting
        // supplier 1 permits its head side
        let y = InterdictionPlan::from_nodes(5, &[1, 3]);
        let plans: BTreeSet<_> = enumerate_z(&net, &rules, &y, 100).unwrap().into_iter().collect();
        let mut via_in = RestructurePlan::empty(1);
        via_in.set(0, Side::In);
        let mut via_out = RestructurePlan::empty(1);
        via_out.set(0, Side::Out);
        let expected: BTreeSet<_> = [RestructurePlan::empty(1), via_in, via_out].into();
        assert_eq!(plans, expected);
    }

    #[test]
    fn enumerate_z_respects_cap() {
        let net = star();
        let rules = RestructureRules::from_network(&net, 6.0);
        let y = InterdictionPlan::from_nodes(5, &[0, 4]);
        assert!(matches!(
            enumerate_z(&net, &rules, &y, 1),
            Err(Error::Resource { .. })
        ));
    }

    /// All `3^m` assignments filtered by `feasible`.
    fn brute_force_z(
        net: &LayeredNetwork,
        rules: &RestructureRules,
        y: &InterdictionPlan,
    ) -> BTreeSet<RestructurePlan> {
        let m = net.restructurable_arcs.len();
        let mut out = BTreeSet::new();
        for code in 0..3usize.pow(m as u32) {
            let mut plan = RestructurePlan::empty(m);
            let mut c = code;
            for r in 0..m {
                match c % 3 {
                    1 => plan.z_in[r] = true,
                    2 => plan.z_out[r] = true,
                    _ => {}
                }
                c /= 3;
            }
            if feasible(net, rules, y, &plan).is_feasible() {
                out.insert(plan);
            }
        }
        out
    }

    #[test]
    fn enumerate_z_matches_brute_force() {
        let net = star();
        for budget in [0.0, 1.0, 2.0, 6.0] {
            let rules = RestructureRules::from_network(&net, budget);
            for mask in 0..32u32 {
                let y = InterdictionPlan {
                    y: (0..5).map(|i| mask >> i & 1 == 1).collect(),
                };
                let got: BTreeSet<_> = enumerate_z(&net, &rules, &y, 1000)
                    .unwrap()
                    .into_iter()
                    .collect();
                assert_eq!(got, brute_force_z(&net, &rules, &y), "mask {mask} r {budget}");
            }
        }
    }

    #[test]
    fn enumerate_y_matches_filter() {
        let mut net = star();
        net.nodes[0].tau = 1;
        net.nodes[0].interdiction_cost = 2.0;
        let rules = InterdictionRules {
            budget: 3.0,
            leadership: Some(Leadership { nodes: vec![0, 1], min_count: 1 }),
        };
        let got: BTreeSet<_> = enumerate_y(&net, &rules, 100).unwrap().into_iter().collect();
        let mut expected = BTreeSet::new();
        for mask in 0..32u32 {
            let y = InterdictionPlan {
                y: (0..5).map(|i| mask >> i & 1 == 1).collect(),
            };
            if is_interdiction_feasible(&net, &rules, &y) {
                expected.insert(y);
            }
        }
        assert!(!expected.is_empty());
        assert_eq!(got, expected);
    }

    #[test]
    fn rules_reject_limits_above_allowance() {
        let mut net = star();
        net.nodes[0].l = 2;
        let rules = RestructureRules::from_network(&net, 6.0);
        assert!(rules.validate(&net).is_err());
    }
}
