//! Classifying restructurable arcs against a minimum cut, and certificates
//! that a set of new arcs cannot raise the maximum flow.

use std::fmt;

use crate::error::{Error, Result};
use crate::network::{
    self, ArcOrigin, AuxiliaryNetwork, CutSolution, LayeredNetwork, SplitNetwork, FLOW_TOL,
};
use crate::restructure::{
    enumerate_z_over, permissions, InterdictionPlan, RestructurePlan, RestructureRules,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArcClass {
    /// Tail on the sink side of the cut.
    SinkSideTail,
    /// Both endpoints on the source side.
    SourceSideInternal,
    /// Crosses the cut but the head cannot reach the sink.
    CrossCutNoSinkPath,
    PotentiallyIncreasing,
}

impl ArcClass {
    pub fn is_harmless_alone(self) -> bool {
        self != ArcClass::PotentiallyIncreasing
    }
}

impl fmt::Display for ArcClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArcClass::SinkSideTail => "sink-side-tail",
            ArcClass::SourceSideInternal => "source-side-internal",
            ArcClass::CrossCutNoSinkPath => "cross-cut-no-sink-path",
            ArcClass::PotentiallyIncreasing => "potentially-increasing",
        })
    }
}

/// Classifies the arc `(tail, head)` given in split-network node ids.
pub fn classify_arc(aux: &AuxiliaryNetwork, cut: &CutSolution, arc: (usize, usize)) -> ArcClass {
    let (i, j) = arc;
    if !cut.in_source_side(i) {
        ArcClass::SinkSideTail
    } else if cut.in_source_side(j) {
        ArcClass::SourceSideInternal
    } else if !aux.has_path(j, aux.sink) {
        ArcClass::CrossCutNoSinkPath
    } else {
        ArcClass::PotentiallyIncreasing
    }
}

/// Split-network endpoints of the given restructurable arcs.
pub fn candidate_pairs(snet: &SplitNetwork, arcs: &[usize]) -> Vec<(usize, usize)> {
    arcs.iter()
        .map(|&r| {
            let a = &snet.restructurable[r];
            (a.tail, a.head)
        })
        .collect()
}

/// Sufficient condition for "adding every candidate leaves the max flow
/// unchanged". `false` is inconclusive.
///
/// A cross-cut arc `(i, j)` is only safe when no sink-side-tail candidate can
/// be entered from `j`: its tail must neither belong to the same original node
/// as `j` nor be reachable from `j` in the auxiliary network.
pub fn certify_no_increase(
    aux: &AuxiliaryNetwork,
    cut: &CutSolution,
    candidates: &[(usize, usize)],
) -> bool {
    let classes: Vec<ArcClass> = candidates
        .iter()
        .map(|&arc| classify_arc(aux, cut, arc))
        .collect();
    if classes
        .iter()
        .all(|c| matches!(c, ArcClass::SinkSideTail | ArcClass::SourceSideInternal))
    {
        return true;
    }
    if classes.contains(&ArcClass::PotentiallyIncreasing) {
        return false;
    }
    let sink_side_tails: Vec<usize> = candidates
        .iter()
        .zip(&classes)
        .filter(|(_, &c)| c == ArcClass::SinkSideTail)
        .map(|(&(i, _), _)| i)
        .collect();
    let paired = |a: usize, b: usize| a / 2 == b / 2 && a < 2 * (aux.num_nodes / 2 - 1);
    candidates
        .iter()
        .zip(&classes)
        .filter(|(_, &c)| c == ArcClass::CrossCutNoSinkPath)
        .all(|(&(_, j), _)| {
            let reach = aux.reachable_from(j);
            sink_side_tails
                .iter()
                .all(|&tail| !reach[tail] && !paired(tail, j))
        })
}

/// Exhaustive check that no feasible restructuring over `candidates`
/// (restructurable arc indices) raises the flow left after `y`.
pub fn verify_no_increase_bruteforce(
    net: &LayeredNetwork,
    snet: &SplitNetwork,
    rules: &RestructureRules,
    y: &InterdictionPlan,
    candidates: &[usize],
    cap: usize,
) -> Result<bool> {
    if candidates.len() > 20 {
        return Err(Error::Resource {
            what: format!("{} candidate arcs", candidates.len()),
            cap: 20,
        });
    }
    let m = net.restructurable_arcs.len();
    let base = network::max_flow(snet, y, &RestructurePlan::empty(m)).value;
    for plan in enumerate_z_over(net, rules, y, candidates, cap)? {
        if network::max_flow(snet, y, &plan).value > base + FLOW_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One restructurable arc permitted by an interdiction plan.
#[derive(Clone, Debug, PartialEq)]
pub struct PermittedArc {
    pub index: usize,
    pub tail: usize,
    pub head: usize,
    pub via_in: bool,
    pub via_out: bool,
    pub class: ArcClass,
}

/// Where the minimum cut sits and which restructurings could hurt.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanAnalysis {
    pub flow: f64,
    /// `(layer, nodes whose split arc is cut)`, ascending by layer.
    pub cut_nodes_by_layer: Vec<(u32, Vec<usize>)>,
    /// Suppliers whose source arc is cut.
    pub cut_supply: Vec<usize>,
    /// Users whose sink arc is cut.
    pub cut_demand: Vec<usize>,
    pub permitted: Vec<PermittedArc>,
    pub certified: bool,
}

pub fn analyze_plan(
    net: &LayeredNetwork,
    rules: &RestructureRules,
    y: &InterdictionPlan,
) -> Result<PlanAnalysis> {
    let snet = network::split_nodes(net)?;
    let z = RestructurePlan::empty(net.restructurable_arcs.len());
    let graph = snet.flow_graph(y, &z);
    let flow = graph.max_flow();
    let cut = graph.min_cut(&flow)?;
    let aux = graph.auxiliary(&flow);

    let mut by_layer: Vec<(u32, Vec<usize>)> = (1..=net.num_layers).map(|l| (l, vec![])).collect();
    let (mut cut_supply, mut cut_demand) = (vec![], vec![]);
    for &k in &cut.cut_arcs {
        match snet.arc(k).origin {
            ArcOrigin::Node(i) => by_layer[net.nodes[i].layer as usize - 1].1.push(i),
            ArcOrigin::Source(i) => cut_supply.push(i),
            ArcOrigin::Sink(i) => cut_demand.push(i),
            ArcOrigin::Base(_) | ArcOrigin::Restructurable(_) => {}
        }
    }
    by_layer.retain(|(_, v)| !v.is_empty());

    let w = permissions(net, y);
    let mut permitted = Vec::new();
    for (r, arc) in net.restructurable_arcs.iter().enumerate() {
        let via_out = w.w_out[r] && !rules.out_forbidden(net, r);
        if !(w.w_in[r] || via_out) {
            continue;
        }
        let split = &snet.restructurable[r];
        permitted.push(PermittedArc {
            index: r,
            tail: arc.tail,
            head: arc.head,
            via_in: w.w_in[r],
            via_out,
            class: classify_arc(&aux, &cut, (split.tail, split.head)),
        });
    }
    let pairs: Vec<_> = permitted
        .iter()
        .map(|p| (snet.restructurable[p.index].tail, snet.restructurable[p.index].head))
        .collect();
    let certified = certify_no_increase(&aux, &cut, &pairs);
    Ok(PlanAnalysis {
        flow: flow.value,
        cut_nodes_by_layer: by_layer,
        cut_supply,
        cut_demand,
        permitted,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{split_nodes, NodeRecord, RestructurableArc};

    fn node(id: usize, layer: u32, cap: f64) -> NodeRecord {
        NodeRecord::new(id, layer, cap)
    }

    fn supplier(id: usize, layer: u32, cap: f64) -> NodeRecord {
        let mut n = node(id, layer, cap);
        n.supply = cap;
        n
    }

    fn user(id: usize, cap: f64) -> NodeRecord {
        let mut n = node(id, 1, cap);
        n.demand = cap;
        n
    }

    fn all_active(m: usize) -> RestructurePlan {
        RestructurePlan {
            z_in: vec![true; m],
            z_out: vec![false; m],
        }
    }

    fn context(net: &LayeredNetwork) -> (SplitNetwork, AuxiliaryNetwork, CutSolution, f64) {
        let snet = split_nodes(net).unwrap();
        let y = InterdictionPlan::none(net.nodes.len());
        let g = snet.flow_graph(&y, &RestructurePlan::empty(net.restructurable_arcs.len()));
        let flow = g.max_flow();
        let cut = g.min_cut(&flow).unwrap();
        let aux = g.auxiliary(&flow);
        (snet, aux, cut, flow.value)
    }

    /// Supplier 0 is held back by user 2, supplier 1 starves user 3.
    fn bottleneck() -> LayeredNetwork {
        let mut weak = supplier(1, 2, 0.5);
        weak.supply = 2.0;
        LayeredNetwork {
            nodes: vec![supplier(0, 2, 2.0), weak, user(2, 1.0), user(3, 1.0)],
            arcs: vec![(0, 2), (1, 3)],
            restructurable_arcs: vec![RestructurableArc { tail: 0, head: 3, cost: 1.0 }],
            num_layers: 2,
        }
    }

    #[test]
    fn potentially_increasing_arc_raises_flow() {
        let net = bottleneck();
        let (snet, aux, cut, before) = context(&net);
        let pairs = candidate_pairs(&snet, &[0]);
        assert_eq!(classify_arc(&aux, &cut, pairs[0]), ArcClass::PotentiallyIncreasing);
        assert!(!certify_no_increase(&aux, &cut, &pairs));
        let after = network::max_flow(&snet, &InterdictionPlan::none(4), &all_active(1)).value;
        assert_eq!(before, 1.5);
        assert_eq!(after, 2.0);
    }

    #[test]
    fn definitional_classes() {
        let net = bottleneck();
        let (snet, aux, cut, _) = context(&net);
        let s = snet.source;
        let u2_out = SplitNetwork::out_node(2);
        assert!(!cut.in_source_side(u2_out));
        assert_eq!(classify_arc(&aux, &cut, (u2_out, s)), ArcClass::SinkSideTail);
        assert_eq!(
            classify_arc(&aux, &cut, (s, SplitNetwork::out_node(0))),
            ArcClass::SourceSideInternal
        );
        assert!(certify_no_increase(&aux, &cut, &[]));
        assert!(certify_no_increase(&aux, &cut, &[(s, SplitNetwork::out_node(0))]));
    }

    /// A cross-cut arc into an isolated node `J` together with a restructurable
    /// arc leaving a node below `J`.
    fn chained(companion_tail: usize) -> LayeredNetwork {
        LayeredNetwork {
            nodes: vec![
                supplier(0, 4, 5.0),
                node(1, 3, 1.0),
                node(2, 2, 1.0),
                user(3, 1.0),
                node(4, 3, 5.0),
                node(5, 2, 5.0),
                user(6, 5.0),
            ],
            arcs: vec![(0, 1), (1, 2), (2, 3), (4, 5)],
            restructurable_arcs: vec![
                RestructurableArc { tail: 0, head: 4, cost: 1.0 },
                RestructurableArc { tail: companion_tail, head: 6, cost: 1.0 },
            ],
            num_layers: 4,
        }
    }

    #[test]
    fn cross_cut_pair_together_raises_flow() {
        // the companion leaves a node reachable from the cross-cut head
        let net = chained(5);
        let (snet, aux, cut, before) = context(&net);
        let pairs = candidate_pairs(&snet, &[0, 1]);
        assert_eq!(classify_arc(&aux, &cut, pairs[0]), ArcClass::CrossCutNoSinkPath);
        assert_eq!(classify_arc(&aux, &cut, pairs[1]), ArcClass::SinkSideTail);
        // each arc alone is harmless
        for r in 0..2 {
            let mut plan = RestructurePlan::empty(2);
            plan.z_in[r] = true;
            let v = network::max_flow(&snet, &InterdictionPlan::none(7), &plan).value;
            assert_eq!(v, before);
        }
        let both = network::max_flow(&snet, &InterdictionPlan::none(7), &all_active(2)).value;
        assert_eq!((before, both), (1.0, 5.0));
        assert!(!certify_no_increase(&aux, &cut, &pairs));
    }

    #[test]
    fn companion_out_of_the_head_node_is_flagged() {
        // (J, K) directly: J = 4 lives in layer 3, so retarget K one layer down
        let mut net = chained(4);
        net.nodes[6].layer = 2;
        net.nodes[6].demand = 0.0;
        net.nodes.push(user(7, 5.0));
        net.arcs.push((6, 7));
        let (snet, aux, cut, _) = context(&net);
        let pairs = candidate_pairs(&snet, &[0, 1]);
        assert_eq!(classify_arc(&aux, &cut, pairs[0]), ArcClass::CrossCutNoSinkPath);
        assert_eq!(classify_arc(&aux, &cut, pairs[1]), ArcClass::SinkSideTail);
        assert!(!certify_no_increase(&aux, &cut, &pairs));
    }

    #[test]
    fn lone_cross_cut_arc_is_certified() {
        let mut net = chained(5);
        net.restructurable_arcs.truncate(1);
        let (snet, aux, cut, before) = context(&net);
        let pairs = candidate_pairs(&snet, &[0]);
        assert!(certify_no_increase(&aux, &cut, &pairs));
        let after = network::max_flow(&snet, &InterdictionPlan::none(7), &all_active(1)).value;
        assert_eq!(before, after);
    }

    #[test]
    fn scaling_preserves_classes() {
        let net = bottleneck();
        let mut scaled = net.clone();
        for n in &mut scaled.nodes {
            n.capacity *= 3.0;
            n.supply *= 3.0;
            n.demand *= 3.0;
        }
        let (snet, aux, cut, _) = context(&net);
        let (_, aux3, cut3, _) = context(&scaled);
        assert_eq!(cut.source_side, cut3.source_side);
        for v in 0..snet.num_nodes {
            for u in 0..snet.num_nodes {
                assert_eq!(
                    classify_arc(&aux, &cut, (u, v)),
                    classify_arc(&aux3, &cut3, (u, v))
                );
            }
        }
    }

    #[test]
    fn bruteforce_trivial_cases() {
        let net = bottleneck();
        let snet = split_nodes(&net).unwrap();
        let rules = RestructureRules::from_network(&net, 6.0);
        let y = InterdictionPlan::from_nodes(4, &[1]);
        assert!(verify_no_increase_bruteforce(&net, &snet, &rules, &y, &[], 10).unwrap());
        // supplier 1 is gone, so user 3 may ask supplier 0 for supply
        assert!(!verify_no_increase_bruteforce(&net, &snet, &rules, &y, &[0], 10).unwrap());
    }

    #[test]
    fn analysis_without_interdiction() {
        let net = bottleneck();
        let rules = RestructureRules::from_network(&net, 6.0);
        let a = analyze_plan(&net, &rules, &InterdictionPlan::none(4)).unwrap();
        assert!(a.permitted.is_empty());
        assert!(a.certified);
        assert_eq!(a.flow, 1.5);
        assert_eq!(a.cut_nodes_by_layer, vec![(1, vec![2]), (2, vec![1])]);
    }
}
