//! Layered supply networks, the node-splitting transformation, and the
//! combinatorial max-flow / min-cut machinery built on top of it.
//!
//! Nodes carry the capacity; arcs between nodes are uncapacitated. After
//! splitting, node `i` becomes the arc `(i', i'')`, a super-source feeds every
//! top-layer node and every layer-1 node drains into a super-sink.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::restructure::{InterdictionPlan, RestructurePlan};

pub type NodeId = usize;

/// Absolute tolerance for comparing flow quantities.
pub const FLOW_TOL: f64 = 1e-9;

/// Residual capacities at or below this are treated as exhausted.
const RESIDUAL_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct NodeRecord {
    pub id: NodeId,
    /// 1 = users (drain into the sink), `num_layers` = suppliers.
    pub layer: u32,
    pub capacity: f64,
    pub interdiction_cost: f64,
    /// Number of interdicted children required before this node may be interdicted.
    pub tau: u32,
    /// New arcs allowed per interdicted neighbour.
    pub k: u32,
    /// Cap on new outgoing arcs.
    pub l: u32,
    /// Cap on new incoming arcs.
    pub s: u32,
    pub organization: Option<u32>,
    pub recruitable: bool,
    pub promotable: bool,
    pub cross_org_recruitable: bool,
    pub supply: f64,
    pub demand: f64,
}

impl NodeRecord {
    pub fn new(id: NodeId, layer: u32, capacity: f64) -> Self {
        NodeRecord {
            id,
            layer,
            capacity,
            interdiction_cost: 1.0,
            tau: 0,
            k: 1,
            l: 1,
            s: 1,
            organization: None,
            recruitable: false,
            promotable: false,
            cross_org_recruitable: false,
            supply: 0.0,
            demand: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestructurableArc {
    pub tail: NodeId,
    pub head: NodeId,
    /// Resources consumed by activating the arc.
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayeredNetwork {
    pub nodes: Vec<NodeRecord>,
    pub arcs: Vec<(NodeId, NodeId)>,
    pub restructurable_arcs: Vec<RestructurableArc>,
    pub num_layers: u32,
}

/// Parent/child lists over the base arcs.
#[derive(Clone, Debug, Default)]
pub struct Adjacency {
    pub children: Vec<Vec<NodeId>>,
    pub parents: Vec<Vec<NodeId>>,
}

impl LayeredNetwork {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn adjacency(&self) -> Adjacency {
        let n = self.nodes.len();
        let mut adj = Adjacency {
            children: vec![Vec::new(); n],
            parents: vec![Vec::new(); n],
        };
        for &(i, j) in &self.arcs {
            adj.children[i].push(j);
            adj.parents[j].push(i);
        }
        adj
    }

    pub fn top_layer_nodes(&self) -> impl Iterator<Item = &NodeRecord> {
        self.nodes.iter().filter(move |n| n.layer == self.num_layers)
    }

    pub fn user_nodes(&self) -> impl Iterator<Item = &NodeRecord> {
        self.nodes.iter().filter(|n| n.layer == 1)
    }

    pub fn nodes_in_layer(&self, layer: u32) -> impl Iterator<Item = &NodeRecord> {
        self.nodes.iter().filter(move |n| n.layer == layer)
    }

    /// Checks the structural invariants. Returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let n = self.nodes.len();
        if self.num_layers == 0 {
            return Err(Error::validation("num_layers must be positive"));
        }
        for (idx, node) in self.nodes.iter().enumerate() {
            if node.id != idx {
                return Err(Error::validation(format!(
                    "node ids must be dense: position {idx} holds id {}",
                    node.id
                )));
            }
            if node.layer == 0 || node.layer > self.num_layers {
                return Err(Error::validation(format!(
                    "node {idx} has layer {} outside 1..={}",
                    node.layer, self.num_layers
                )));
            }
            for (name, v) in [
                ("capacity", node.capacity),
                ("interdiction_cost", node.interdiction_cost),
                ("supply", node.supply),
                ("demand", node.demand),
            ] {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::validation(format!(
                        "node {idx} has invalid {name} {v}"
                    )));
                }
            }
            if node.supply > 0.0 && node.layer != self.num_layers {
                return Err(Error::validation(format!(
                    "node {idx} has supply but is not in the top layer"
                )));
            }
            if node.demand > 0.0 && node.layer != 1 {
                return Err(Error::validation(format!(
                    "node {idx} has demand but is not in layer 1"
                )));
            }
        }

        let mut base = HashSet::with_capacity(self.arcs.len());
        for &(i, j) in &self.arcs {
            if i >= n || j >= n {
                return Err(Error::validation(format!("arc ({i},{j}) references a missing node")));
            }
            if i == j {
                return Err(Error::validation(format!("arc ({i},{j}) is a self-loop")));
            }
            if self.nodes[i].layer != self.nodes[j].layer + 1 {
                return Err(Error::validation(format!(
                    "arc ({i},{j}) must go from layer L to L-1 (got {} -> {})",
                    self.nodes[i].layer, self.nodes[j].layer
                )));
            }
            if self.nodes[j].recruitable {
                return Err(Error::validation(format!(
                    "recruitable node {j} has an incoming base arc from {i}"
                )));
            }
            if !base.insert((i, j)) {
                return Err(Error::validation(format!("duplicate arc ({i},{j})")));
            }
        }

        let mut restructurable = HashSet::with_capacity(self.restructurable_arcs.len());
        for arc in &self.restructurable_arcs {
            let (i, j) = (arc.tail, arc.head);
            if i >= n || j >= n {
                return Err(Error::validation(format!(
                    "restructurable arc ({i},{j}) references a missing node"
                )));
            }
            if i == j {
                return Err(Error::validation(format!(
                    "restructurable arc ({i},{j}) is a self-loop"
                )));
            }
            if !arc.cost.is_finite() || arc.cost < 0.0 {
                return Err(Error::validation(format!(
                    "restructurable arc ({i},{j}) has invalid cost {}",
                    arc.cost
                )));
            }
            let (li, lj) = (self.nodes[i].layer, self.nodes[j].layer);
            let skips_one = li == lj + 2 && self.nodes[j].promotable;
            if li != lj + 1 && !skips_one {
                return Err(Error::validation(format!(
                    "restructurable arc ({i},{j}) spans layers {li} -> {lj}"
                )));
            }
            if base.contains(&(i, j)) {
                return Err(Error::validation(format!(
                    "arc ({i},{j}) is both a base and a restructurable arc"
                )));
            }
            if !restructurable.insert((i, j)) {
                return Err(Error::validation(format!(
                    "duplicate restructurable arc ({i},{j})"
                )));
            }
        }

        let adj = self.adjacency();
        let mut warnings = Vec::new();
        for node in &self.nodes {
            let out_degree = adj.children[node.id].len();
            if node.tau as usize > out_degree {
                warnings.push(format!(
                    "node {} needs {} interdicted children but has only {out_degree}; it can never be interdicted",
                    node.id, node.tau
                ));
            }
        }
        Ok(warnings)
    }
}

/// Where a split-network arc came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcOrigin {
    /// The arc `(i', i'')` standing in for node `i`.
    Node(NodeId),
    /// Index into `LayeredNetwork::arcs`.
    Base(usize),
    /// Index into `LayeredNetwork::restructurable_arcs`.
    Restructurable(usize),
    /// Super-source arc into a top-layer node.
    Source(NodeId),
    /// Super-sink arc out of a layer-1 node.
    Sink(NodeId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitArc {
    pub tail: usize,
    pub head: usize,
    pub capacity: f64,
    pub origin: ArcOrigin,
}

impl SplitArc {
    /// True for arcs between original nodes, which carry no capacity of their own.
    pub fn is_uncapacitated(&self) -> bool {
        matches!(self.origin, ArcOrigin::Base(_) | ArcOrigin::Restructurable(_))
    }
}

/// The node-split flow network. Split node `2i` is `i'`, `2i + 1` is `i''`;
/// the super-source and super-sink follow the original nodes.
///
/// Arc indices used by flows and cuts run over `arcs` first and then over
/// `restructurable`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitNetwork {
    pub num_nodes: usize,
    pub source: usize,
    pub sink: usize,
    pub arcs: Vec<SplitArc>,
    pub restructurable: Vec<SplitArc>,
    /// Original node -> index of its `(i', i'')` arc in `arcs`.
    pub node_arc: Vec<usize>,
    /// Finite stand-in for the capacity of uncapacitated arcs.
    pub sentinel: f64,
    pub num_original: usize,
}

impl SplitNetwork {
    pub fn in_node(i: NodeId) -> usize {
        2 * i
    }

    pub fn out_node(i: NodeId) -> usize {
        2 * i + 1
    }

    /// Original node behind a split node, `None` for the terminals.
    pub fn original_of(&self, v: usize) -> Option<NodeId> {
        (v < 2 * self.num_original).then_some(v / 2)
    }

    pub fn total_arcs(&self) -> usize {
        self.arcs.len() + self.restructurable.len()
    }

    pub fn arc(&self, idx: usize) -> &SplitArc {
        if idx < self.arcs.len() {
            &self.arcs[idx]
        } else {
            &self.restructurable[idx - self.arcs.len()]
        }
    }

    pub fn restructurable_index(&self, r: usize) -> usize {
        self.arcs.len() + r
    }

    pub fn all_arcs(&self) -> impl Iterator<Item = &SplitArc> {
        self.arcs.iter().chain(self.restructurable.iter())
    }

    /// Capacities after applying an interdiction and a restructuring plan.
    pub fn effective_capacities(&self, y: &InterdictionPlan, z: &RestructurePlan) -> Vec<f64> {
        let mut caps: Vec<f64> = self.all_arcs().map(|a| a.capacity).collect();
        for (i, &arc) in self.node_arc.iter().enumerate() {
            if y.is_interdicted(i) {
                caps[arc] = 0.0;
            }
        }
        for r in 0..self.restructurable.len() {
            if !z.is_active(r) {
                caps[self.arcs.len() + r] = 0.0;
            }
        }
        caps
    }

    pub fn flow_graph(&self, y: &InterdictionPlan, z: &RestructurePlan) -> FlowGraph {
        FlowGraph {
            num_nodes: self.num_nodes,
            source: self.source,
            sink: self.sink,
            arcs: self.all_arcs().map(|a| (a.tail, a.head)).collect(),
            capacities: self.effective_capacities(y, z),
        }
    }
}

/// Replaces each node with a capacitated arc and attaches the terminals.
pub fn split_nodes(net: &LayeredNetwork) -> Result<SplitNetwork> {
    net.validate()?;
    let n = net.nodes.len();
    let source = 2 * n;
    let sink = 2 * n + 1;
    let sentinel = 1.0 + net.nodes.iter().map(|v| v.capacity).sum::<f64>();

    let mut arcs = Vec::with_capacity(n + net.arcs.len() + n);
    let mut node_arc = Vec::with_capacity(n);
    for node in &net.nodes {
        node_arc.push(arcs.len());
        arcs.push(SplitArc {
            tail: SplitNetwork::in_node(node.id),
            head: SplitNetwork::out_node(node.id),
            capacity: node.capacity,
            origin: ArcOrigin::Node(node.id),
        });
    }
    for (idx, &(i, j)) in net.arcs.iter().enumerate() {
        arcs.push(SplitArc {
            tail: SplitNetwork::out_node(i),
            head: SplitNetwork::in_node(j),
            capacity: sentinel,
            origin: ArcOrigin::Base(idx),
        });
    }
    for node in net.top_layer_nodes() {
        arcs.push(SplitArc {
            tail: source,
            head: SplitNetwork::in_node(node.id),
            capacity: node.supply,
            origin: ArcOrigin::Source(node.id),
        });
    }
    for node in net.user_nodes() {
        arcs.push(SplitArc {
            tail: SplitNetwork::out_node(node.id),
            head: sink,
            capacity: node.demand,
            origin: ArcOrigin::Sink(node.id),
        });
    }
    let restructurable = net
        .restructurable_arcs
        .iter()
        .enumerate()
        .map(|(idx, a)| SplitArc {
            tail: SplitNetwork::out_node(a.tail),
            head: SplitNetwork::in_node(a.head),
            capacity: sentinel,
            origin: ArcOrigin::Restructurable(idx),
        })
        .collect();

    Ok(SplitNetwork {
        num_nodes: 2 * n + 2,
        source,
        sink,
        arcs,
        restructurable,
        node_arc,
        sentinel,
        num_original: n,
    })
}

/// A plain capacitated digraph with designated terminals.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowGraph {
    pub num_nodes: usize,
    pub source: usize,
    pub sink: usize,
    pub arcs: Vec<(usize, usize)>,
    pub capacities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowAssignment {
    pub flow: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutSolution {
    /// `true` for nodes in the source side `U`.
    pub source_side: Vec<bool>,
    pub cut_arcs: Vec<usize>,
    pub value: f64,
}

impl CutSolution {
    pub fn in_source_side(&self, v: usize) -> bool {
        self.source_side[v]
    }

    pub fn sink_side(&self) -> Vec<usize> {
        (0..self.source_side.len())
            .filter(|&v| !self.source_side[v])
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuxiliaryNetwork {
    pub num_nodes: usize,
    pub source: usize,
    pub sink: usize,
    pub arcs: Vec<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl AuxiliaryNetwork {
    fn new(num_nodes: usize, source: usize, sink: usize, arcs: Vec<(usize, usize)>) -> Self {
        let mut out_adj = vec![Vec::new(); num_nodes];
        let mut in_adj = vec![Vec::new(); num_nodes];
        for &(u, v) in &arcs {
            out_adj[u].push(v);
            in_adj[v].push(u);
        }
        AuxiliaryNetwork {
            num_nodes,
            source,
            sink,
            arcs,
            out_adj,
            in_adj,
        }
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.out_adj[u].contains(&v)
    }

    /// Nodes reachable from `start`.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        bfs(start, &self.out_adj)
    }

    /// Nodes from which `target` can be reached.
    pub fn reaching(&self, target: usize) -> Vec<bool> {
        bfs(target, &self.in_adj)
    }

    pub fn has_path(&self, from: usize, to: usize) -> bool {
        self.reachable_from(from)[to]
    }
}

fn bfs(start: usize, adj: &[Vec<usize>]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

#[derive(Clone, Copy, Debug)]
struct ResidualEdge {
    to: usize,
    rev: usize,
    cap: f64,
}

struct Dinic {
    graph: Vec<Vec<ResidualEdge>>,
    level: Vec<i64>,
    next: Vec<usize>,
}

impl Dinic {
    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = VecDeque::new();
        self.level[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for e in &self.graph[u] {
                if e.cap > RESIDUAL_EPS && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: f64) -> f64 {
        if u == t {
            return pushed;
        }
        while self.next[u] < self.graph[u].len() {
            let idx = self.next[u];
            let e = self.graph[u][idx];
            if e.cap > RESIDUAL_EPS && self.level[e.to] == self.level[u] + 1 {
                let got = self.dfs(e.to, t, pushed.min(e.cap));
                if got > 0.0 {
                    self.graph[u][idx].cap -= got;
                    self.graph[e.to][e.rev].cap += got;
                    return got;
                }
            }
            self.next[u] += 1;
        }
        0.0
    }
}

impl FlowGraph {
    /// Maximum s-t flow by blocking flows on level graphs.
    pub fn max_flow(&self) -> FlowAssignment {
        let mut dinic = Dinic {
            graph: vec![Vec::new(); self.num_nodes],
            level: vec![-1; self.num_nodes],
            next: vec![0; self.num_nodes],
        };
        let mut handles = Vec::with_capacity(self.arcs.len());
        for (&(u, v), &cap) in self.arcs.iter().zip(&self.capacities) {
            let fwd = dinic.graph[u].len();
            let bwd = dinic.graph[v].len() + usize::from(u == v);
            dinic.graph[u].push(ResidualEdge { to: v, rev: bwd, cap });
            dinic.graph[v].push(ResidualEdge { to: u, rev: fwd, cap: 0.0 });
            handles.push((u, fwd));
        }
        let (s, t) = (self.source, self.sink);
        if s != t {
            while dinic.bfs(s, t) {
                dinic.next.iter_mut().for_each(|p| *p = 0);
                loop {
                    let pushed = dinic.dfs(s, t, f64::INFINITY);
                    if pushed <= 0.0 {
                        break;
                    }
                }
            }
        }
        let flow: Vec<f64> = handles
            .iter()
            .zip(&self.capacities)
            .map(|(&(u, idx), &cap)| (cap - dinic.graph[u][idx].cap).clamp(0.0, cap))
            .collect();
        let mut value = 0.0;
        for (k, &(u, v)) in self.arcs.iter().enumerate() {
            if u == s {
                value += flow[k];
            }
            if v == s {
                value -= flow[k];
            }
        }
        FlowAssignment { flow, value }
    }

    pub fn auxiliary(&self, flow: &FlowAssignment) -> AuxiliaryNetwork {
        let mut arcs = Vec::new();
        for (k, &(u, v)) in self.arcs.iter().enumerate() {
            let x = flow.flow[k];
            if x < self.capacities[k] - RESIDUAL_EPS {
                arcs.push((u, v));
            }
            if x > RESIDUAL_EPS {
                arcs.push((v, u));
            }
        }
        AuxiliaryNetwork::new(self.num_nodes, self.source, self.sink, arcs)
    }

    /// Minimum cut whose source side is everything reachable from `s` in the
    /// auxiliary network of `flow`.
    pub fn min_cut(&self, flow: &FlowAssignment) -> Result<CutSolution> {
        let source_side = self.auxiliary(flow).reachable_from(self.source);
        if source_side[self.sink] {
            return Err(Error::Internal(
                "flow is not maximum: the sink is reachable in the auxiliary network".into(),
            ));
        }
        let mut cut_arcs = Vec::new();
        let mut value = 0.0;
        for (k, &(u, v)) in self.arcs.iter().enumerate() {
            if source_side[u] && !source_side[v] && self.capacities[k] > 0.0 {
                cut_arcs.push(k);
                value += self.capacities[k];
            }
        }
        if (value - flow.value).abs() > FLOW_TOL * value.abs().max(1.0) {
            return Err(Error::Internal(format!(
                "cut value {value} differs from flow value {}",
                flow.value
            )));
        }
        Ok(CutSolution {
            source_side,
            cut_arcs,
            value,
        })
    }
}

pub fn max_flow(snet: &SplitNetwork, y: &InterdictionPlan, z: &RestructurePlan) -> FlowAssignment {
    snet.flow_graph(y, z).max_flow()
}

pub fn min_cut(
    snet: &SplitNetwork,
    y: &InterdictionPlan,
    z: &RestructurePlan,
    flow: &FlowAssignment,
) -> Result<CutSolution> {
    snet.flow_graph(y, z).min_cut(flow)
}

pub fn auxiliary(
    snet: &SplitNetwork,
    y: &InterdictionPlan,
    z: &RestructurePlan,
    flow: &FlowAssignment,
) -> AuxiliaryNetwork {
    snet.flow_graph(y, z).auxiliary(flow)
}
