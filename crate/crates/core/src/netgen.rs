//! Seeded generator for six-layer trafficking-style networks and their
//! recruitment and organizational variants.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{quantize, Instance, Meta, Variant};
use crate::network::{LayeredNetwork, NodeId, NodeRecord, RestructurableArc};
use crate::restructure::Leadership;

/// Layer sizes above the users for a 200-user network.
const REFERENCE_USERS: usize = 200;
const REFERENCE_UPPER: [usize; 5] = [40, 12, 6, 4, 2];

/// Stream offsets so each generation stage draws from its own sequence.
const STREAM_RECRUITMENT: u64 = 0x5eed_0001;
const STREAM_ORGANIZATIONAL: u64 = 0x5eed_0002;

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub num_users: usize,
    pub organizations: u32,
    /// Nodes per layer, users first. Overrides the scaling from `num_users`.
    pub layer_sizes: Option<Vec<usize>>,
    /// User capacity range in hundredths, inclusive.
    pub user_capacity: (u32, u32),
    /// Capacity of a non-user node relative to the sum over its children.
    pub capacity_factor: f64,
    pub layer_costs: Vec<f64>,
    pub layer_tau: Vec<u32>,
    /// Most restructurable arcs sampled into each node from the layer above.
    pub candidates_per_node: usize,
    pub max_restructurable: Option<usize>,
    pub variant: Variant,
    pub recruit_fraction: f64,
    pub k: u32,
    pub l: u32,
    pub arc_cost: f64,
    pub leadership_min: u32,
    pub restructure_budget: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            num_users: REFERENCE_USERS,
            organizations: 2,
            layer_sizes: None,
            user_capacity: (30, 90),
            capacity_factor: 1.2,
            layer_costs: vec![1.0, 2.0, 5.0, 10.0, 20.0, 35.0],
            layer_tau: vec![0, 2, 2, 1, 1, 1],
            candidates_per_node: 3,
            max_restructurable: None,
            variant: Variant::Base,
            recruit_fraction: 0.2,
            k: 1,
            l: 1,
            arc_cost: 1.0,
            leadership_min: 1,
            restructure_budget: 6.0,
        }
    }
}

impl GenParams {
    pub fn layer_sizes(&self) -> Vec<usize> {
        if let Some(sizes) = &self.layer_sizes {
            return sizes.clone();
        }
        let orgs = self.organizations as usize;
        let scale = |reference: usize| (self.num_users * reference + REFERENCE_USERS / 2) / REFERENCE_USERS;
        let mut sizes = vec![self.num_users];
        for (idx, &reference) in REFERENCE_UPPER.iter().enumerate() {
            let floor = match idx {
                0 => 1,
                1 => 2 * orgs,
                _ => orgs,
            };
            sizes.push(scale(reference).max(floor));
        }
        sizes
    }

    fn validate(&self) -> Result<Vec<usize>> {
        let sizes = self.layer_sizes();
        let layers = sizes.len();
        if layers < 2 {
            return Err(Error::validation("a network needs at least two layers"));
        }
        if sizes.contains(&0) {
            return Err(Error::validation("every layer needs at least one node"));
        }
        if self.organizations == 0 {
            return Err(Error::validation("at least one organization is required"));
        }
        if self.layer_costs.len() != layers || self.layer_tau.len() != layers {
            return Err(Error::validation(format!(
                "layer costs and tau must list {layers} values"
            )));
        }
        if sizes.iter().skip(2).any(|&s| s < self.organizations as usize) {
            return Err(Error::validation(
                "layers from 3 up need at least one node per organization",
            ));
        }
        let (lo, hi) = self.user_capacity;
        if lo == 0 || lo > hi {
            return Err(Error::validation("user capacity range must be positive and ordered"));
        }
        if !(0.0..=1.0).contains(&self.recruit_fraction) {
            return Err(Error::validation("recruit fraction must lie in [0, 1]"));
        }
        if self.l > self.k {
            return Err(Error::validation("l must not exceed k"));
        }
        Ok(sizes)
    }
}

fn round2(x: f64) -> f64 {
    quantize((x * 100.0).round() / 100.0)
}

struct Builder {
    nodes: Vec<NodeRecord>,
    arcs: BTreeSet<(NodeId, NodeId)>,
    restructurable: Vec<RestructurableArc>,
    layers: Vec<Vec<NodeId>>,
}

impl Builder {
    fn parents_of(&self, j: NodeId) -> BTreeSet<NodeId> {
        self.arcs.iter().filter(|&&(_, h)| h == j).map(|&(t, _)| t).collect()
    }

    fn children_of(&self, i: NodeId) -> Vec<NodeId> {
        self.arcs.iter().filter(|&&(t, _)| t == i).map(|&(_, h)| h).collect()
    }
}

/// Splits a layer into organization groups; layers without organizations
/// form one group.
fn groups(b: &Builder, layer: usize) -> BTreeMap<Option<u32>, Vec<NodeId>> {
    let mut out: BTreeMap<Option<u32>, Vec<NodeId>> = BTreeMap::new();
    for &id in &b.layers[layer] {
        out.entry(b.nodes[id].organization).or_default().push(id);
    }
    out
}

/// Nodes in `upper` a node of `lower` may attach to.
fn eligible_parents(b: &Builder, lower: NodeId, upper: usize) -> Vec<NodeId> {
    let org = b.nodes[lower].organization;
    b.layers[upper]
        .iter()
        .copied()
        .filter(|&p| org.is_none() || b.nodes[p].organization == org)
        .collect()
}

pub fn generate(params: &GenParams) -> Result<Instance> {
    let sizes = params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let num_layers = sizes.len();
    let orgs = params.organizations;

    let mut b = Builder {
        nodes: Vec::new(),
        arcs: BTreeSet::new(),
        restructurable: Vec::new(),
        layers: Vec::new(),
    };
    for (li, &count) in sizes.iter().enumerate() {
        let layer = li as u32 + 1;
        let mut ids = Vec::with_capacity(count);
        for pos in 0..count {
            let id = b.nodes.len();
            let mut node = NodeRecord::new(id, layer, 0.0);
            node.interdiction_cost = params.layer_costs[li];
            node.tau = params.layer_tau[li];
            node.k = params.k;
            node.l = params.l;
            node.s = params.l;
            if layer >= 3 {
                node.organization = Some((pos * orgs as usize / count) as u32);
            }
            b.nodes.push(node);
            ids.push(id);
        }
        b.layers.push(ids);
    }

    // every lower node gets one or two parents; every upper node at least one child
    for lower in 0..num_layers - 1 {
        let upper = lower + 1;
        let mut covered: BTreeSet<NodeId> = BTreeSet::new();
        for (org, members) in groups(&b, lower) {
            let mut uppers: Vec<NodeId> = b.layers[upper]
                .iter()
                .copied()
                .filter(|&p| org.is_none() || b.nodes[p].organization == org)
                .collect();
            uppers.shuffle(&mut rng);
            let mut lowers = members;
            lowers.shuffle(&mut rng);
            for (i, &j) in lowers.iter().enumerate() {
                let first = uppers[i % uppers.len()];
                b.arcs.insert((first, j));
                covered.insert(first);
                if uppers.len() > 1 && rng.gen_bool(0.5) {
                    let others: Vec<NodeId> = uppers.iter().copied().filter(|&p| p != first).collect();
                    let second = *others.choose(&mut rng).expect("two or more parents available");
                    b.arcs.insert((second, j));
                    covered.insert(second);
                }
            }
        }
        for p in b.layers[upper].clone() {
            if covered.contains(&p) {
                continue;
            }
            let org = b.nodes[p].organization;
            let options: Vec<NodeId> = b.layers[lower]
                .iter()
                .copied()
                .filter(|&j| b.nodes[j].organization.is_none() || b.nodes[j].organization == org)
                .collect();
            if let Some(&j) = options.choose(&mut rng) {
                b.arcs.insert((p, j));
            }
        }
    }

    // capacities bottom-up
    let (lo, hi) = params.user_capacity;
    for &id in &b.layers[0].clone() {
        let cap = round2(rng.gen_range(lo..=hi) as f64 / 100.0);
        b.nodes[id].capacity = cap;
        b.nodes[id].demand = cap;
    }
    for layer in 1..num_layers {
        for id in b.layers[layer].clone() {
            let total: f64 = b.children_of(id).iter().map(|&c| b.nodes[c].capacity).sum();
            b.nodes[id].capacity = round2(params.capacity_factor * total);
        }
    }
    for id in b.layers[num_layers - 1].clone() {
        b.nodes[id].supply = b.nodes[id].capacity;
    }

    // restructurable arcs from the layer above
    for lower in 0..num_layers - 1 {
        let upper = lower + 1;
        let before = b.restructurable.len();
        for j in b.layers[lower].clone() {
            let parents = b.parents_of(j);
            let candidates: Vec<NodeId> = eligible_parents(&b, j, upper)
                .into_iter()
                .filter(|p| !parents.contains(p))
                .collect();
            let count = rng.gen_range(0..=params.candidates_per_node).min(candidates.len());
            let mut picked: Vec<NodeId> = candidates.choose_multiple(&mut rng, count).copied().collect();
            picked.sort_unstable();
            for tail in picked {
                b.restructurable.push(RestructurableArc {
                    tail,
                    head: j,
                    cost: params.arc_cost,
                });
            }
        }
        if b.restructurable.len() == before {
            // organizations too small for an in-house replacement
            let fallback = b.layers[lower].iter().find_map(|&j| {
                let parents = b.parents_of(j);
                b.layers[upper].iter().find(|p| !parents.contains(p)).map(|&p| (p, j))
            });
            if let Some((tail, head)) = fallback {
                b.restructurable.push(RestructurableArc {
                    tail,
                    head,
                    cost: params.arc_cost,
                });
            }
        }
    }
    if let Some(cap) = params.max_restructurable {
        if b.restructurable.len() > cap {
            let mut keep = rand::seq::index::sample(&mut rng, b.restructurable.len(), cap).into_vec();
            keep.sort_unstable();
            let all = std::mem::take(&mut b.restructurable);
            b.restructurable = keep.into_iter().map(|i| all[i].clone()).collect();
        }
    }

    let leadership = leadership_set(&b.nodes, num_layers as u32, params.leadership_min);
    let mut instance = Instance {
        network: LayeredNetwork {
            nodes: b.nodes,
            arcs: b.arcs.into_iter().collect(),
            restructurable_arcs: b.restructurable,
            num_layers: num_layers as u32,
        },
        restructure_budget: params.restructure_budget,
        leadership,
        meta: Meta {
            seed: Some(params.seed),
            variant: Variant::Base,
        },
    };
    match params.variant {
        Variant::Base => {}
        Variant::Recruitment => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ STREAM_RECRUITMENT);
            add_recruitment(&mut instance, params.recruit_fraction, params.arc_cost, &mut rng)?;
        }
        Variant::Organizational => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ STREAM_ORGANIZATIONAL);
            add_org_restructuring(&mut instance, params.arc_cost, &mut rng)?;
        }
    }
    instance.validate()?;
    Ok(instance)
}

/// Top two layers of the two largest organizations.
fn leadership_set(nodes: &[NodeRecord], num_layers: u32, min_count: u32) -> Option<Leadership> {
    let mut sizes: BTreeMap<u32, usize> = BTreeMap::new();
    for n in nodes {
        if let Some(o) = n.organization {
            *sizes.entry(o).or_default() += 1;
        }
    }
    let mut ranked: Vec<(u32, usize)> = sizes.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let chosen: BTreeSet<u32> = ranked.iter().take(2).map(|&(o, _)| o).collect();
    let members: Vec<NodeId> = nodes
        .iter()
        .filter(|n| n.layer + 1 >= num_layers && n.organization.is_some_and(|o| chosen.contains(&o)))
        .map(|n| n.id)
        .collect();
    (!members.is_empty()).then_some(Leadership {
        nodes: members,
        min_count,
    })
}

fn push_node(net: &mut LayeredNetwork, template: NodeRecord) -> NodeId {
    let id = net.nodes.len();
    net.nodes.push(NodeRecord { id, ..template });
    id
}

fn ids_in(net: &LayeredNetwork, layer: u32) -> Vec<NodeId> {
    net.nodes_in_layer(layer).filter(|n| !n.recruitable).map(|n| n.id).collect()
}

/// Adds recruitable users, dealers and safe houses reachable only by
/// restructuring.
pub fn add_recruitment<R: Rng>(
    instance: &mut Instance,
    fraction: f64,
    arc_cost: f64,
    rng: &mut R,
) -> Result<()> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::validation("recruit fraction must lie in [0, 1]"));
    }
    let net = &mut instance.network;
    if net.num_layers < 3 {
        return Err(Error::validation("recruitment needs at least three layers"));
    }
    let users = ids_in(net, 1);
    let dealers = ids_in(net, 2);
    let houses = ids_in(net, 3);
    let count = |n: usize| (fraction * n as f64 - 1e-9).ceil().max(0.0) as usize;
    let pick = |rng: &mut R, from: &[NodeId], at_most: usize| -> Vec<NodeId> {
        let mut v: Vec<NodeId> = from.choose_multiple(rng, at_most.min(from.len())).copied().collect();
        v.sort_unstable();
        v
    };
    let template = |net: &LayeredNetwork, like: NodeId| {
        let mut n = net.nodes[like].clone();
        n.recruitable = true;
        n.promotable = false;
        n.cross_org_recruitable = false;
        n.supply = 0.0;
        n
    };

    for _ in 0..count(users.len()) {
        let like = *users.choose(rng).expect("users exist");
        let mut node = template(net, like);
        let cap = round2(rng.gen_range(30..=90) as f64 / 100.0);
        node.capacity = cap;
        node.demand = cap;
        let id = push_node(net, node);
        let k = rng.gen_range(1..=3);
        for tail in pick(rng, &dealers, k) {
            net.restructurable_arcs.push(RestructurableArc { tail, head: id, cost: arc_cost });
        }
    }
    for _ in 0..count(dealers.len()) {
        let like = *dealers.choose(rng).expect("dealers exist");
        let node = template(net, like);
        let id = push_node(net, node);
        let want = rng.gen_range(2..=4);
        let children = pick(rng, &users, want);
        let total: f64 = children.iter().map(|&c| net.nodes[c].capacity).sum();
        net.nodes[id].capacity = round2(1.2 * total);
        for c in children {
            net.arcs.push((id, c));
        }
        let k = rng.gen_range(1..=3);
        for tail in pick(rng, &houses, k) {
            net.restructurable_arcs.push(RestructurableArc { tail, head: id, cost: arc_cost });
        }
    }
    for _ in 0..count(houses.len()) {
        let like = *houses.choose(rng).expect("safe houses exist");
        let node = template(net, like);
        let id = push_node(net, node);
        let adj = net.adjacency();
        for &c in &adj.children[like] {
            net.arcs.push((id, c));
        }
        for &p in &adj.parents[like] {
            net.restructurable_arcs.push(RestructurableArc { tail: p, head: id, cost: arc_cost });
        }
    }
    instance.meta.variant = Variant::Recruitment;
    Ok(())
}

/// Adds promotion arcs skipping one layer and cross-organization arcs; both
/// can only be requested by their head.
pub fn add_org_restructuring<R: Rng>(instance: &mut Instance, arc_cost: f64, rng: &mut R) -> Result<()> {
    let net = &mut instance.network;
    let orgs: BTreeSet<u32> = net.nodes.iter().filter_map(|n| n.organization).collect();
    if orgs.len() < 2 {
        return Err(Error::validation(
            "organizational restructuring needs at least two organizations",
        ));
    }
    let existing: BTreeSet<(NodeId, NodeId)> = net
        .arcs
        .iter()
        .copied()
        .chain(net.restructurable_arcs.iter().map(|a| (a.tail, a.head)))
        .collect();
    let mut added = Vec::new();
    let top = net.num_layers;
    for j in 0..net.nodes.len() {
        let node = &net.nodes[j];
        let Some(org) = node.organization else { continue };
        let layer = node.layer;
        if layer + 2 <= top {
            let options: Vec<NodeId> = net
                .nodes_in_layer(layer + 2)
                .filter(|n| n.organization == Some(org) && !existing.contains(&(n.id, j)))
                .map(|n| n.id)
                .collect();
            if let Some(&tail) = options.choose(rng) {
                added.push((tail, j, true));
            }
        }
        if layer < top {
            let options: Vec<NodeId> = net
                .nodes_in_layer(layer + 1)
                .filter(|n| n.organization.is_some_and(|o| o != org) && !existing.contains(&(n.id, j)))
                .map(|n| n.id)
                .collect();
            if let Some(&tail) = options.choose(rng) {
                added.push((tail, j, false));
            }
        }
    }
    for (tail, head, promotion) in added {
        if promotion {
            net.nodes[head].promotable = true;
        } else {
            net.nodes[head].cross_org_recruitable = true;
        }
        net.restructurable_arcs.push(RestructurableArc { tail, head, cost: arc_cost });
    }
    instance.meta.variant = Variant::Organizational;
    Ok(())
}

/// Cheapest cost of interdicting `node` together with the children its
/// climbing requirement needs, counting shared descendants once per use.
pub fn ladder_cost(net: &LayeredNetwork, node: NodeId) -> f64 {
    fn go(net: &LayeredNetwork, children: &[Vec<NodeId>], i: NodeId, memo: &mut Vec<Option<f64>>) -> f64 {
        if let Some(c) = memo[i] {
            return c;
        }
        let tau = net.nodes[i].tau as usize;
        let mut costs: Vec<f64> = children[i].iter().map(|&c| go(net, children, c, memo)).collect();
        let cost = if costs.len() < tau {
            f64::INFINITY
        } else {
            costs.sort_by(f64::total_cmp);
            net.nodes[i].interdiction_cost + costs[..tau].iter().sum::<f64>()
        };
        memo[i] = Some(cost);
        cost
    }
    let adj = net.adjacency();
    let mut memo = vec![None; net.nodes.len()];
    go(net, &adj.children, node, &mut memo)
}
