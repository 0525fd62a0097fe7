#![allow(dead_code)]

use mfnipr::network::{FlowGraph, LayeredNetwork, NodeRecord, RestructurableArc};
use mfnipr::restructure::{InterdictionPlan, RestructurePlan, RestructureRules};
use rand::Rng;

/// Random layered network; `sizes[0]` users, the last layer supplies.
pub fn random_network<R: Rng>(rng: &mut R, sizes: &[usize], max_restructurable: usize) -> LayeredNetwork {
    let mut nodes = Vec::new();
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for (li, &count) in sizes.iter().enumerate() {
        let layer = li as u32 + 1;
        let mut ids = Vec::new();
        for _ in 0..count {
            let id = nodes.len();
            let cap = rng.gen_range(1..=8) as f64 / 2.0;
            let mut n = NodeRecord::new(id, layer, cap);
            n.interdiction_cost = layer as f64;
            if layer == 1 {
                n.demand = rng.gen_range(1..=8) as f64 / 2.0;
            }
            if li + 1 == sizes.len() {
                n.supply = rng.gen_range(1..=8) as f64 / 2.0;
            }
            let k = rng.gen_range(1..=2);
            n.k = k;
            n.l = rng.gen_range(1..=k);
            n.s = rng.gen_range(1..=k);
            nodes.push(n);
            ids.push(id);
        }
        layers.push(ids);
    }
    let mut arcs = Vec::new();
    let mut spare = Vec::new();
    for l in 1..sizes.len() {
        for &child in &layers[l - 1] {
            let parents = &layers[l];
            let first = parents[rng.gen_range(0..parents.len())];
            arcs.push((first, child));
            for &p in parents {
                if p == first {
                    continue;
                }
                if rng.gen_bool(0.25) {
                    arcs.push((p, child));
                } else {
                    spare.push((p, child));
                }
            }
        }
    }
    let mut restructurable = Vec::new();
    for (tail, head) in spare {
        if restructurable.len() < max_restructurable && rng.gen_bool(0.7) {
            restructurable.push(RestructurableArc { tail, head, cost: 1.0 });
        }
    }
    LayeredNetwork {
        nodes,
        arcs,
        restructurable_arcs: restructurable,
        num_layers: sizes.len() as u32,
    }
}

pub fn random_rules<R: Rng>(rng: &mut R, net: &LayeredNetwork) -> RestructureRules {
    RestructureRules::from_network(net, rng.gen_range(1..=6) as f64)
}

pub fn random_y<R: Rng>(rng: &mut R, n: usize, p: f64) -> InterdictionPlan {
    InterdictionPlan {
        y: (0..n).map(|_| rng.gen_bool(p)).collect(),
    }
}

/// Any activation pattern, feasible or not, with at most one side per arc.
pub fn random_z<R: Rng>(rng: &mut R, m: usize) -> RestructurePlan {
    let mut z = RestructurePlan::empty(m);
    for r in 0..m {
        match rng.gen_range(0..3) {
            0 => z.z_in[r] = true,
            1 => z.z_out[r] = true,
            _ => {}
        }
    }
    z
}

/// Smallest capacity over every source/sink partition of the nodes.
pub fn exhaustive_min_cut(g: &FlowGraph) -> f64 {
    let inner: Vec<usize> = (0..g.num_nodes).filter(|&v| v != g.source && v != g.sink).collect();
    assert!(inner.len() <= 20);
    let mut best = f64::INFINITY;
    let mut side = vec![false; g.num_nodes];
    for mask in 0u32..(1 << inner.len()) {
        for (b, &v) in inner.iter().enumerate() {
            side[v] = mask >> b & 1 == 1;
        }
        side[g.source] = true;
        side[g.sink] = false;
        let cut: f64 = g
            .arcs
            .iter()
            .zip(&g.capacities)
            .filter(|(&(t, h), _)| side[t] && !side[h])
            .map(|(_, &c)| c)
            .sum();
        best = best.min(cut);
    }
    best
}
