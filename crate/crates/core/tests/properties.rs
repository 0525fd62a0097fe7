mod common;

use mfnipr::network::{self, LayeredNetwork};
use mfnipr::restructure::{enumerate_z, feasible, permissions, project, InterdictionPlan, RestructurePlan};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{exhaustive_min_cut, random_network, random_rules, random_y, random_z};

fn instance(seed: u64) -> (ChaCha8Rng, LayeredNetwork) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = rng.gen_range(2..=4);
    let sizes: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=3)).collect();
    let net = random_network(&mut rng, &sizes, 6);
    (rng, net)
}

/// At most six nodes, small enough for the exhaustive cut.
fn small_instance(seed: u64) -> (ChaCha8Rng, LayeredNetwork) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<usize> = (0..rng.gen_range(2..=3)).map(|_| rng.gen_range(1..=2)).collect();
    let net = random_network(&mut rng, &sizes, 4);
    (rng, net)
}

/// `y` with extra nodes interdicted.
fn superset<R: Rng>(rng: &mut R, y: &InterdictionPlan) -> InterdictionPlan {
    InterdictionPlan {
        y: y.y.iter().map(|&v| v || rng.gen_bool(0.3)).collect(),
    }
}

/// `z` with extra activations.
fn with_extra(rng: &mut ChaCha8Rng, z: &RestructurePlan) -> RestructurePlan {
    let extra = random_z(rng, z.len());
    RestructurePlan {
        z_in: z.z_in.iter().zip(&extra.z_in).map(|(&a, &b)| a || b).collect(),
        z_out: z.z_out.iter().zip(&extra.z_out).map(|(&a, &b)| a || b).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn empty_plan_always_feasible(seed in any::<u64>()) {
        let (mut rng, net) = instance(seed);
        let rules = random_rules(&mut rng, &net);
        let y = random_y(&mut rng, net.num_nodes(), 0.4);
        let z = RestructurePlan::empty(net.restructurable_arcs.len());
        prop_assert!(feasible(&net, &rules, &y, &z).is_feasible());
    }

    #[test]
    fn more_interdiction_never_shrinks_the_plan_set(seed in any::<u64>()) {
        let (mut rng, net) = instance(seed);
        let rules = random_rules(&mut rng, &net);
        let y = random_y(&mut rng, net.num_nodes(), 0.3);
        let wider = superset(&mut rng, &y);
        for z in enumerate_z(&net, &rules, &y, 1 << 16).unwrap() {
            prop_assert!(feasible(&net, &rules, &wider, &z).is_feasible());
        }
    }

    #[test]
    fn projection_is_feasible_and_idempotent(seed in any::<u64>()) {
        let (mut rng, net) = instance(seed);
        let rules = random_rules(&mut rng, &net);
        let y_hat = random_y(&mut rng, net.num_nodes(), 0.5);
        let y = random_y(&mut rng, net.num_nodes(), 0.5);
        let plans = enumerate_z(&net, &rules, &y_hat, 1 << 16).unwrap();
        let z = &plans[rng.gen_range(0..plans.len())];
        let w = permissions(&net, &y);
        let p = project(z, &w);
        prop_assert!(feasible(&net, &rules, &y, &p).is_feasible());
        prop_assert_eq!(project(&p, &w), p);
    }

    #[test]
    fn max_flow_equals_min_cut(seed in any::<u64>()) {
        let (mut rng, net) = small_instance(seed);
        let snet = network::split_nodes(&net).unwrap();
        let y = random_y(&mut rng, net.num_nodes(), 0.3);
        let z = random_z(&mut rng, net.restructurable_arcs.len());
        let g = snet.flow_graph(&y, &z);
        let flow = g.max_flow();
        prop_assert!((flow.value - exhaustive_min_cut(&g)).abs() <= 1e-9);
        let cut = g.min_cut(&flow).unwrap();
        prop_assert!((cut.value - flow.value).abs() <= 1e-9);
    }

    #[test]
    fn max_flow_is_monotone(seed in any::<u64>()) {
        let (mut rng, net) = instance(seed);
        let snet = network::split_nodes(&net).unwrap();
        let y = random_y(&mut rng, net.num_nodes(), 0.3);
        let z = random_z(&mut rng, net.restructurable_arcs.len());
        let base = network::max_flow(&snet, &y, &z).value;
        let more_cut = network::max_flow(&snet, &superset(&mut rng, &y), &z).value;
        let more_arcs = network::max_flow(&snet, &y, &with_extra(&mut rng, &z)).value;
        prop_assert!(more_cut <= base + 1e-9);
        prop_assert!(more_arcs >= base - 1e-9);
    }
}
