//! Cross-class consistency of the counting statistics on random graphs.

use nrsim_core::components::components;
use nrsim_core::graphgen::{generate_nr, MultiGraph, Normalizer};
use nrsim_core::inference::rng_for_seed;
use nrsim_core::statistics::{count_statistic, RootedTree, StatisticSpec};
use nrsim_core::weights::{WeightModel, WeightVector};
use rand::Rng;

fn random_graph(rng: &mut impl Rng, n: usize) -> (MultiGraph, WeightVector) {
    let model = WeightModel::new(3.0, 0.25).unwrap();
    let weights = model.sample_weights(n, rng);
    let g = generate_nr(&weights, Normalizer::WeightSum, rng);
    (g, weights)
}

#[test]
fn distance_layers_partition_the_component() {
    let mut rng = rng_for_seed(0xd157);
    for _ in 0..300 {
        let n = rng.random_range(2..=60);
        let (g, w) = random_graph(&mut rng, n);
        let view = components(&g, &w).unwrap();
        for v in 0..n {
            let all = count_statistic(&g, &view, v, &StatisticSpec::AllVertices).unwrap();
            let mut sum = 0;
            for m in 0..=n {
                sum += count_statistic(&g, &view, v, &StatisticSpec::DistanceM(m)).unwrap();
            }
            assert_eq!(sum, all, "vertex {v}");
            // Distance one is the degree.
            let d1 = count_statistic(&g, &view, v, &StatisticSpec::DistanceM(1)).unwrap();
            assert_eq!(d1, g.degree(v) as u64);
        }
    }
}

/// Simple edge count of the component containing `v` (multiplicities and
/// loops ignored).
fn component_simple_edges(g: &MultiGraph, members: &[usize]) -> usize {
    members
        .iter()
        .map(|&x| g.neighbors(x).iter().filter(|&&(y, _)| y > x).count())
        .sum()
}

#[test]
fn leaf_counting_identity_on_tree_components() {
    // On a cycle-free component the terminal single-vertex trees are exactly
    // the degree-one vertices spreading away from v, i.e. all of them except
    // possibly v itself.
    let single = StatisticSpec::TerminalTree(RootedTree::single());
    let mut rng = rng_for_seed(0x1eaf);
    let mut trees_seen = 0;
    for _ in 0..400 {
        let n = rng.random_range(2..=40);
        let (g, w) = random_graph(&mut rng, n);
        let view = components(&g, &w).unwrap();
        for c in 0..view.count() {
            let members = view.members(c);
            if component_simple_edges(&g, members) != members.len() - 1 {
                continue; // not a tree
            }
            trees_seen += 1;
            for &v in members {
                let deg1 =
                    count_statistic(&g, &view, v, &StatisticSpec::DegreeM(1)).unwrap();
                let terminal = count_statistic(&g, &view, v, &single).unwrap();
                let self_leaf = u64::from(g.degree(v) == 1);
                assert_eq!(deg1, terminal + self_leaf, "component {c} vertex {v}");
            }
        }
    }
    assert!(trees_seen > 100, "not enough tree components exercised: {trees_seen}");
}

#[test]
fn all_vertices_at_isolated_vertex_is_one() {
    let mut rng = rng_for_seed(0x1501);
    let (g, w) = random_graph(&mut rng, 30);
    let view = components(&g, &w).unwrap();
    for v in 0..30 {
        if g.degree(v) == 0 {
            let all = count_statistic(&g, &view, v, &StatisticSpec::AllVertices).unwrap();
            assert_eq!(all, 1);
        }
    }
}
