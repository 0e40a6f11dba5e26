//! Union-find component partition against an independent BFS flood fill,
//! plus the partition and representative invariants.

use nrsim_core::components::{bfs_layers, components};
use nrsim_core::graphgen::{generate_nr, MultiGraph, Normalizer};
use nrsim_core::inference::rng_for_seed;
use nrsim_core::weights::WeightModel;
use rand::Rng;

/// Flood fill: repeatedly BFS from the smallest unvisited vertex.
fn flood_labels(g: &MultiGraph) -> Vec<usize> {
    let n = g.n();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let dist = bfs_layers(g, start);
        for v in 0..n {
            if dist[v].is_some() {
                label[v] = next;
            }
        }
        next += 1;
    }
    label
}

#[test]
fn union_find_agrees_with_bfs_flood_on_random_graphs() {
    let model = WeightModel::new(3.0, 0.25).unwrap();
    let mut rng = rng_for_seed(0xc0c0);
    for _ in 0..1_000 {
        let n = rng.random_range(2..=200);
        let weights = model.sample_weights(n, &mut rng);
        let g = generate_nr(&weights, Normalizer::WeightSum, &mut rng);
        let view = components(&g, &weights).unwrap();
        let flood = flood_labels(&g);

        // Same partition: ids agree as functions up to renaming; both sides
        // label components by their smallest vertex, so they agree exactly.
        for v in 0..n {
            assert_eq!(view.component_of(v), flood[v], "vertex {v}");
        }

        // Partition invariants.
        let total: usize = (0..view.count()).map(|c| view.members(c).len()).sum();
        assert_eq!(total, n);
        for c in 0..view.count() {
            for &v in view.members(c) {
                assert_eq!(view.component_of(v), c);
            }
        }

        // Representative: maximal weight, smallest label among maximizers.
        for c in 0..view.count() {
            let rep = view.representative(c);
            let max = view
                .members(c)
                .iter()
                .map(|&v| weights.get(v))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(weights.get(rep), max);
            for &v in view.members(c) {
                if weights.get(v) == max {
                    assert!(rep <= v);
                    break;
                }
            }
        }
    }
}
