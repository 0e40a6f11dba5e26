//! Brute-force reference implementations for the test suites.
//!
//! Everything here trades speed for obviousness and stays independent of the
//! fast paths it validates: the generators draw every pair separately, the
//! isomorphism and automorphism routines enumerate bijections.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::graphgen::{GraphKind, MultiGraph};
use crate::statistics::RootedTree;
use crate::weights::WeightVector;

/// O(n^2) Norros-Reittu generator: one Poisson draw per unordered pair at
/// rate `W_x W_y / divisor` and per loop at rate `W_x^2 / divisor`.
pub fn naive_norros_reittu<R: Rng + ?Sized>(
    weights: &WeightVector,
    divisor: f64,
    rng: &mut R,
) -> MultiGraph {
    let n = weights.len();
    let mut triples = Vec::new();
    for x in 0..n {
        for y in x..n {
            let rate = if x == y {
                weights.get(x) * weights.get(x) / divisor
            } else {
                weights.get(x) * weights.get(y) / divisor
            };
            let m = Poisson::new(rate).expect("positive rate").sample(rng) as u32;
            if m > 0 {
                triples.push((x, y, m));
            }
        }
    }
    MultiGraph::from_edges(n, triples).expect("pairs are in range")
}

/// O(n^2) generator for the simple variants: an independent Bernoulli per
/// pair with the model's probability.
pub fn naive_simple<R: Rng + ?Sized>(
    weights: &WeightVector,
    kind: GraphKind,
    divisor: f64,
    rng: &mut R,
) -> MultiGraph {
    assert!(kind.is_simple(), "naive_simple called with the multigraph kind");
    let n = weights.len();
    let mut triples = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            let p = weights.get(x) * weights.get(y) / divisor;
            let prob = match kind {
                GraphKind::Enr => 1.0 - (-p).exp(),
                GraphKind::Cl => p.min(1.0),
                GraphKind::Grg => p / (p + 1.0),
                GraphKind::Nr => unreachable!(),
            };
            if rng.random::<f64>() < prob {
                triples.push((x, y, 1));
            }
        }
    }
    MultiGraph::from_edges(n, triples).expect("pairs are in range")
}

/// All rooted trees on exactly `m` vertices as increasing parent arrays
/// (vertex `i` gets a parent among `0..i`). Every isomorphism class appears
/// at least once; duplicates are allowed and harmless for oracle sweeps.
pub fn rooted_trees_exactly(m: usize) -> Vec<RootedTree> {
    assert!(m >= 1);
    let mut out = Vec::new();
    let mut parents: Vec<Option<usize>> = vec![None];
    fn extend(parents: &mut Vec<Option<usize>>, m: usize, out: &mut Vec<RootedTree>) {
        if parents.len() == m {
            out.push(RootedTree::from_parents(parents.clone()).expect("valid by construction"));
            return;
        }
        let next = parents.len();
        for p in 0..next {
            parents.push(Some(p));
            extend(parents, m, out);
            parents.pop();
        }
    }
    extend(&mut parents, m, &mut out);
    out
}

/// All rooted trees with between 1 and `m_max` vertices (see
/// [`rooted_trees_exactly`] for the duplication caveat).
pub fn rooted_trees_up_to(m_max: usize) -> Vec<RootedTree> {
    (1..=m_max).flat_map(rooted_trees_exactly).collect()
}

/// Root-preserving isomorphism by enumerating all bijections that fix the
/// root and checking that they carry parents to parents.
pub fn is_root_iso_bruteforce(a: &RootedTree, b: &RootedTree) -> bool {
    let m = a.vertex_count();
    if b.vertex_count() != m {
        return false;
    }
    if m == 1 {
        return true;
    }
    let mut image: Vec<usize> = (1..m).collect();
    permutations_find(&mut image, 0, &mut |perm| {
        // perm maps vertex i+1 of a to perm[i] of b; the root maps to itself.
        let map = |v: usize| if v == 0 { 0 } else { perm[v - 1] };
        (1..m).all(|v| {
            let pa = a.parent_of(v).expect("non-root");
            b.parent_of(map(v)) == Some(map(pa))
        })
    })
}

/// Order of the root-preserving automorphism group by checking every
/// root-fixing permutation.
pub fn automorphism_order_bruteforce(t: &RootedTree) -> u64 {
    let m = t.vertex_count();
    if m == 1 {
        return 1;
    }
    let mut image: Vec<usize> = (1..m).collect();
    let mut count = 0u64;
    permutations_for_each(&mut image, 0, &mut |perm| {
        let map = |v: usize| if v == 0 { 0 } else { perm[v - 1] };
        let ok = (1..m).all(|v| {
            let p = t.parent_of(v).expect("non-root");
            t.parent_of(map(v)) == Some(map(p))
        });
        if ok {
            count += 1;
        }
    });
    count
}

/// Heap-style in-place permutation sweep; stops early when `check` succeeds.
fn permutations_find(
    items: &mut Vec<usize>,
    k: usize,
    check: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if k == items.len() {
        return check(items);
    }
    for i in k..items.len() {
        items.swap(k, i);
        if permutations_find(items, k + 1, check) {
            items.swap(k, i);
            return true;
        }
        items.swap(k, i);
    }
    false
}

fn permutations_for_each(
    items: &mut Vec<usize>,
    k: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations_for_each(items, k + 1, visit);
        items.swap(k, i);
    }
}
