//! Connected components, per-component max-weight representatives, and BFS
//! distance layers. Multiplicities and loops are ignored by every traversal:
//! paths are sequences of distinct vertices, so only the existence of at
//! least one edge between two vertices matters.

use thiserror::Error;

use crate::graphgen::MultiGraph;
use crate::weights::WeightVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComponentError {
    #[error("weight vector has {weights} entries but the graph has {graph} vertices")]
    LengthMismatch { graph: usize, weights: usize },
}

/// Partition of the vertex set into components.
///
/// Component ids are assigned in order of each component's smallest vertex,
/// members are listed in ascending vertex order, and the representative of a
/// component is its max-weight vertex with ties broken by the smallest label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentView {
    component_id: Vec<usize>,
    members: Vec<Vec<usize>>,
    representatives: Vec<usize>,
}

impl ComponentView {
    /// Number of components.
    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn component_of(&self, v: usize) -> usize {
        self.component_id[v]
    }

    pub fn members(&self, component: usize) -> &[usize] {
        &self.members[component]
    }

    pub fn representative(&self, component: usize) -> usize {
        self.representatives[component]
    }

    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }

    pub fn size_of_component_of(&self, v: usize) -> usize {
        self.members[self.component_id[v]].len()
    }
}

/// Computes the component partition by union-find and selects per-component
/// representatives by a single max scan with the smallest-label tie rule.
pub fn components(
    graph: &MultiGraph,
    weights: &WeightVector,
) -> Result<ComponentView, ComponentError> {
    let n = graph.n();
    if weights.len() != n {
        return Err(ComponentError::LengthMismatch { graph: n, weights: weights.len() });
    }
    let mut dsu = UnionFind::new(n);
    for x in 0..n {
        for &(y, _) in graph.neighbors(x) {
            if y > x {
                dsu.union(x, y);
            }
        }
    }

    let mut component_id = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let root = dsu.find(v);
        if component_id[root] == usize::MAX {
            component_id[root] = members.len();
            members.push(Vec::new());
        }
        let c = component_id[root];
        component_id[v] = c;
        members[c].push(v);
    }
    let representatives = members
        .iter()
        .map(|verts| {
            let mut best = verts[0];
            for &v in &verts[1..] {
                if weights.get(v) > weights.get(best) {
                    best = v;
                }
            }
            best
        })
        .collect();
    Ok(ComponentView { component_id, members, representatives })
}

/// BFS distances from `v`, ignoring multiplicities and loops. Unreachable
/// vertices map to `None`; `d(v, v) = 0`.
pub fn bfs_layers(graph: &MultiGraph, v: usize) -> Vec<Option<u32>> {
    let n = graph.n();
    assert!(v < n, "vertex {v} out of range for graph on {n} vertices");
    let mut dist = vec![None; n];
    dist[v] = Some(0);
    let mut queue = std::collections::VecDeque::from([v]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[x].expect("queued vertices have distances");
        for &(y, _) in graph.neighbors(x) {
            if dist[y].is_none() {
                dist[y] = Some(dx + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}
