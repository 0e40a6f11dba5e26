//! Graph generation for the rank-1 model family.
//!
//! The Norros-Reittu multigraph assigns each unordered pair `{x,y}` a
//! Poisson(`W_x W_y / D`) number of edges (loops at rate `W_x^2 / D`), with
//! divisor `D` either the realized total weight or `n E[W]` (the primed
//! variants). The erased / Chung-Lu / generalised models are simple graphs
//! with per-pair Bernoulli probabilities `1 - exp(-p)`, `min(1, p)` and
//! `p / (1 + p)` for `p = W_x W_y / D`.
//!
//! Both generators run in expected time `O(n + edges)`:
//!
//! * the multigraph draws one Poisson total and assigns both endpoints of
//!   every edge i.i.d. proportionally to the weights via an alias table,
//!   which reproduces the exact pair rates and half the loop rate; an
//!   independent Poisson top-up per vertex restores the other half;
//! * the simple models sort vertices by weight and skip-sample each row
//!   under the bound `min(1, W_x W_next / D)`, rejecting candidates down to
//!   the model probability. The bound dominates all three models since each
//!   probability is at most `min(1, p)`.

use std::io::{self, BufRead, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::weights::WeightVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge list line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("edge list is missing the '# n=<n> model=<kind>' header")]
    MissingHeader,
    #[error("unknown model kind {0:?}")]
    UnknownKind(String),
}

/// Which member of the model family to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// Poisson multigraph with loops.
    Nr,
    /// Erased Norros-Reittu: simple graph with edge probability `1 - e^{-p}`.
    Enr,
    /// Chung-Lu: edge probability `min(1, p)`.
    Cl,
    /// Generalised random graph: edge probability `p / (1 + p)`.
    Grg,
}

impl GraphKind {
    pub fn label(&self) -> &'static str {
        match self {
            GraphKind::Nr => "nr",
            GraphKind::Enr => "enr",
            GraphKind::Cl => "cl",
            GraphKind::Grg => "grg",
        }
    }

    pub fn parse(s: &str) -> Result<Self, GraphError> {
        match s.to_ascii_lowercase().as_str() {
            "nr" => Ok(GraphKind::Nr),
            "enr" => Ok(GraphKind::Enr),
            "cl" => Ok(GraphKind::Cl),
            "grg" => Ok(GraphKind::Grg),
            _ => Err(GraphError::UnknownKind(s.to_string())),
        }
    }

    /// True for the variants that always produce simple graphs.
    pub fn is_simple(&self) -> bool {
        !matches!(self, GraphKind::Nr)
    }
}

/// Divisor `D` of the weight products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalizer {
    /// `D = L_n`, the realized total weight.
    WeightSum,
    /// `D = n E[W]` with the analytic model mean (the primed variants).
    ExpectedWeightSum { mean_weight: f64 },
}

impl Normalizer {
    pub fn divisor(&self, weights: &WeightVector) -> f64 {
        match self {
            Normalizer::WeightSum => weights.total(),
            Normalizer::ExpectedWeightSum { mean_weight } => {
                mean_weight * weights.len() as f64
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Normalizer::WeightSum => "ln",
            Normalizer::ExpectedWeightSum { .. } => "new",
        }
    }
}

/// A model variant: which graph law, and which divisor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelKind {
    pub kind: GraphKind,
    pub normalizer: Normalizer,
}

impl ModelKind {
    pub fn label(&self) -> String {
        match self.normalizer {
            Normalizer::WeightSum => self.kind.label().to_string(),
            Normalizer::ExpectedWeightSum { .. } => format!("{}'", self.kind.label()),
        }
    }
}

/// Vertex-labelled multigraph with non-negative integer edge multiplicities
/// and loops. Immutable after construction.
///
/// Adjacency lists hold only multiplicities >= 1, exclude loops, and are
/// sorted by neighbour id so membership is a binary search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    adjacency: Vec<Vec<(usize, u32)>>,
    loop_counts: Vec<u32>,
    edge_total: u64,
}

impl MultiGraph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Self { n, adjacency: vec![Vec::new(); n], loop_counts: vec![0; n], edge_total: 0 }
    }

    /// Builds from an unordered multiset of pair events plus loop counts.
    /// Pairs may repeat and may be given in either orientation.
    fn from_events(n: usize, mut events: Vec<(usize, usize)>, loop_counts: Vec<u32>) -> Self {
        debug_assert_eq!(loop_counts.len(), n);
        for e in events.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
            debug_assert!(e.0 < e.1 && e.1 < n);
        }
        events.sort_unstable();
        let mut adjacency = vec![Vec::new(); n];
        let mut edge_total: u64 = loop_counts.iter().map(|&c| c as u64).sum();
        let mut i = 0;
        while i < events.len() {
            let (x, y) = events[i];
            let mut mult = 0u32;
            while i < events.len() && events[i] == (x, y) {
                mult += 1;
                i += 1;
            }
            adjacency[x].push((y, mult));
            adjacency[y].push((x, mult));
            edge_total += mult as u64;
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable_by_key(|&(v, _)| v);
        }
        Self { n, adjacency, loop_counts, edge_total }
    }

    /// Builds from explicit `(u, v, multiplicity)` triples (`u == v` means a
    /// loop). Duplicated pairs accumulate.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let mut events = Vec::new();
        let mut loops = vec![0u32; n];
        for (idx, (u, v, m)) in edges.into_iter().enumerate() {
            if u >= n || v >= n {
                return Err(GraphError::Parse {
                    line: idx,
                    reason: format!("vertex pair ({u},{v}) out of range for n={n}"),
                });
            }
            if u == v {
                loops[u] += m;
            } else {
                for _ in 0..m {
                    events.push((u, v));
                }
            }
        }
        Ok(Self::from_events(n, events, loops))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total multi-edge count: all pair multiplicities plus all loops.
    pub fn edge_total(&self) -> u64 {
        self.edge_total
    }

    /// Neighbour list of `v` (no loops), sorted by id, with multiplicities.
    pub fn neighbors(&self, v: usize) -> &[(usize, u32)] {
        &self.adjacency[v]
    }

    /// Multiplicity of the pair `{x, y}`; for `x == y` the loop count.
    pub fn multiplicity(&self, x: usize, y: usize) -> u32 {
        if x == y {
            return self.loop_counts[x];
        }
        match self.adjacency[x].binary_search_by_key(&y, |&(v, _)| v) {
            Ok(i) => self.adjacency[x][i].1,
            Err(_) => 0,
        }
    }

    pub fn loop_count(&self, v: usize) -> u32 {
        self.loop_counts[v]
    }

    /// Number of distinct neighbours of `v`, excluding loops.
    pub fn degree(&self, v: usize) -> usize {
        assert!(v < self.n, "vertex {v} out of range for graph on {} vertices", self.n);
        self.adjacency[v].len()
    }

    /// True iff there are no loops and every multiplicity is at most 1.
    pub fn is_simple(&self) -> bool {
        self.loop_counts.iter().all(|&c| c == 0)
            && self.adjacency.iter().all(|l| l.iter().all(|&(_, m)| m <= 1))
    }

    /// Erasure: multiplicities capped at 1, loops removed, vertices kept.
    pub fn erase(&self) -> MultiGraph {
        let adjacency: Vec<Vec<(usize, u32)>> = self
            .adjacency
            .iter()
            .map(|l| l.iter().map(|&(v, _)| (v, 1)).collect())
            .collect();
        let edge_total = adjacency.iter().map(|l| l.len() as u64).sum::<u64>() / 2;
        MultiGraph { n: self.n, adjacency, loop_counts: vec![0; self.n], edge_total }
    }

    /// Structural audit used by the test suites: symmetry, sortedness,
    /// absence of zero multiplicities, and the edge-total identity.
    pub fn validate(&self) -> Result<(), String> {
        let mut total: u64 = self.loop_counts.iter().map(|&c| c as u64).sum();
        for x in 0..self.n {
            let list = &self.adjacency[x];
            for w in list.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(format!("adjacency of {x} not strictly sorted"));
                }
            }
            for &(y, m) in list {
                if m == 0 {
                    return Err(format!("zero multiplicity entry ({x},{y})"));
                }
                if y == x {
                    return Err(format!("loop stored in adjacency of {x}"));
                }
                if self.multiplicity(y, x) != m {
                    return Err(format!("asymmetry at ({x},{y})"));
                }
                if x < y {
                    total += m as u64;
                }
            }
        }
        if total != self.edge_total {
            return Err(format!(
                "edge_total mismatch: stored {} recomputed {total}",
                self.edge_total
            ));
        }
        Ok(())
    }

    /// Writes the edge list as text: optional extra header comments, then
    /// `# n=<n> model=<kind>`, then one `u v multiplicity` line per pair
    /// (1-based ids, loops as `u u m`).
    pub fn write_edge_list<W: Write>(
        &self,
        kind_label: &str,
        extra_header: &[String],
        out: &mut W,
    ) -> io::Result<()> {
        for line in extra_header {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "# n={} model={}", self.n, kind_label)?;
        for x in 0..self.n {
            if self.loop_counts[x] > 0 {
                writeln!(out, "{} {} {}", x + 1, x + 1, self.loop_counts[x])?;
            }
            for &(y, m) in &self.adjacency[x] {
                if y > x {
                    writeln!(out, "{} {} {}", x + 1, y + 1, m)?;
                }
            }
        }
        Ok(())
    }

    /// Parses the format written by [`MultiGraph::write_edge_list`].
    /// Returns the graph and the model label from the header.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<(MultiGraph, String), GraphError> {
        let mut n: Option<usize> = None;
        let mut model = String::new();
        let mut triples = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| GraphError::Parse {
                line: lineno + 1,
                reason: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for token in rest.split_whitespace() {
                    if let Some(v) = token.strip_prefix("n=") {
                        n = Some(v.parse().map_err(|_| GraphError::Parse {
                            line: lineno + 1,
                            reason: format!("bad n= value {v:?}"),
                        })?);
                    } else if let Some(v) = token.strip_prefix("model=") {
                        model = v.to_string();
                    }
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut next = |what: &str| {
                parts
                    .next()
                    .ok_or_else(|| GraphError::Parse {
                        line: lineno + 1,
                        reason: format!("missing {what}"),
                    })
                    .and_then(|t| {
                        t.parse::<u64>().map_err(|_| GraphError::Parse {
                            line: lineno + 1,
                            reason: format!("bad {what} {t:?}"),
                        })
                    })
            };
            let u = next("source vertex")?;
            let v = next("target vertex")?;
            let m = next("multiplicity")?;
            if u == 0 || v == 0 {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    reason: "vertex ids are 1-based".to_string(),
                });
            }
            triples.push((u as usize - 1, v as usize - 1, m as u32));
        }
        let n = n.ok_or(GraphError::MissingHeader)?;
        let graph = MultiGraph::from_edges(n, triples)?;
        Ok((graph, model))
    }
}

/// Generates the Poisson multigraph.
///
/// Draws the edge total `M ~ Poisson(L_n^2 / 2D)` (which is `Poisson(L_n/2)`
/// for `D = L_n`), assigns both endpoints of each edge i.i.d. proportional to
/// the weights, then tops up loops with an independent `Poisson(W_x^2 / 2D)`
/// per vertex. Marginally every pair multiplicity is exactly
/// Poisson(`W_x W_y / D`) and every loop count exactly Poisson(`W_x^2 / D`).
pub fn generate_nr<R: Rng + ?Sized>(
    weights: &WeightVector,
    normalizer: Normalizer,
    rng: &mut R,
) -> MultiGraph {
    let n = weights.len();
    if n == 0 {
        return MultiGraph::empty(0);
    }
    let d = normalizer.divisor(weights);
    let total = weights.total();
    let lambda = total * total / (2.0 * d);
    let m = poisson_draw(lambda, rng);

    let alias = AliasTable::new(weights.as_slice());
    let mut events = Vec::with_capacity(m as usize);
    let mut loops = vec![0u32; n];
    for _ in 0..m {
        let i = alias.sample(rng);
        let j = alias.sample(rng);
        if i == j {
            loops[i] += 1;
        } else {
            events.push((i, j));
        }
    }
    for (x, loop_count) in loops.iter_mut().enumerate() {
        let rate = weights.get(x) * weights.get(x) / (2.0 * d);
        *loop_count += poisson_draw(rate, rng) as u32;
    }
    MultiGraph::from_events(n, events, loops)
}

/// Generates one of the simple-graph variants by weight-sorted skip sampling.
///
/// `kind` must be [`GraphKind::Enr`], [`GraphKind::Cl`] or [`GraphKind::Grg`].
pub fn generate_simple<R: Rng + ?Sized>(
    weights: &WeightVector,
    kind: GraphKind,
    normalizer: Normalizer,
    rng: &mut R,
) -> MultiGraph {
    assert!(kind.is_simple(), "generate_simple called with the multigraph kind");
    let n = weights.len();
    if n == 0 {
        return MultiGraph::empty(0);
    }
    let d = normalizer.divisor(weights);

    // Vertices sorted by weight descending, ties by label for determinism.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| {
        weights
            .get(b)
            .partial_cmp(&weights.get(a))
            .expect("weights are finite")
            .then(a.cmp(&b))
    });
    let sorted: Vec<f64> = order.iter().map(|&v| weights.get(v)).collect();

    let mut events = Vec::new();
    for i in 0..n.saturating_sub(1) {
        // Row bound: the largest remaining weight is sorted[i + 1].
        let p_bar = (sorted[i] * sorted[i + 1] / d).min(1.0);
        if p_bar <= 0.0 {
            continue;
        }
        let mut j = i;
        loop {
            j = match j.checked_add(1 + geometric_skip(p_bar, rng, n)) {
                Some(next) => next,
                None => break,
            };
            if j >= n {
                break;
            }
            let p = sorted[i] * sorted[j] / d;
            let accept_prob = match kind {
                GraphKind::Enr => 1.0 - (-p).exp(),
                GraphKind::Cl => p.min(1.0),
                GraphKind::Grg => p / (p + 1.0),
                GraphKind::Nr => unreachable!(),
            };
            if rng.random::<f64>() * p_bar < accept_prob {
                events.push((order[i], order[j]));
            }
        }
    }
    MultiGraph::from_events(n, events, vec![0u32; n])
}

/// Dispatches on the model kind; `Nr` yields the multigraph, the others the
/// simple graphs.
pub fn generate<R: Rng + ?Sized>(
    weights: &WeightVector,
    model: ModelKind,
    rng: &mut R,
) -> MultiGraph {
    match model.kind {
        GraphKind::Nr => generate_nr(weights, model.normalizer, rng),
        kind => generate_simple(weights, kind, model.normalizer, rng),
    }
}

fn poisson_draw<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(lambda).expect("positive finite Poisson rate");
    dist.sample(rng) as u64
}

/// Number of failures before the first success of a Bernoulli(`p`) sequence;
/// results of `cap` or more all behave the same downstream, so they are
/// clamped to `cap`.
fn geometric_skip<R: Rng + ?Sized>(p: f64, rng: &mut R, cap: usize) -> usize {
    if p >= 1.0 {
        return 0;
    }
    let u = 1.0 - rng.random::<f64>(); // in (0, 1]
    let s = (u.ln() / (-p).ln_1p()).floor();
    if !s.is_finite() || s >= cap as f64 {
        cap
    } else {
        s as usize
    }
}

/// Alias table for O(1) sampling of an index proportional to its weight.
struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    fn new(weights: &[f64]) -> Self {
        let size = weights.len();
        let total: f64 = weights.iter().sum();
        let mut prob: Vec<f64> = weights
            .iter()
            .map(|w| w / total * size as f64)
            .collect();
        let mut alias: Vec<usize> = (0..size).collect();
        let mut small: Vec<usize> = Vec::new();
        let mut large: Vec<usize> = Vec::new();
        for (i, &p) in prob.iter().enumerate() {
            if p < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            alias[s] = l;
            prob[l] += prob[s] - 1.0;
            if prob[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // Leftovers are numerically 1.
        Self { prob, alias }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }
}
