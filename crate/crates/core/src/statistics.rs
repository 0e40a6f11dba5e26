//! Per-component counting statistics.
//!
//! Four vertex classes can be counted inside the component of a vertex `v`:
//! the whole component, the vertices at a fixed graph distance from `v`, the
//! vertices of a fixed degree, and the roots of terminal trees — vertices
//! `x` with a unique simple path from `v` whose descendant subgraph is an
//! exact copy of a given rooted tree with no further edges attached. All
//! counts ignore loops and edge multiplicities.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::components::ComponentView;
use crate::graphgen::MultiGraph;

/// Component-size cap for the simple-path enumeration behind the
/// terminal-tree count. Subcritical components are far smaller in intended
/// use; exceeding the cap is reported, never silently truncated.
pub const DEFAULT_PATH_CAP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatisticsError {
    #[error("rooted tree parse error: {0}")]
    TreeParse(String),
    #[error(
        "component of size {size} exceeds the path-enumeration cap {cap} \
         for the terminal-tree statistic"
    )]
    PathCapExceeded { size: usize, cap: usize },
    #[error("component of size {size} exceeds the brute-force limit {limit}")]
    ComponentTooLarge { size: usize, limit: usize },
    #[error("statistic spec parse error: {0}")]
    SpecParse(String),
}

/// A rooted tree pattern on vertices `1..=m` (stored 0-based) with root 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl RootedTree {
    /// Single-vertex tree.
    pub fn single() -> Self {
        Self::from_parents(vec![None]).expect("single vertex is a valid tree")
    }

    /// Builds from 0-based parent links; entry 0 must be the root.
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self, StatisticsError> {
        let m = parent.len();
        if m == 0 {
            return Err(StatisticsError::TreeParse("tree must be non-empty".into()));
        }
        if parent[0].is_some() {
            return Err(StatisticsError::TreeParse("vertex 1 must be the root".into()));
        }
        let mut children = vec![Vec::new(); m];
        for (i, &p) in parent.iter().enumerate().skip(1) {
            match p {
                None => {
                    return Err(StatisticsError::TreeParse(format!(
                        "vertex {} declares a second root",
                        i + 1
                    )))
                }
                Some(p) if p >= m => {
                    return Err(StatisticsError::TreeParse(format!(
                        "parent {} of vertex {} out of range",
                        p + 1,
                        i + 1
                    )))
                }
                Some(p) => children[p].push(i),
            }
        }
        // Every vertex must reach the root; a cycle never does.
        for mut v in 0..m {
            let mut steps = 0;
            while let Some(p) = parent[v] {
                v = p;
                steps += 1;
                if steps > m {
                    return Err(StatisticsError::TreeParse(
                        "parent links contain a cycle".into(),
                    ));
                }
            }
        }
        Ok(Self { parent, children })
    }

    /// Parses either a parent array (`0 1 1 2`, 1-based with 0 marking the
    /// root, separated by whitespace or dots) or an AHU string (`(()())`).
    pub fn parse(text: &str) -> Result<Self, StatisticsError> {
        let text = text.trim();
        if text.starts_with('(') {
            Self::from_ahu(text)
        } else {
            Self::from_parent_array(text)
        }
    }

    /// Parses the 1-based parent-array form, e.g. `0 1 1 2`.
    pub fn from_parent_array(text: &str) -> Result<Self, StatisticsError> {
        let tokens: Vec<&str> = text
            .split(|c: char| c.is_whitespace() || c == '.' || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err(StatisticsError::TreeParse("empty parent array".into()));
        }
        let mut parent = Vec::with_capacity(tokens.len());
        for (i, token) in tokens.iter().enumerate() {
            let value: usize = token.parse().map_err(|_| {
                StatisticsError::TreeParse(format!("bad parent entry {token:?}"))
            })?;
            if value == 0 {
                if i != 0 {
                    return Err(StatisticsError::TreeParse(format!(
                        "root marker 0 at position {} (only vertex 1 may be the root)",
                        i + 1
                    )));
                }
                parent.push(None);
            } else {
                parent.push(Some(value - 1));
            }
        }
        Self::from_parents(parent)
    }

    /// Parses the AHU string form, e.g. `(()())` for a root with two leaves.
    pub fn from_ahu(text: &str) -> Result<Self, StatisticsError> {
        let bytes = text.as_bytes();
        let mut parent: Vec<Option<usize>> = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => {
                    if stack.is_empty() && !parent.is_empty() {
                        return Err(StatisticsError::TreeParse(
                            "AHU string has more than one root".into(),
                        ));
                    }
                    let id = parent.len();
                    parent.push(stack.last().copied());
                    stack.push(id);
                }
                b')' => {
                    if stack.pop().is_none() {
                        return Err(StatisticsError::TreeParse(format!(
                            "unbalanced ')' at byte {i}"
                        )));
                    }
                }
                c if c.is_ascii_whitespace() => {}
                c => {
                    return Err(StatisticsError::TreeParse(format!(
                        "unexpected character {:?} in AHU string",
                        c as char
                    )))
                }
            }
        }
        if !stack.is_empty() {
            return Err(StatisticsError::TreeParse("unbalanced '(' at end".into()));
        }
        if parent.is_empty() {
            return Err(StatisticsError::TreeParse("empty AHU string".into()));
        }
        Self::from_parents(parent)
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent_of(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Tree degree: the root counts its children, everyone else one more.
    pub fn tree_degree(&self, v: usize) -> usize {
        self.children[v].len() + usize::from(self.parent[v].is_some())
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.vertex_count()).map(|v| self.tree_degree(v)).collect()
    }

    /// 1-based parent-array form, e.g. `0 1 1 2`.
    pub fn to_parent_string(&self, sep: &str) -> String {
        self.parent
            .iter()
            .map(|p| match p {
                None => "0".to_string(),
                Some(p) => (p + 1).to_string(),
            })
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Vertices ordered so every child appears before its parent.
    fn bottom_up_order(&self) -> Vec<usize> {
        let m = self.vertex_count();
        let mut depth = vec![0usize; m];
        let mut order: Vec<usize> = (0..m).collect();
        // Parents may precede or follow children in the array; compute depth
        // by walking up (trees are validated acyclic).
        for v in 0..m {
            let mut d = 0;
            let mut x = v;
            while let Some(p) = self.parent[x] {
                d += 1;
                x = p;
            }
            depth[v] = d;
        }
        order.sort_by_key(|&v| std::cmp::Reverse(depth[v]));
        order
    }
}

/// Canonical AHU encoding: a leaf is `()`, an internal vertex wraps the
/// sorted encodings of its children. Two rooted trees get equal strings iff
/// they are isomorphic by a root-preserving isomorphism.
pub fn canonical_form(tree: &RootedTree) -> String {
    canon_and_automorphisms(tree).0
}

/// Order of the root-preserving automorphism group, computed bottom-up
/// alongside canonicalization as the product over vertices of `k!` for every
/// group of `k` identical child encodings.
pub fn automorphism_count(tree: &RootedTree) -> u64 {
    canon_and_automorphisms(tree).1
}

fn canon_and_automorphisms(tree: &RootedTree) -> (String, u64) {
    let m = tree.vertex_count();
    let mut codes: Vec<String> = vec![String::new(); m];
    let mut aut: u64 = 1;
    for v in tree.bottom_up_order() {
        let mut child_codes: Vec<&str> =
            tree.children(v).iter().map(|&c| codes[c].as_str()).collect();
        child_codes.sort_unstable();
        // A run of k identical child codes contributes k! = 2 * 3 * ... * k.
        let mut run = 1u64;
        for i in 1..child_codes.len() {
            if child_codes[i] == child_codes[i - 1] {
                run += 1;
                aut = aut.checked_mul(run).expect("automorphism count exceeds u64");
            } else {
                run = 1;
            }
        }
        let mut code = String::with_capacity(2 + child_codes.iter().map(|c| c.len()).sum::<usize>());
        code.push('(');
        for c in &child_codes {
            code.push_str(c);
        }
        code.push(')');
        codes[v] = code;
    }
    (codes[0].clone(), aut)
}

/// Which class of vertices to count in the component of `v`.
#[derive(Debug, Clone, PartialEq)]
pub enum StatisticSpec {
    /// The whole component, `v` included.
    AllVertices,
    /// Vertices at graph distance exactly `m` from `v`.
    DistanceM(usize),
    /// Vertices of degree exactly `m` (distinct neighbours, loops ignored).
    DegreeM(usize),
    /// Roots of terminal copies of the given rooted tree.
    TerminalTree(RootedTree),
}

impl fmt::Display for StatisticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatisticSpec::AllVertices => write!(f, "all"),
            StatisticSpec::DistanceM(m) => write!(f, "dist:{m}"),
            StatisticSpec::DegreeM(m) => write!(f, "deg:{m}"),
            StatisticSpec::TerminalTree(t) => write!(f, "tree:{}", t.to_parent_string(".")),
        }
    }
}

impl FromStr for StatisticSpec {
    type Err = StatisticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(StatisticSpec::AllVertices);
        }
        if let Some(m) = s.strip_prefix("dist:") {
            let m: usize = m
                .parse()
                .map_err(|_| StatisticsError::SpecParse(format!("bad distance {m:?}")))?;
            if m == 0 {
                return Err(StatisticsError::SpecParse(
                    "distance class needs m >= 1".into(),
                ));
            }
            return Ok(StatisticSpec::DistanceM(m));
        }
        if let Some(m) = s.strip_prefix("deg:") {
            let m: usize = m
                .parse()
                .map_err(|_| StatisticsError::SpecParse(format!("bad degree {m:?}")))?;
            if m == 0 {
                return Err(StatisticsError::SpecParse("degree class needs m >= 1".into()));
            }
            return Ok(StatisticSpec::DegreeM(m));
        }
        if let Some(t) = s.strip_prefix("tree:") {
            return Ok(StatisticSpec::TerminalTree(RootedTree::parse(t)?));
        }
        Err(StatisticsError::SpecParse(format!(
            "unknown statistic {s:?} (expected all, dist:<m>, deg:<m>, tree:<tree>)"
        )))
    }
}

/// Counts the vertex class selected by `spec` in the component of `v`, with
/// the default path-enumeration cap.
pub fn count_statistic(
    graph: &MultiGraph,
    view: &ComponentView,
    v: usize,
    spec: &StatisticSpec,
) -> Result<u64, StatisticsError> {
    count_statistic_capped(graph, view, v, spec, DEFAULT_PATH_CAP)
}

/// Like [`count_statistic`] with an explicit cap for the terminal-tree path
/// enumeration (the other statistics never hit it).
pub fn count_statistic_capped(
    graph: &MultiGraph,
    view: &ComponentView,
    v: usize,
    spec: &StatisticSpec,
    cap: usize,
) -> Result<u64, StatisticsError> {
    let members = view.members(view.component_of(v));
    match spec {
        StatisticSpec::AllVertices => Ok(members.len() as u64),
        StatisticSpec::DistanceM(m) => {
            // BFS in component-local index space: the cost is bounded by the
            // component, not the graph, which matters when evaluating every
            // representative of a large graph.
            let local = LocalComponent::new(graph, members);
            let dist = local.bfs(local.local_of(v));
            let m = *m as u32;
            Ok(dist.iter().filter(|&&d| d == Some(m)).count() as u64)
        }
        StatisticSpec::DegreeM(m) => {
            Ok(members.iter().filter(|&&x| graph.degree(x) == *m).count() as u64)
        }
        StatisticSpec::TerminalTree(tree) => {
            if members.len() > cap {
                return Err(StatisticsError::PathCapExceeded {
                    size: members.len(),
                    cap,
                });
            }
            let target = canonical_form(tree);
            let local = LocalComponent::new(graph, members);
            let v_local = local.local_of(v);
            let mut count = 0u64;
            for x_local in 0..members.len() {
                if x_local == v_local {
                    // v has no path-predecessor, so it never roots a
                    // terminal tree.
                    continue;
                }
                let pred = match local.unique_path_predecessor(v_local, x_local) {
                    PathCount::One { predecessor } => predecessor,
                    _ => continue,
                };
                let descendants = local.reachable_without(x_local, pred);
                if descendants.len() != tree.vertex_count() {
                    continue;
                }
                // The only edges allowed to leave the descendant set are x's
                // own edges back to its predecessor.
                if descendants
                    .iter()
                    .any(|&y| y != x_local && local.adj[y].contains(&pred))
                {
                    continue;
                }
                if let Some(code) = local.induced_tree_canon(&descendants, x_local) {
                    if code == target {
                        count += 1;
                    }
                }
            }
            Ok(count)
        }
    }
}

enum PathCount {
    Zero,
    One { predecessor: usize },
    Several,
}

/// A component re-indexed as `0..size`, with its own adjacency lists.
/// Neighbours of members are members, so the translation is total.
struct LocalComponent<'a> {
    members: &'a [usize],
    adj: Vec<Vec<usize>>,
}

impl<'a> LocalComponent<'a> {
    fn new(graph: &MultiGraph, members: &'a [usize]) -> Self {
        let adj = members
            .iter()
            .map(|&y| {
                graph
                    .neighbors(y)
                    .iter()
                    .map(|&(z, _)| {
                        members.binary_search(&z).expect("neighbour inside the component")
                    })
                    .collect()
            })
            .collect();
        Self { members, adj }
    }

    fn local_of(&self, vertex: usize) -> usize {
        self.members
            .binary_search(&vertex)
            .expect("vertex inside the component")
    }

    fn bfs(&self, start: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.members.len()];
        dist[start] = Some(0);
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].expect("queued vertices have distances");
            for &y in &self.adj[x] {
                if dist[y].is_none() {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Enumerates simple paths from `v` to `x` by DFS with an early exit as
    /// soon as a second path is found.
    fn unique_path_predecessor(&self, v: usize, x: usize) -> PathCount {
        struct Search<'b> {
            adj: &'b [Vec<usize>],
            target: usize,
            on_path: Vec<bool>,
            found: usize,
            predecessor: usize,
        }

        // Returns true once the second path is found, aborting the search.
        fn dfs(s: &mut Search<'_>, current: usize) -> bool {
            s.on_path[current] = true;
            for &next in &s.adj[current] {
                if next == s.target {
                    s.found += 1;
                    if s.found == 1 {
                        s.predecessor = current;
                    }
                    if s.found >= 2 {
                        s.on_path[current] = false;
                        return true;
                    }
                } else if !s.on_path[next] && dfs(s, next) {
                    s.on_path[current] = false;
                    return true;
                }
            }
            s.on_path[current] = false;
            false
        }

        debug_assert_ne!(v, x);
        let mut search = Search {
            adj: &self.adj,
            target: x,
            on_path: vec![false; self.members.len()],
            found: 0,
            predecessor: usize::MAX,
        };
        dfs(&mut search, v);
        match search.found {
            0 => PathCount::Zero,
            1 => PathCount::One { predecessor: search.predecessor },
            _ => PathCount::Several,
        }
    }

    /// Vertices reachable from `start` when `banned` is deleted, sorted.
    fn reachable_without(&self, start: usize, banned: usize) -> Vec<usize> {
        let mut seen = vec![false; self.members.len()];
        seen[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        let mut out = vec![start];
        while let Some(y) = queue.pop_front() {
            for &z in &self.adj[y] {
                if z != banned && !seen[z] {
                    seen[z] = true;
                    out.push(z);
                    queue.push_back(z);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// If the simple subgraph induced by `set` is a tree, returns the
    /// canonical form of that tree rooted at `root`.
    fn induced_tree_canon(&self, set: &[usize], root: usize) -> Option<String> {
        let in_set = |y: usize| set.binary_search(&y).is_ok();
        let mut simple_edges = 0usize;
        for &y in set {
            for &z in &self.adj[y] {
                if z > y && in_set(z) {
                    simple_edges += 1;
                }
            }
        }
        if simple_edges != set.len() - 1 {
            return None; // connected by construction, so extra edges mean cycles
        }
        // BFS from the root inside the set recovers the tree structure.
        let mut index_of = std::collections::HashMap::new();
        let mut order = vec![root];
        let mut parent: Vec<Option<usize>> = vec![None];
        index_of.insert(root, 0usize);
        let mut head = 0;
        while head < order.len() {
            let y = order[head];
            let yi = head;
            head += 1;
            for &z in &self.adj[y] {
                if in_set(z) && !index_of.contains_key(&z) {
                    index_of.insert(z, order.len());
                    parent.push(Some(yi));
                    order.push(z);
                }
            }
        }
        let tree = RootedTree::from_parents(parent).ok()?;
        Some(canonical_form(&tree))
    }
}

/// Exhaustive terminal-tree oracle for components of at most 12 vertices:
/// full simple-path enumeration (no early exit) for the uniqueness check and
/// isomorphism tested over all root-fixing bijections. Independent of the
/// canonicalization-based fast path it validates.
pub fn brute_force_terminal_trees(
    graph: &MultiGraph,
    v: usize,
    tree: &RootedTree,
) -> Result<u64, StatisticsError> {
    const LIMIT: usize = 12;
    let component = descendants_recursive(graph, v, usize::MAX);
    if component.len() > LIMIT {
        return Err(StatisticsError::ComponentTooLarge {
            size: component.len(),
            limit: LIMIT,
        });
    }
    let m = tree.vertex_count();
    // Adjacency matrix of the pattern tree.
    let mut t_adj = vec![vec![false; m]; m];
    for i in 1..m {
        let p = tree.parent_of(i).expect("non-root vertices have parents");
        t_adj[i][p] = true;
        t_adj[p][i] = true;
    }

    let mut count = 0u64;
    for &x in &component {
        if x == v {
            continue;
        }
        let mut paths: Vec<Vec<usize>> = Vec::new();
        let mut stack = vec![v];
        collect_paths(graph, x, &mut stack, &mut paths);
        if paths.len() != 1 {
            continue;
        }
        let pred = paths[0][paths[0].len() - 2];
        let descendants = descendants_recursive(graph, x, pred);
        if descendants.len() != m {
            continue;
        }
        if descendants
            .iter()
            .any(|&y| y != x && graph.multiplicity(y, pred) > 0)
        {
            continue;
        }
        // Try all bijections descendants -> tree vertices with x -> root.
        let others: Vec<usize> = descendants.iter().copied().filter(|&y| y != x).collect();
        let mut assignment: Vec<usize> = Vec::new();
        if matches_some_bijection(graph, &t_adj, x, &others, &mut assignment, &mut vec![false; m])
        {
            count += 1;
        }
    }
    Ok(count)
}

/// Collects every simple path from the top of `stack` to `x`.
fn collect_paths(
    graph: &MultiGraph,
    x: usize,
    stack: &mut Vec<usize>,
    paths: &mut Vec<Vec<usize>>,
) {
    let current = *stack.last().expect("stack starts non-empty");
    if current == x {
        paths.push(stack.clone());
        return;
    }
    for &(next, _) in graph.neighbors(current) {
        if !stack.contains(&next) {
            stack.push(next);
            collect_paths(graph, x, stack, paths);
            stack.pop();
        }
    }
}

/// Depth-first reachability from `x` with `banned` deleted, sorted.
fn descendants_recursive(graph: &MultiGraph, x: usize, banned: usize) -> Vec<usize> {
    fn go(graph: &MultiGraph, y: usize, banned: usize, seen: &mut Vec<usize>) {
        seen.push(y);
        for &(z, _) in graph.neighbors(y) {
            if z != banned && !seen.contains(&z) {
                go(graph, z, banned, seen);
            }
        }
    }
    let mut seen = Vec::new();
    go(graph, x, banned, &mut seen);
    seen.sort_unstable();
    seen
}

/// Tries to extend a partial map (x -> tree root, `assignment[i]` = image of
/// `others[i]`) to an edge-preserving bijection.
fn matches_some_bijection(
    graph: &MultiGraph,
    t_adj: &[Vec<bool>],
    x: usize,
    others: &[usize],
    assignment: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    let placed = assignment.len();
    if placed == others.len() {
        return true;
    }
    let candidate_vertex = others[placed];
    for image in 1..t_adj.len() {
        if used[image] {
            continue;
        }
        // Check consistency against x and all previously placed vertices.
        let ok_root = (graph.multiplicity(candidate_vertex, x) > 0) == t_adj[image][0];
        let ok_rest = (0..placed).all(|k| {
            (graph.multiplicity(candidate_vertex, others[k]) > 0)
                == t_adj[image][assignment[k]]
        });
        if ok_root && ok_rest {
            used[image] = true;
            assignment.push(image);
            if matches_some_bijection(graph, t_adj, x, others, assignment, used) {
                return true;
            }
            assignment.pop();
            used[image] = false;
        }
    }
    false
}
