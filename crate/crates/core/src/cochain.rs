//! Integer 1-cochains on finite graphs: cycle sums, closure certification
//! over a fundamental-cycle basis, and potential construction by path
//! integration along a breadth-first spanning tree.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simple undirected graph on dense vertex ids `0..n`.
///
/// Edges are stored once as `(min, max)` and numbered in lexicographic
/// order; that numbering is the edge id used by [`DirectedEdgeCochain`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    pub fn new<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut canonical: Vec<(usize, usize)> = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::UnknownVertex(u.max(v)));
            }
            canonical.push((u.min(v), u.max(v)));
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge {{{}, {}}}",
                w[0].0, w[0].1
            )));
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (id, &(u, v)) in canonical.iter().enumerate() {
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            n: vertex_count,
            edges: canonical,
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical `(min, max)` endpoints, indexed by edge id.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbours of `v` in ascending id order, paired with the edge id.
    pub fn neighbours(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Edge id of `{u, v}` and the orientation sign of `u -> v` relative
    /// to the stored `(min, max)` orientation.
    pub fn directed_edge(&self, u: usize, v: usize) -> Option<(usize, i64)> {
        if u >= self.n || v >= self.n {
            return None;
        }
        let list = &self.adjacency[u];
        let pos = list.binary_search_by_key(&v, |&(w, _)| w).ok()?;
        let id = list[pos].1;
        Some((id, if u < v { 1 } else { -1 }))
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    fn require_connected(&self) -> Result<()> {
        match self.component_count() {
            0 | 1 => Ok(()),
            components => Err(Error::Disconnected { components }),
        }
    }
}

/// Antisymmetric integer function on directed edges.
///
/// One value per edge id, read in the stored `(min -> max)` orientation;
/// the reverse orientation is the negation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedEdgeCochain {
    values: Vec<i64>,
}

impl DirectedEdgeCochain {
    pub fn zero(graph: &Graph) -> Self {
        DirectedEdgeCochain {
            values: vec![0; graph.edge_count()],
        }
    }

    /// Builds a cochain from `f(u, v)` evaluated on each canonical `(u < v)` edge.
    pub fn from_fn<F>(graph: &Graph, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> i64,
    {
        DirectedEdgeCochain {
            values: graph.edges().iter().map(|&(u, v)| f(u, v)).collect(),
        }
    }

    pub fn from_canonical_values(graph: &Graph, values: Vec<i64>) -> Result<Self> {
        if values.len() != graph.edge_count() {
            return Err(Error::InvalidGraph(format!(
                "cochain has {} values for {} edges",
                values.len(),
                graph.edge_count()
            )));
        }
        Ok(DirectedEdgeCochain { values })
    }

    /// Sets the value of `u -> v`; the reverse is implied.
    pub fn set(&mut self, graph: &Graph, u: usize, v: usize, value: i64) -> Result<()> {
        let (id, sign) = graph
            .directed_edge(u, v)
            .ok_or(Error::MalformedWalk { index: 0, from: u, to: v })?;
        self.values[id] = sign * value;
        Ok(())
    }

    pub fn value(&self, graph: &Graph, u: usize, v: usize) -> Option<i64> {
        graph
            .directed_edge(u, v)
            .map(|(id, sign)| sign * self.values[id])
    }

    pub fn canonical_values(&self) -> &[i64] {
        &self.values
    }

    pub fn canonical_value(&self, edge_id: usize) -> i64 {
        self.values[edge_id]
    }

    pub fn set_canonical(&mut self, edge_id: usize, value: i64) {
        self.values[edge_id] = value;
    }
}

/// Closed walk whose cochain sum is nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureWitness {
    /// Vertex sequence with `walk.first() == walk.last()`.
    pub walk: Vec<usize>,
    pub sum: i64,
}

impl ClosureWitness {
    /// True when the walk uses the undirected edge `{u, v}`.
    pub fn contains_edge(&self, u: usize, v: usize) -> bool {
        self.walk
            .windows(2)
            .any(|w| (w[0] == u && w[1] == v) || (w[0] == v && w[1] == u))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialMap {
    pub root: usize,
    pub heights: Vec<i64>,
}

impl PotentialMap {
    pub fn height(&self, v: usize) -> i64 {
        self.heights[v]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Closure {
    Pass,
    Fail(ClosureWitness),
}

impl Closure {
    pub fn is_pass(&self) -> bool {
        matches!(self, Closure::Pass)
    }

    pub fn witness(&self) -> Option<&ClosureWitness> {
        match self {
            Closure::Pass => None,
            Closure::Fail(w) => Some(w),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Potential {
    Map(PotentialMap),
    Witness(ClosureWitness),
}

impl Potential {
    pub fn map(self) -> Option<PotentialMap> {
        match self {
            Potential::Map(m) => Some(m),
            Potential::Witness(_) => None,
        }
    }

    pub fn witness(&self) -> Option<&ClosureWitness> {
        match self {
            Potential::Map(_) => None,
            Potential::Witness(w) => Some(w),
        }
    }
}

/// Signed sum of the cochain along a walk of consecutive adjacent vertices.
pub fn cycle_sum(graph: &Graph, cochain: &DirectedEdgeCochain, walk: &[usize]) -> Result<i64> {
    let mut total: i64 = 0;
    for (index, step) in walk.windows(2).enumerate() {
        let (from, to) = (step[0], step[1]);
        let value = cochain
            .value(graph, from, to)
            .ok_or(Error::MalformedWalk { index, from, to })?;
        total = total.checked_add(value).ok_or(Error::Overflow)?;
    }
    Ok(total)
}

/// Oriented boundary sum of a face given as a cyclic vertex list
/// (the closing step back to the first vertex is implied).
pub fn face_sum(graph: &Graph, cochain: &DirectedEdgeCochain, boundary: &[usize]) -> Result<i64> {
    if boundary.is_empty() {
        return Ok(0);
    }
    let mut walk = boundary.to_vec();
    if walk.len() > 1 && walk.first() == walk.last() {
        walk.pop();
    }
    walk.push(walk[0]);
    cycle_sum(graph, cochain, &walk)
}

struct SpanningTree {
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    heights: Vec<i64>,
    tree_edge: Vec<bool>,
}

// BFS from `root`, visiting neighbours in ascending id order.
fn integrate(graph: &Graph, cochain: &DirectedEdgeCochain, root: usize) -> Result<SpanningTree> {
    let n = graph.vertex_count();
    let mut parent = vec![None; n];
    let mut depth = vec![0; n];
    let mut heights = vec![0i64; n];
    let mut seen = vec![false; n];
    let mut tree_edge = vec![false; graph.edge_count()];
    let mut queue = VecDeque::new();
    seen[root] = true;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        for &(w, id) in graph.neighbours(u) {
            if seen[w] {
                continue;
            }
            seen[w] = true;
            tree_edge[id] = true;
            parent[w] = Some(u);
            depth[w] = depth[u] + 1;
            let step = cochain.value(graph, u, w).expect("adjacent");
            heights[w] = heights[u].checked_add(step).ok_or(Error::Overflow)?;
            queue.push_back(w);
        }
    }
    Ok(SpanningTree {
        parent,
        depth,
        heights,
        tree_edge,
    })
}

fn fundamental_cycle(tree: &SpanningTree, u: usize, v: usize) -> Vec<usize> {
    let mut up_u = vec![u];
    let mut up_v = vec![v];
    let (mut a, mut b) = (u, v);
    while tree.depth[a] > tree.depth[b] {
        a = tree.parent[a].expect("non-root");
        up_u.push(a);
    }
    while tree.depth[b] > tree.depth[a] {
        b = tree.parent[b].expect("non-root");
        up_v.push(b);
    }
    while a != b {
        a = tree.parent[a].expect("non-root");
        b = tree.parent[b].expect("non-root");
        up_u.push(a);
        up_v.push(b);
    }
    // u -> v -> ... -> lca -> ... -> u
    let mut walk = Vec::with_capacity(up_u.len() + up_v.len() + 1);
    walk.push(u);
    walk.extend_from_slice(&up_v);
    walk.extend(up_u.iter().rev().skip(1));
    walk
}

fn first_failure(
    graph: &Graph,
    cochain: &DirectedEdgeCochain,
    tree: &SpanningTree,
) -> Result<Option<ClosureWitness>> {
    for (id, &(u, v)) in graph.edges().iter().enumerate() {
        if tree.tree_edge[id] {
            continue;
        }
        let expected = tree.heights[v]
            .checked_sub(tree.heights[u])
            .ok_or(Error::Overflow)?;
        if cochain.canonical_value(id) != expected {
            let walk = fundamental_cycle(tree, u, v);
            let sum = cycle_sum(graph, cochain, &walk)?;
            debug_assert_ne!(sum, 0);
            return Ok(Some(ClosureWitness { walk, sum }));
        }
    }
    Ok(None)
}

/// Certifies closure on all closed walks by checking every non-tree edge
/// of the BFS tree rooted at vertex 0.
pub fn check_cycle_closure(graph: &Graph, cochain: &DirectedEdgeCochain) -> Result<Closure> {
    graph.require_connected()?;
    if graph.vertex_count() == 0 {
        return Ok(Closure::Pass);
    }
    let tree = integrate(graph, cochain, 0)?;
    Ok(match first_failure(graph, cochain, &tree)? {
        None => Closure::Pass,
        Some(w) => Closure::Fail(w),
    })
}

/// Path-integrates the cochain from `root`; returns integer heights with
/// `h(root) = 0`, or the first failing fundamental cycle.
pub fn build_potential(
    graph: &Graph,
    cochain: &DirectedEdgeCochain,
    root: usize,
) -> Result<Potential> {
    if root >= graph.vertex_count() {
        return Err(Error::UnknownVertex(root));
    }
    graph.require_connected()?;
    let tree = integrate(graph, cochain, root)?;
    if let Some(w) = first_failure(graph, cochain, &tree)? {
        return Ok(Potential::Witness(w));
    }
    Ok(Potential::Map(PotentialMap {
        root,
        heights: tree.heights,
    }))
}
