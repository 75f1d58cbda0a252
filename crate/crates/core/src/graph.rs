//! Simple bipartite graphs with dense, stable vertex and edge ids, plus the
//! structural queries the construction needs: components, bridges, blocks,
//! Euler tours and removable edge pairs.
//!
//! Side-A vertices use ids `0..n_a`, side-B vertices `n_a..n_a + n_b`.

use std::collections::HashMap;

use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} out of range")]
    VertexOutOfRange(VertexId),
    #[error("edge ({0}, {1}) does not join side A to side B")]
    NotBipartite(VertexId, VertexId),
    #[error("parallel edge ({0}, {1})")]
    ParallelEdge(VertexId, VertexId),
    #[error("component has odd-degree vertex {0}")]
    OddVertex(VertexId),
    #[error("component is not connected")]
    Disconnected,
    #[error("vertex {vertex} has only {found} non-bridge incident edges, need 3")]
    TooFewNonBridges { vertex: VertexId, found: usize },
    #[error("edge subset sized for {expected} edges, host has {found}")]
    SubsetMismatch { expected: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_a: usize,
    n_b: usize,
    edges: Vec<(VertexId, VertexId)>,
    incidence: Vec<Vec<EdgeId>>,
    lookup: HashMap<(VertexId, VertexId), EdgeId>,
}

impl BipartiteGraph {
    /// Builds a graph; each edge is normalized so that its first endpoint is on side A.
    pub fn new<I>(n_a: usize, n_b: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let n = n_a + n_b;
        let mut list = Vec::new();
        let mut incidence = vec![Vec::new(); n];
        let mut lookup = HashMap::new();
        for (u, v) in edges {
            if u >= n {
                return Err(GraphError::VertexOutOfRange(u));
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange(v));
            }
            let (a, b) = if u < n_a { (u, v) } else { (v, u) };
            if a >= n_a || b < n_a {
                return Err(GraphError::NotBipartite(u, v));
            }
            let id = list.len();
            if lookup.insert((a, b), id).is_some() {
                return Err(GraphError::ParallelEdge(u, v));
            }
            list.push((a, b));
            incidence[a].push(id);
            incidence[b].push(id);
        }
        Ok(Self {
            n_a,
            n_b,
            edges: list,
            incidence,
            lookup,
        })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn n(&self) -> usize {
        self.n_a + self.n_b
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e]
    }

    /// The endpoint of `e` that is not `v`.
    pub fn other(&self, e: EdgeId, v: VertexId) -> VertexId {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            debug_assert_eq!(b, v);
            a
        }
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v].len()
    }

    pub fn min_degree(&self) -> usize {
        self.incidence.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.incidence.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_side_a(&self, v: VertexId) -> bool {
        v < self.n_a
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let key = if u < self.n_a { (u, v) } else { (v, u) };
        self.lookup.get(&key).copied()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.n()
    }

    pub fn all_edges(&self) -> EdgeSubset {
        EdgeSubset::full(self.m())
    }
}

/// A set of edge ids of a host graph, stored as a membership bitmap.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeSubset {
    members: Vec<bool>,
    len: usize,
}

impl EdgeSubset {
    pub fn empty(m: usize) -> Self {
        Self {
            members: vec![false; m],
            len: 0,
        }
    }

    pub fn full(m: usize) -> Self {
        Self {
            members: vec![true; m],
            len: m,
        }
    }

    pub fn from_ids<I: IntoIterator<Item = EdgeId>>(m: usize, ids: I) -> Self {
        let mut s = Self::empty(m);
        for e in ids {
            s.insert(e);
        }
        s
    }

    pub fn host_size(&self) -> usize {
        self.members.len()
    }

    pub fn check_host(&self, g: &BipartiteGraph) -> Result<(), GraphError> {
        if self.members.len() != g.m() {
            return Err(GraphError::SubsetMismatch {
                expected: self.members.len(),
                found: g.m(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.members[e]
    }

    /// Returns true when `e` was not already present.
    pub fn insert(&mut self, e: EdgeId) -> bool {
        if self.members[e] {
            return false;
        }
        self.members[e] = true;
        self.len += 1;
        true
    }

    /// Returns true when `e` was present.
    pub fn remove(&mut self, e: EdgeId) -> bool {
        if !self.members[e] {
            return false;
        }
        self.members[e] = false;
        self.len -= 1;
        true
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(e, _)| e)
    }

    pub fn to_vec(&self) -> Vec<EdgeId> {
        self.iter().collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        let members: Vec<bool> = self
            .members
            .iter()
            .zip(&other.members)
            .map(|(a, b)| *a || *b)
            .collect();
        let len = members.iter().filter(|b| **b).count();
        Self { members, len }
    }

    pub fn difference(&self, other: &Self) -> Self {
        let members: Vec<bool> = self
            .members
            .iter()
            .zip(&other.members)
            .map(|(a, b)| *a && !*b)
            .collect();
        let len = members.iter().filter(|b| **b).count();
        Self { members, len }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(a, b)| !(*a && *b))
    }

    pub fn degree(&self, g: &BipartiteGraph, v: VertexId) -> usize {
        g.incident(v).iter().filter(|&&e| self.members[e]).count()
    }

    pub fn incident<'a>(
        &'a self,
        g: &'a BipartiteGraph,
        v: VertexId,
    ) -> impl Iterator<Item = EdgeId> + 'a {
        g.incident(v)
            .iter()
            .copied()
            .filter(move |&e| self.members[e])
    }

    pub fn degrees(&self, g: &BipartiteGraph) -> Vec<usize> {
        let mut d = vec![0; g.n()];
        for e in self.iter() {
            let (a, b) = g.endpoints(e);
            d[a] += 1;
            d[b] += 1;
        }
        d
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

impl Component {
    pub fn edge_subset(&self, m: usize) -> EdgeSubset {
        EdgeSubset::from_ids(m, self.edges.iter().copied())
    }

    pub fn is_eulerian(&self, g: &BipartiteGraph) -> bool {
        let s = self.edge_subset(g.m());
        self.vertices.iter().all(|&v| s.degree(g, v) % 2 == 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub components: Vec<Component>,
    pub isolated: Vec<VertexId>,
}

/// Components of the subgraph spanned by `s`, ordered by smallest vertex id.
pub fn connected_components(g: &BipartiteGraph, s: &EdgeSubset) -> Components {
    let n = g.n();
    let mut comp_of = vec![usize::MAX; n];
    let mut components = Vec::new();
    let mut isolated = Vec::new();
    let mut stack = Vec::new();
    for root in 0..n {
        if comp_of[root] != usize::MAX {
            continue;
        }
        if s.degree(g, root) == 0 {
            isolated.push(root);
            continue;
        }
        let id = components.len();
        comp_of[root] = id;
        let mut vertices = vec![root];
        let mut edges = Vec::new();
        stack.push(root);
        while let Some(v) = stack.pop() {
            for e in s.incident(g, v) {
                let w = g.other(e, v);
                if v < w {
                    edges.push(e);
                }
                if comp_of[w] == usize::MAX {
                    comp_of[w] = id;
                    vertices.push(w);
                    stack.push(w);
                }
            }
        }
        vertices.sort_unstable();
        edges.sort_unstable();
        components.push(Component { vertices, edges });
    }
    Components {
        components,
        isolated,
    }
}

pub fn component_count(g: &BipartiteGraph, s: &EdgeSubset) -> usize {
    connected_components(g, s).components.len()
}

pub fn is_even_subgraph(g: &BipartiteGraph, s: &EdgeSubset) -> bool {
    s.degrees(g).iter().all(|d| d % 2 == 0)
}

/// Biconnected blocks of `s`: `block_of[e]` is the block index of each member edge.
#[derive(Clone, Debug)]
pub struct Blocks {
    pub block_of: Vec<Option<usize>>,
    pub sizes: Vec<usize>,
}

impl Blocks {
    pub fn is_bridge(&self, e: EdgeId) -> bool {
        matches!(self.block_of[e], Some(b) if self.sizes[b] == 1)
    }
}

/// Low-link DFS with an edge stack. A bridge is exactly a single-edge block.
pub fn blocks(g: &BipartiteGraph, s: &EdgeSubset) -> Blocks {
    let n = g.n();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut block_of = vec![None; g.m()];
    let mut sizes = Vec::new();
    let mut edge_stack: Vec<EdgeId> = Vec::new();
    let mut clock = 0;
    // (vertex, edge used to reach it, next incidence index)
    let mut frames: Vec<(VertexId, Option<EdgeId>, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX || s.degree(g, root) == 0 {
            continue;
        }
        disc[root] = clock;
        low[root] = clock;
        clock += 1;
        frames.push((root, None, 0));
        while let Some(frame) = frames.last_mut() {
            let (v, parent_edge, idx) = *frame;
            if idx < g.incident(v).len() {
                frame.2 += 1;
                let e = g.incident(v)[idx];
                if !s.contains(e) || Some(e) == parent_edge {
                    continue;
                }
                let w = g.other(e, v);
                if disc[w] == usize::MAX {
                    edge_stack.push(e);
                    disc[w] = clock;
                    low[w] = clock;
                    clock += 1;
                    frames.push((w, Some(e), 0));
                } else if disc[w] < disc[v] {
                    edge_stack.push(e);
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                frames.pop();
                if let (Some(&(u, _, _)), Some(pe)) = (frames.last(), parent_edge) {
                    low[u] = low[u].min(low[v]);
                    if low[v] >= disc[u] {
                        let id = sizes.len();
                        let mut size = 0;
                        while let Some(f) = edge_stack.pop() {
                            block_of[f] = Some(id);
                            size += 1;
                            if f == pe {
                                break;
                            }
                        }
                        sizes.push(size);
                    }
                }
            }
        }
    }
    Blocks { block_of, sizes }
}

/// Edges of `s` whose removal increases the number of components.
pub fn bridges(g: &BipartiteGraph, s: &EdgeSubset) -> Vec<EdgeId> {
    let b = blocks(g, s);
    s.iter().filter(|&e| b.is_bridge(e)).collect()
}

/// A walk given by its vertex sequence and the edges between consecutive vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.first() == self.vertices.last()
    }

    pub fn reversed(&self) -> Walk {
        let mut vertices = self.vertices.clone();
        let mut edges = self.edges.clone();
        vertices.reverse();
        edges.reverse();
        Walk { vertices, edges }
    }
}

/// Iterative Hierholzer over the edges in `s`, starting at `start`.
/// Consumes edges in incidence order, so the result is deterministic.
pub(crate) fn hierholzer(g: &BipartiteGraph, s: &EdgeSubset, start: VertexId) -> Walk {
    let mut used = vec![false; g.m()];
    let mut ptr = vec![0usize; g.n()];
    let mut stack: Vec<(VertexId, Option<EdgeId>)> = vec![(start, None)];
    let mut popped_v = Vec::new();
    let mut popped_e = Vec::new();
    while let Some(&(v, via)) = stack.last() {
        let inc = g.incident(v);
        while ptr[v] < inc.len() && (!s.contains(inc[ptr[v]]) || used[inc[ptr[v]]]) {
            ptr[v] += 1;
        }
        if ptr[v] < inc.len() {
            let e = inc[ptr[v]];
            used[e] = true;
            stack.push((g.other(e, v), Some(e)));
        } else {
            stack.pop();
            popped_v.push(v);
            if let Some(e) = via {
                popped_e.push(e);
            }
        }
    }
    popped_v.reverse();
    popped_e.reverse();
    Walk {
        vertices: popped_v,
        edges: popped_e,
    }
}

/// A closed trail through every edge of a connected even component.
pub fn euler_tour(g: &BipartiteGraph, c: &Component) -> Result<Walk, GraphError> {
    let s = c.edge_subset(g.m());
    for &v in &c.vertices {
        if s.degree(g, v) % 2 == 1 {
            return Err(GraphError::OddVertex(v));
        }
    }
    let Some(&start) = c.vertices.first() else {
        return Ok(Walk {
            vertices: Vec::new(),
            edges: Vec::new(),
        });
    };
    let tour = hierholzer(g, &s, start);
    if tour.edges.len() != c.edges.len() {
        return Err(GraphError::Disconnected);
    }
    Ok(tour)
}

/// Two edges at `v` whose joint removal leaves `c` connected.
///
/// Among the non-bridge edges at `v`, take two from one block when all of them
/// share a block, otherwise one edge from each of two distinct blocks.
pub fn two_removable_edges(
    g: &BipartiteGraph,
    c: &Component,
    v: VertexId,
) -> Result<(EdgeId, EdgeId), GraphError> {
    let s = c.edge_subset(g.m());
    let b = blocks(g, &s);
    let candidates: Vec<EdgeId> = s.incident(g, v).filter(|&e| !b.is_bridge(e)).collect();
    if candidates.len() < 3 {
        return Err(GraphError::TooFewNonBridges {
            vertex: v,
            found: candidates.len(),
        });
    }
    let first = candidates[0];
    let first_block = b.block_of[first];
    let pair = match candidates.iter().find(|&&e| b.block_of[e] != first_block) {
        Some(&other) => (first, other),
        None => (first, candidates[1]),
    };
    Ok(pair)
}
