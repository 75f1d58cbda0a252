//! Vertex partition and edge decomposition that the labeling steps run on.
//!
//! The graph is split into a cover `X` and an independent set `Y` with a
//! matching `M` saturating `X`. The remaining X-Y edges are divided into
//! `E1`, `E2` and `G1`, and the edges inside `X` into `E3` (an even graph
//! `G3` plus two star forests `F2`, `F3`) and the rest. Finally `E4 ⊆ G1` is
//! chosen so that `G4 = E4 ∪ F3` can take a residue plan.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{
    blocks, connected_components, two_removable_edges, BipartiteGraph, Component, EdgeId,
    EdgeSubset, VertexId,
};
use crate::trails::Bipartition;

pub const MIN_DEGREE: usize = 15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("minimum degree {0} < {MIN_DEGREE}")]
    MinDegree(usize),
    #[error("no alternating trail frees isolated vertex {0}")]
    Switching(VertexId),
    #[error("vertex {0} has no edge available for {1}")]
    Supply(VertexId, &'static str),
    #[error("E4 needs {need} edges but already holds {have}")]
    E4Overfull { need: usize, have: usize },
    #[error("E4 repair stuck with {eulerian} Eulerian components and {mixed} mixed components")]
    RepairStuck { eulerian: usize, mixed: usize },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Number of labels in `[1, n]` congruent to `mu` mod 3.
pub fn residue_count(n: usize, mu: usize) -> usize {
    match mu {
        0 => n / 3,
        1 => n.div_ceil(3),
        _ => (n + 1) / 3,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub n_x: usize,
    pub n_y: usize,
    pub n_y_odd: usize,
    pub n_y_even: usize,
    pub m: usize,
    pub m1: usize,
    pub m2: usize,
    pub m11: usize,
    pub m10: usize,
    pub m21: usize,
    pub m20: usize,
    pub k1: usize,
    pub k2: usize,
    pub k3: usize,
    pub s1: usize,
    pub s2: usize,
    pub eps1: usize,
    pub gamma: i64,
    /// Residue counts over `[m]`.
    pub l: [usize; 3],
    /// Residue counts over `[n_Y + n_Y_even + m1]`.
    pub l_1: [usize; 3],
    /// `l - l_1`.
    pub l_2: [usize; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionPlan {
    pub x: Vec<VertexId>,
    pub y: Vec<VertexId>,
    pub z: Vec<VertexId>,
    pub i1: Vec<VertexId>,
    pub i2: Vec<VertexId>,
    pub i21: Vec<VertexId>,
    pub y_odd: Vec<VertexId>,
    pub y_even: Vec<VertexId>,
    pub matching: Vec<EdgeId>,
    pub e1: Vec<EdgeId>,
    pub e2: Vec<EdgeId>,
    pub g1: Vec<EdgeId>,
    pub gx: Vec<EdgeId>,
    pub e3: Vec<EdgeId>,
    pub e4: Vec<EdgeId>,
    pub f1: Vec<EdgeId>,
    pub f2: Vec<EdgeId>,
    pub f3: Vec<EdgeId>,
    pub g3: Vec<EdgeId>,
    pub counts: Counts,
    pub seed: u64,
    pub switches: usize,
    pub repairs: usize,
    #[serde(skip)]
    is_x: Vec<bool>,
    #[serde(skip)]
    mate: Vec<Option<EdgeId>>,
}

impl DecompositionPlan {
    pub fn is_x(&self, v: VertexId) -> bool {
        self.is_x[v]
    }

    /// The matching edge at `v`, if any.
    pub fn mate_edge(&self, v: VertexId) -> Option<EdgeId> {
        self.mate[v]
    }

    pub fn g4_edges(&self, m: usize) -> EdgeSubset {
        EdgeSubset::from_ids(m, self.e4.iter().chain(&self.f3).copied())
    }

    /// Sides of `G4`: `X \ I2` against `Y ∪ I21`.
    pub fn g4_sides(&self, g: &BipartiteGraph) -> Bipartition {
        let mut in_i2 = vec![false; g.n()];
        for &v in &self.i2 {
            in_i2[v] = true;
        }
        Bipartition::new(g.vertices().map(|v| self.is_x[v] && !in_i2[v]).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    /// Checks every structural property and count relation of the plan.
    pub fn violations(&self, g: &BipartiteGraph) -> Vec<Violation> {
        check_plan(self, g)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
    /// Soft rules are bounds stated for the construction that the labeling
    /// does not depend on; they are reported but do not stop the pipeline.
    pub hard: bool,
}

fn shuffle<T>(rng: &mut Option<ChaCha8Rng>, v: &mut [T]) {
    if let Some(rng) = rng {
        v.shuffle(rng);
    }
}

fn rng_for(seed: u64, stream: u64) -> Option<ChaCha8Rng> {
    (seed != 0).then(|| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(stream);
        r
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KonigPartition {
    pub is_x: Vec<bool>,
    pub mate: Vec<Option<EdgeId>>,
    pub matching: Vec<EdgeId>,
}

/// Maximum matching by augmenting paths from side A, then the minimum cover
/// from alternating reachability of unmatched side-A vertices.
pub fn konig_partition(g: &BipartiteGraph) -> KonigPartition {
    let n = g.n();
    let mut mate: Vec<Option<EdgeId>> = vec![None; n];
    for a in 0..g.n_a() {
        let mut seen = vec![false; n];
        augment(g, a, &mut mate, &mut seen);
    }
    // Alternating reachability: A -> B along non-matching edges, B -> A along matching edges.
    let mut reach = vec![false; n];
    let mut queue: VecDeque<VertexId> = (0..g.n_a()).filter(|&a| mate[a].is_none()).collect();
    for &a in &queue {
        reach[a] = true;
    }
    while let Some(a) = queue.pop_front() {
        for &e in g.incident(a) {
            if Some(e) == mate[a] {
                continue;
            }
            let b = g.other(e, a);
            if reach[b] {
                continue;
            }
            reach[b] = true;
            if let Some(f) = mate[b] {
                let a2 = g.other(f, b);
                if !reach[a2] {
                    reach[a2] = true;
                    queue.push_back(a2);
                }
            }
        }
    }
    let is_x: Vec<bool> = g
        .vertices()
        .map(|v| if g.is_side_a(v) { !reach[v] } else { reach[v] })
        .collect();
    let mut matching: Vec<EdgeId> = (0..g.n_a()).filter_map(|a| mate[a]).collect();
    matching.sort_unstable();
    KonigPartition {
        is_x,
        mate,
        matching,
    }
}

fn augment(
    g: &BipartiteGraph,
    a: VertexId,
    mate: &mut [Option<EdgeId>],
    seen: &mut [bool],
) -> bool {
    // Iterative DFS: stack of (A-vertex, next incidence index, edge used to reach it).
    let mut stack: Vec<(VertexId, usize)> = vec![(a, 0)];
    let mut via: Vec<EdgeId> = Vec::new();
    while let Some(&mut (u, ref mut i)) = stack.last_mut() {
        let inc = g.incident(u);
        if *i >= inc.len() {
            stack.pop();
            via.pop();
            continue;
        }
        let e = inc[*i];
        *i += 1;
        let b = g.other(e, u);
        if seen[b] {
            continue;
        }
        seen[b] = true;
        match mate[b] {
            None => {
                via.push(e);
                // Flip the path: every via edge becomes matched.
                for &f in &via {
                    let (x, y) = g.endpoints(f);
                    mate[x] = Some(f);
                    mate[y] = Some(f);
                }
                return true;
            }
            Some(f) => {
                via.push(e);
                stack.push((g.other(f, b), 0));
            }
        }
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    E1,
    E2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct E12 {
    pub e1: Vec<EdgeId>,
    pub e2: Vec<EdgeId>,
    /// Number of alternating-trail switches applied.
    pub switches: usize,
}

/// Picks one non-matching edge at each unsaturated Y vertex (`E1`) and at each
/// even-degree Y vertex (`E2`), then switches along alternating trails until
/// no vertex isolated in `G[X]` is also isolated in `G0`.
pub fn choose_e1_e2(
    g: &BipartiteGraph,
    part: &KonigPartition,
    seed: u64,
) -> Result<E12, DecomposeError> {
    let is_x = &part.is_x;
    let mut role: Vec<Option<Role>> = vec![None; g.m()];
    let in_m = EdgeSubset::from_ids(g.m(), part.matching.iter().copied());
    let xy = |e: EdgeId| {
        let (a, b) = g.endpoints(e);
        is_x[a] != is_x[b]
    };
    let mut g0_deg = vec![0usize; g.n()];
    for e in (0..g.m()).filter(|&e| xy(e) && !in_m.contains(e)) {
        let (a, b) = g.endpoints(e);
        g0_deg[a] += 1;
        g0_deg[b] += 1;
    }

    let mut targets: Vec<(VertexId, Role)> = Vec::new();
    for y in g.vertices().filter(|&v| !is_x[v]) {
        if part.mate[y].is_none() {
            targets.push((y, Role::E1));
        }
        if g.degree(y) % 2 == 0 {
            targets.push((y, Role::E2));
        }
    }
    let mut rng = rng_for(seed, 1);
    shuffle(&mut rng, &mut targets);
    for &(y, r) in &targets {
        let mut cands: Vec<EdgeId> = g
            .incident(y)
            .iter()
            .copied()
            .filter(|&e| !in_m.contains(e) && role[e].is_none())
            .collect();
        shuffle(&mut rng, &mut cands);
        let mut best: Option<(usize, EdgeId)> = None;
        for e in cands {
            let d = g0_deg[g.other(e, y)];
            if best.is_none_or(|(bd, _)| d > bd) {
                best = Some((d, e));
            }
        }
        let (_, e) = best.ok_or(DecomposeError::Supply(y, "E1/E2"))?;
        role[e] = Some(r);
        g0_deg[y] -= 1;
        g0_deg[g.other(e, y)] -= 1;
    }

    let has_inner = |v: VertexId| g.incident(v).iter().any(|&e| is_x[g.other(e, v)]);
    let in_i1: Vec<bool> = g.vertices().map(|v| is_x[v] && !has_inner(v)).collect();
    let mut switches = 0;
    let mut prev_i0 = usize::MAX;
    loop {
        let i0: Vec<VertexId> = g
            .vertices()
            .filter(|&v| in_i1[v] && g0_deg[v] == 0)
            .collect();
        assert!(i0.len() < prev_i0, "switching must shrink the isolated set");
        prev_i0 = i0.len();
        let Some(&x1) = i0.first() else { break };
        let path = alternating_path(g, is_x, &in_m, &role, &g0_deg, &in_i1, x1)
            .ok_or(DecomposeError::Switching(x1))?;
        for (old, new) in path {
            let r = role[old].take();
            role[new] = r;
            for v in [g.endpoints(old).0, g.endpoints(old).1] {
                g0_deg[v] += 1;
            }
            for v in [g.endpoints(new).0, g.endpoints(new).1] {
                g0_deg[v] -= 1;
            }
        }
        switches += 1;
    }
    let pick = |want: Role| {
        (0..g.m())
            .filter(|&e| role[e] == Some(want))
            .collect::<Vec<_>>()
    };
    Ok(E12 {
        e1: pick(Role::E1),
        e2: pick(Role::E2),
        switches,
    })
}

/// Shortest trail `x1 y1 x2 y2 ... x_k` alternating between chosen edges
/// (`x_i y_i`) and `G0` edges (`y_i x_{i+1}`) that ends at a vertex able to
/// give up a `G0` edge. Returns the (chosen, replacement) edge pairs.
fn alternating_path(
    g: &BipartiteGraph,
    is_x: &[bool],
    in_m: &EdgeSubset,
    role: &[Option<Role>],
    g0_deg: &[usize],
    in_i1: &[bool],
    x1: VertexId,
) -> Option<Vec<(EdgeId, EdgeId)>> {
    let in_g0 = |e: EdgeId| {
        let (a, b) = g.endpoints(e);
        is_x[a] != is_x[b] && !in_m.contains(e) && role[e].is_none()
    };
    let mut seen_x = vec![false; g.n()];
    let mut seen_y = vec![false; g.n()];
    // parent[x'] = (previous x, chosen edge, g0 edge)
    let mut parent: Vec<Option<(VertexId, EdgeId, EdgeId)>> = vec![None; g.n()];
    let mut queue = VecDeque::from([x1]);
    seen_x[x1] = true;
    while let Some(x) = queue.pop_front() {
        for &e in g.incident(x) {
            if role[e].is_none() {
                continue;
            }
            let y = g.other(e, x);
            if seen_y[y] {
                continue;
            }
            seen_y[y] = true;
            for &f in g.incident(y) {
                if !in_g0(f) {
                    continue;
                }
                let x2 = g.other(f, y);
                if seen_x[x2] {
                    continue;
                }
                seen_x[x2] = true;
                parent[x2] = Some((x, e, f));
                if !in_i1[x2] || g0_deg[x2] >= 2 {
                    let mut out = Vec::new();
                    let mut cur = x2;
                    while let Some((px, pe, pf)) = parent[cur] {
                        out.push((pe, pf));
                        cur = px;
                    }
                    out.reverse();
                    return Some(out);
                }
                queue.push_back(x2);
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forests {
    pub i2: Vec<VertexId>,
    pub i21: Vec<VertexId>,
    pub f1: Vec<EdgeId>,
    pub f2: Vec<EdgeId>,
    pub f3: Vec<EdgeId>,
    pub s1: usize,
    pub s2: usize,
}

/// `F1` takes one `G1` edge at every X vertex not isolated in `G1`; `F2` is a
/// spanning forest of `G[I2 \ I21]` pruned to stars; `F3` joins every vertex
/// of `I21` to a neighbor in `X \ I2`.
pub fn build_forests(
    g: &BipartiteGraph,
    is_x: &[bool],
    g1: &EdgeSubset,
    seed: u64,
) -> Result<Forests, DecomposeError> {
    let mut rng = rng_for(seed, 2);
    let xs: Vec<VertexId> = g.vertices().filter(|&v| is_x[v]).collect();
    let mut in_i2 = vec![false; g.n()];
    for &x in &xs {
        in_i2[x] = g1.degree(g, x) == 0;
    }
    let inner = |v: VertexId| {
        g.incident(v)
            .iter()
            .copied()
            .filter(move |&e| is_x[g.other(e, v)])
    };
    let mut in_i21 = vec![false; g.n()];
    for &x in xs.iter().filter(|&&x| in_i2[x]) {
        in_i21[x] = inner(x).all(|e| !in_i2[g.other(e, x)]);
    }

    let mut f1 = Vec::new();
    for &x in xs.iter().filter(|&&x| !in_i2[x]) {
        let mut c: Vec<EdgeId> = g1.incident(g, x).collect();
        shuffle(&mut rng, &mut c);
        f1.push(c[0]);
    }

    // Spanning forest of G[I2 \ I21] by BFS, then drop edges between two non-leaves.
    let core = |v: VertexId| in_i2[v] && !in_i21[v];
    let mut seen = vec![false; g.n()];
    let mut forest = Vec::new();
    for &r in xs.iter().filter(|&&x| core(x)) {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let mut queue = VecDeque::from([r]);
        while let Some(v) = queue.pop_front() {
            for e in inner(v) {
                let w = g.other(e, v);
                if core(w) && !seen[w] {
                    seen[w] = true;
                    forest.push(e);
                    queue.push_back(w);
                }
            }
        }
    }
    let mut deg = vec![0usize; g.n()];
    for &e in &forest {
        let (a, b) = g.endpoints(e);
        deg[a] += 1;
        deg[b] += 1;
    }
    let mut f2 = Vec::new();
    for &e in &forest {
        let (a, b) = g.endpoints(e);
        if deg[a] >= 2 && deg[b] >= 2 {
            deg[a] -= 1;
            deg[b] -= 1;
        } else {
            f2.push(e);
        }
    }
    f2.sort_unstable();
    let f2_set = EdgeSubset::from_ids(g.m(), f2.iter().copied());
    let mut s1 = 0;
    let mut s2 = 0;
    for c in connected_components(g, &f2_set).components {
        if c.edges.len() % 2 == 1 {
            s1 += 1;
        } else {
            s2 += 1;
        }
    }

    let mut f3 = Vec::new();
    for &x in xs.iter().filter(|&&x| in_i21[x]) {
        let mut c: Vec<EdgeId> = inner(x).filter(|&e| !in_i2[g.other(e, x)]).collect();
        shuffle(&mut rng, &mut c);
        f3.push(*c.first().ok_or(DecomposeError::Supply(x, "F3"))?);
    }
    f3.sort_unstable();
    f1.sort_unstable();
    Ok(Forests {
        i2: xs.iter().copied().filter(|&x| in_i2[x]).collect(),
        i21: xs.iter().copied().filter(|&x| in_i21[x]).collect(),
        f1,
        f2,
        f3,
        s1,
        s2,
    })
}

/// A shortest cycle in the subgraph `s`, as edge ids.
pub fn shortest_cycle(g: &BipartiteGraph, s: &EdgeSubset) -> Option<Vec<EdgeId>> {
    let mut best: Option<(usize, VertexId, EdgeId)> = None;
    let n = g.n();
    let mut dist = vec![usize::MAX; n];
    let mut par: Vec<Option<EdgeId>> = vec![None; n];
    for r in g.vertices().filter(|&v| s.degree(g, v) >= 2) {
        let len = bfs_tree(g, s, r, &mut dist, &mut par, best.map(|b| b.0));
        if let Some((l, e)) = len {
            if best.is_none_or(|b| l < b.0) {
                best = Some((l, r, e));
            }
        }
    }
    let (_, r, e) = best?;
    bfs_tree(g, s, r, &mut dist, &mut par, None);
    let (u, v) = g.endpoints(e);
    let climb = |mut w: VertexId| {
        let mut path = Vec::new();
        while let Some(f) = par[w] {
            path.push(f);
            w = g.other(f, w);
        }
        path
    };
    let mut pu = climb(u);
    let mut pv = climb(v);
    while let (Some(a), Some(b)) = (pu.last(), pv.last()) {
        if a != b {
            break;
        }
        pu.pop();
        pv.pop();
    }
    pu.reverse();
    let mut cycle = pu;
    cycle.push(e);
    cycle.extend(pv);
    Some(cycle)
}

/// BFS from `r`; returns the shortest closed walk through a non-tree edge
/// seen, stopping early once it cannot beat `bound`.
fn bfs_tree(
    g: &BipartiteGraph,
    s: &EdgeSubset,
    r: VertexId,
    dist: &mut [usize],
    par: &mut [Option<EdgeId>],
    bound: Option<usize>,
) -> Option<(usize, EdgeId)> {
    dist.fill(usize::MAX);
    par.fill(None);
    dist[r] = 0;
    let mut queue = VecDeque::from([r]);
    let mut best: Option<(usize, EdgeId)> = None;
    while let Some(v) = queue.pop_front() {
        if let Some(b) = best.map(|b| b.0).or(bound) {
            if 2 * dist[v] + 1 >= b {
                break;
            }
        }
        for e in s.incident(g, v) {
            if par[v] == Some(e) {
                continue;
            }
            let w = g.other(e, v);
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                par[w] = Some(e);
                queue.push_back(w);
            } else {
                let l = dist[v] + dist[w] + 1;
                if best.is_none_or(|b| l < b.0) {
                    best = Some((l, e));
                }
            }
        }
    }
    best
}

/// Greedy even subgraph of `host`: repeatedly adds a shortest cycle while it
/// fits in the remaining budget.
pub fn build_g3(g: &BipartiteGraph, host: &EdgeSubset, budget: usize) -> Vec<EdgeId> {
    let mut rest = host.clone();
    let mut left = budget;
    let mut g3 = Vec::new();
    while let Some(c) = shortest_cycle(g, &rest) {
        if c.len() > left {
            break;
        }
        left -= c.len();
        for &e in &c {
            rest.remove(e);
        }
        g3.extend(c);
    }
    g3.sort_unstable();
    g3
}

/// Component classes of `G4` that the repair loop drives toward zero
/// Eulerian components and at least one mixed component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct G4Status {
    pub eulerian: usize,
    /// Components holding an odd Y-side vertex.
    pub targeted: usize,
    /// Targeted components that also hold an odd X-side vertex.
    pub mixed: usize,
}

impl G4Status {
    pub fn ok(&self) -> bool {
        self.eulerian == 0 && (self.targeted == 0 || self.mixed > 0)
    }

    fn key(&self) -> (usize, std::cmp::Reverse<usize>) {
        (self.eulerian, std::cmp::Reverse(self.mixed))
    }
}

pub fn g4_status(g: &BipartiteGraph, g4: &EdgeSubset, sides: &Bipartition) -> G4Status {
    g4_components(g, g4, sides).0
}

fn g4_components(
    g: &BipartiteGraph,
    g4: &EdgeSubset,
    sides: &Bipartition,
) -> (G4Status, Vec<Component>, Vec<usize>) {
    let deg = g4.degrees(g);
    let comps = connected_components(g, g4).components;
    let mut st = G4Status {
        eulerian: 0,
        targeted: 0,
        mixed: 0,
    };
    // 0 = Eulerian, 1 = targeted without odd X vertex, 2 = mixed, 3 = other
    let mut class = Vec::with_capacity(comps.len());
    for c in &comps {
        let odd_y = c
            .vertices
            .iter()
            .any(|&v| !sides.is_x(v) && deg[v] % 2 == 1);
        let odd_x = c.vertices.iter().any(|&v| sides.is_x(v) && deg[v] % 2 == 1);
        let k = if !odd_x && !odd_y {
            st.eulerian += 1;
            0
        } else if odd_y {
            st.targeted += 1;
            if odd_x {
                st.mixed += 1;
                2
            } else {
                1
            }
        } else {
            3
        };
        class.push(k);
    }
    (st, comps, class)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct E4Build {
    pub e4: Vec<EdgeId>,
    pub f1: Vec<EdgeId>,
    pub repairs: usize,
}

/// Grows `E4` from `F1` to `m11` edges keeping every Y degree at least 8 and
/// even except at one vertex, then exchanges edges until `G4 = E4 ∪ F3` has
/// no Eulerian component and, when odd Y-side vertices exist, a component
/// with odd vertices on both sides.
#[allow(clippy::too_many_arguments)]
pub fn build_e4(
    g: &BipartiteGraph,
    ys: &[VertexId],
    g1: &EdgeSubset,
    f1: &[EdgeId],
    f3: &[EdgeId],
    sides: &Bipartition,
    m11: usize,
    seed: u64,
) -> Result<E4Build, DecomposeError> {
    let mut rng = rng_for(seed, 3);
    let mut e4 = EdgeSubset::from_ids(g.m(), f1.iter().copied());
    let free_at = |e4: &EdgeSubset, y: VertexId| -> Vec<EdgeId> {
        g1.incident(g, y).filter(|&e| !e4.contains(e)).collect()
    };
    let mut take = |e4: &mut EdgeSubset,
                    y: VertexId,
                    k: usize,
                    what: &'static str|
     -> Result<(), DecomposeError> {
        let mut c = free_at(e4, y);
        shuffle(&mut rng, &mut c);
        if c.len() < k {
            return Err(DecomposeError::Supply(y, what));
        }
        for &e in &c[..k] {
            e4.insert(e);
        }
        Ok(())
    };
    for &y in ys {
        if e4.degree(g, y) % 2 == 1 {
            take(&mut e4, y, 1, "E4 parity")?;
        }
        let d = e4.degree(g, y);
        if d < 8 {
            take(&mut e4, y, 8 - d, "E4 floor")?;
        }
    }
    if e4.len() > m11 {
        return Err(DecomposeError::E4Overfull {
            need: m11,
            have: e4.len(),
        });
    }
    let rest = m11 - e4.len();
    let widest = |e4: &EdgeSubset, need: usize| -> Option<VertexId> {
        let mut best: Option<(usize, VertexId)> = None;
        for &y in ys {
            let f = free_at(e4, y).len();
            if f >= need && best.is_none_or(|(bf, _)| f > bf) {
                best = Some((f, y));
            }
        }
        best.map(|b| b.1)
    };
    for _ in 0..rest / 2 {
        let y = widest(&e4, 2).ok_or(DecomposeError::Supply(usize::MAX, "X-link"))?;
        take(&mut e4, y, 2, "X-link")?;
    }
    if rest % 2 == 1 {
        let y = widest(&e4, 1).ok_or(DecomposeError::Supply(usize::MAX, "E4 single"))?;
        take(&mut e4, y, 1, "E4 single")?;
    }

    let f3_set = EdgeSubset::from_ids(g.m(), f3.iter().copied());
    let xs: Vec<VertexId> = g.vertices().filter(|&v| sides.is_x(v)).collect();
    let mut repairs = 0;
    let limit = 8 * g.n() + 64;
    loop {
        let g4 = e4.union(&f3_set);
        let (st, comps, class) = g4_components(g, &g4, sides);
        if st.ok() {
            break;
        }
        if repairs >= limit {
            return Err(DecomposeError::RepairStuck {
                eulerian: st.eulerian,
                mixed: st.mixed,
            });
        }
        let focus = class
            .iter()
            .position(|&k| k == 0)
            .or_else(|| class.iter().position(|&k| k == 1))
            .expect("some component needs repair");
        let next = repair_step(g, ys, g1, &f3_set, sides, &e4, &comps[focus], st).ok_or(
            DecomposeError::RepairStuck {
                eulerian: st.eulerian,
                mixed: st.mixed,
            },
        )?;
        e4 = next;
        repairs += 1;
    }

    // Re-pick F1 inside the final E4: one edge per X vertex.
    let mut f1_new = Vec::new();
    for &x in &xs {
        let e = e4
            .incident(g, x)
            .next()
            .ok_or(DecomposeError::Supply(x, "F1"))?;
        f1_new.push(e);
    }
    f1_new.sort_unstable();
    Ok(E4Build {
        e4: e4.to_vec(),
        f1: f1_new,
        repairs,
    })
}

/// One improving exchange: either move an edge `yx` to a free `yx'` at the
/// same `y`, or trade two edges at `y` for two free edges at another `y*`.
#[allow(clippy::too_many_arguments)]
fn repair_step(
    g: &BipartiteGraph,
    ys: &[VertexId],
    g1: &EdgeSubset,
    f3: &EdgeSubset,
    sides: &Bipartition,
    e4: &EdgeSubset,
    focus: &Component,
    st: G4Status,
) -> Option<EdgeSubset> {
    let covered_after =
        |cand: &EdgeSubset, touched: &[VertexId]| touched.iter().all(|&x| cand.degree(g, x) >= 1);
    let better = |cand: &EdgeSubset| {
        let s = g4_status(g, &cand.union(f3), sides);
        s.key() < st.key()
    };
    let focus_y: Vec<VertexId> = focus
        .vertices
        .iter()
        .copied()
        .filter(|&v| !sides.is_x(v) && ys.binary_search(&v).is_ok())
        .collect();
    let free_at =
        |y: VertexId| -> Vec<EdgeId> { g1.incident(g, y).filter(|&e| !e4.contains(e)).collect() };

    for &y in &focus_y {
        let free = free_at(y);
        for e in e4.incident(g, y).collect::<Vec<_>>() {
            let x = g.other(e, y);
            for &f in &free {
                let mut cand = e4.clone();
                cand.remove(e);
                cand.insert(f);
                if covered_after(&cand, &[x]) && better(&cand) {
                    return Some(cand);
                }
            }
        }
    }

    for &y in &focus_y {
        if e4.degree(g, y) < 10 {
            continue;
        }
        let mut pairs: Vec<(EdgeId, EdgeId)> = Vec::new();
        if let Ok(p) = two_removable_edges(g, focus, y) {
            pairs.push(p);
        }
        let s = focus.edge_subset(g.m());
        let b = blocks(g, &s);
        let cut: Vec<EdgeId> = s
            .incident(g, y)
            .filter(|&e| b.is_bridge(e))
            .take(3)
            .collect();
        for i in 0..cut.len() {
            for j in i + 1..cut.len() {
                pairs.push((cut[i], cut[j]));
            }
        }
        let at_y: Vec<EdgeId> = e4.incident(g, y).collect();
        for i in 0..at_y.len().min(4) {
            for j in i + 1..at_y.len().min(4) {
                pairs.push((at_y[i], at_y[j]));
            }
        }
        for &(r1, r2) in &pairs {
            if f3.contains(r1) || f3.contains(r2) {
                continue;
            }
            for &ys2 in ys.iter().filter(|&&v| v != y) {
                let free = free_at(ys2);
                let free = &free[..free.len().min(3)];
                for i in 0..free.len() {
                    for j in i + 1..free.len() {
                        let mut cand = e4.clone();
                        cand.remove(r1);
                        cand.remove(r2);
                        cand.insert(free[i]);
                        cand.insert(free[j]);
                        let touched = [g.other(r1, y), g.other(r2, y)];
                        if covered_after(&cand, &touched) && better(&cand) {
                            return Some(cand);
                        }
                    }
                }
            }
        }
    }
    None
}

/// Runs the whole decomposition for one seed.
pub fn decompose(g: &BipartiteGraph, seed: u64) -> Result<DecompositionPlan, DecomposeError> {
    let delta = g.min_degree();
    if delta < MIN_DEGREE {
        return Err(DecomposeError::MinDegree(delta));
    }
    let part = konig_partition(g);
    let is_x = part.is_x.clone();
    let x: Vec<VertexId> = g.vertices().filter(|&v| is_x[v]).collect();
    let y: Vec<VertexId> = g.vertices().filter(|&v| !is_x[v]).collect();
    let z: Vec<VertexId> = y
        .iter()
        .copied()
        .filter(|&v| part.mate[v].is_none())
        .collect();
    let y_odd: Vec<VertexId> = y
        .iter()
        .copied()
        .filter(|&v| g.degree(v) % 2 == 1)
        .collect();
    let y_even: Vec<VertexId> = y
        .iter()
        .copied()
        .filter(|&v| g.degree(v) % 2 == 0)
        .collect();
    let i1: Vec<VertexId> = x
        .iter()
        .copied()
        .filter(|&v| g.incident(v).iter().all(|&e| !is_x[g.other(e, v)]))
        .collect();

    let e12 = choose_e1_e2(g, &part, seed)?;
    let mut taken = EdgeSubset::from_ids(
        g.m(),
        part.matching.iter().chain(&e12.e1).chain(&e12.e2).copied(),
    );
    let gx: Vec<EdgeId> = (0..g.m())
        .filter(|&e| {
            let (a, b) = g.endpoints(e);
            is_x[a] && is_x[b]
        })
        .collect();
    for &e in &gx {
        taken.insert(e);
    }
    let g1: Vec<EdgeId> = (0..g.m()).filter(|&e| !taken.contains(e)).collect();
    let g1_set = EdgeSubset::from_ids(g.m(), g1.iter().copied());

    let forests = build_forests(g, &is_x, &g1_set, seed)?;

    let mut c = Counts {
        n_x: x.len(),
        n_y: y.len(),
        n_y_odd: y_odd.len(),
        n_y_even: y_even.len(),
        m: g.m(),
        m1: g1.len(),
        m2: gx.len(),
        k1: forests.f1.len(),
        k2: forests.f2.len(),
        k3: forests.f3.len(),
        s1: forests.s1,
        s2: forests.s2,
        ..Counts::default()
    };
    let n1 = c.n_y + c.n_y_even + c.m1;
    for mu in 0..3 {
        c.l[mu] = residue_count(c.m, mu);
        c.l_1[mu] = residue_count(n1, mu);
        c.l_2[mu] = c.l[mu] - c.l_1[mu];
    }
    let l2_nonzero = c.l_2[1] + c.l_2[2];
    let g3 = if c.k2 + c.k3 > l2_nonzero {
        Vec::new()
    } else {
        let mut host = EdgeSubset::from_ids(g.m(), gx.iter().copied());
        for &e in forests.f2.iter().chain(&forests.f3) {
            host.remove(e);
        }
        build_g3(g, &host, l2_nonzero - c.k2 - c.k3)
    };
    c.eps1 = g3.len();
    c.m21 = c.eps1 + c.k2 + c.k3;
    c.m20 = c.m2 - c.m21;
    c.gamma = l2_nonzero as i64 - c.m21 as i64;
    let two_thirds = (2 * c.m).div_ceil(3);
    if c.m21 > two_thirds {
        return Err(DecomposeError::Invariant(format!(
            "m21 = {} exceeds ceil(2m/3) = {two_thirds}",
            c.m21
        )));
    }
    c.m11 = two_thirds - c.m21;
    if c.m11 >= c.m1 {
        return Err(DecomposeError::Invariant(format!(
            "m11 = {} is not below m1 = {}",
            c.m11, c.m1
        )));
    }
    c.m10 = c.m1 - c.m11;

    let mut e3: Vec<EdgeId> = g3
        .iter()
        .chain(&forests.f2)
        .chain(&forests.f3)
        .copied()
        .collect();
    e3.sort_unstable();

    let mut in_i2 = vec![false; g.n()];
    for &v in &forests.i2 {
        in_i2[v] = true;
    }
    let sides = Bipartition::new(g.vertices().map(|v| is_x[v] && !in_i2[v]).collect());
    let built = build_e4(
        g,
        &y,
        &g1_set,
        &forests.f1,
        &forests.f3,
        &sides,
        c.m11,
        seed,
    )?;

    let plan = DecompositionPlan {
        x,
        y,
        z,
        i1,
        i2: forests.i2,
        i21: forests.i21,
        y_odd,
        y_even,
        matching: part.matching.clone(),
        e1: e12.e1,
        e2: e12.e2,
        g1,
        gx,
        e3,
        e4: built.e4,
        f1: built.f1,
        f2: forests.f2,
        f3: forests.f3,
        g3,
        counts: c,
        seed,
        switches: e12.switches,
        repairs: built.repairs,
        is_x,
        mate: part.mate,
    };
    if let Some(v) = plan.violations(g).into_iter().find(|v| v.hard) {
        return Err(DecomposeError::Invariant(format!(
            "{}: {}",
            v.rule, v.detail
        )));
    }
    Ok(plan)
}

fn check_plan(p: &DecompositionPlan, g: &BipartiteGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |ok: bool, rule: &'static str, hard: bool, detail: String| {
        if !ok {
            out.push(Violation { rule, detail, hard });
        }
    };
    let m = g.m();
    let set = |v: &[EdgeId]| EdgeSubset::from_ids(m, v.iter().copied());
    let c = &p.counts;
    let is_x = &p.is_x;

    let y_indep = (0..m).all(|e| {
        let (a, b) = g.endpoints(e);
        is_x[a] || is_x[b]
    });
    check(y_indep, "Y independent", true, String::new());

    let mut mdeg = vec![0usize; g.n()];
    let mut m_ok = true;
    for &e in &p.matching {
        let (a, b) = g.endpoints(e);
        m_ok &= is_x[a] != is_x[b];
        mdeg[a] += 1;
        mdeg[b] += 1;
    }
    m_ok &= mdeg.iter().all(|&d| d <= 1) && p.x.iter().all(|&v| mdeg[v] == 1);
    check(
        m_ok,
        "M is a matching of G[X,Y] saturating X",
        true,
        String::new(),
    );
    let z_ok =
        p.y.iter()
            .filter(|&&v| mdeg[v] == 0)
            .copied()
            .collect::<Vec<_>>()
            == p.z;
    check(z_ok, "Z = Y unsaturated by M", true, String::new());

    let mut fam = vec![0u8; m];
    for list in [&p.matching, &p.e1, &p.e2, &p.g1, &p.gx] {
        for &e in list {
            fam[e] += 1;
        }
    }
    check(
        fam.iter().all(|&k| k == 1),
        "M, E1, E2, G1, G[X] partition E",
        true,
        String::new(),
    );
    let gx_ok = p.gx.iter().all(|&e| {
        let (a, b) = g.endpoints(e);
        is_x[a] && is_x[b]
    });
    check(gx_ok, "G[X] edges lie inside X", true, String::new());

    let cover_once = |edges: &[EdgeId], targets: &[VertexId]| {
        let mut d = vec![0usize; g.n()];
        for &e in edges {
            let (a, b) = g.endpoints(e);
            let y = if is_x[a] { b } else { a };
            d[y] += 1;
        }
        edges.len() == targets.len() && targets.iter().all(|&v| d[v] == 1)
    };
    check(
        cover_once(&p.e1, &p.z),
        "E1 covers Z once",
        true,
        format!("|E1| = {}, |Z| = {}", p.e1.len(), p.z.len()),
    );
    check(
        cover_once(&p.e2, &p.y_even),
        "E2 covers Y_even once",
        true,
        String::new(),
    );

    let g1s = set(&p.g1);
    let i1_ok = p.i1.iter().all(|&v| g1s.degree(g, v) > 0);
    check(i1_ok, "no I1 vertex isolated in G0", true, String::new());
    let y_even_g0 =
        p.y.iter()
            .all(|&v| g1s.degree(g, v) % 2 == 0 && g1s.degree(g, v) >= 14);
    check(
        y_even_g0,
        "G0 degrees on Y are even and at least 14",
        true,
        String::new(),
    );

    let mut in_i2 = vec![false; g.n()];
    for &v in &p.i2 {
        in_i2[v] = true;
    }
    let i2_ok =
        p.x.iter().all(|&v| in_i2[v] == (g1s.degree(g, v) == 0)) && p.i2.iter().all(|&v| is_x[v]);
    check(i2_ok, "I2 = X isolated in G0", true, String::new());

    let e4s = set(&p.e4);
    let f1s = set(&p.f1);
    let f1_ok = p.f1.iter().all(|&e| e4s.contains(e) && g1s.contains(e))
        && p.x
            .iter()
            .all(|&v| f1s.degree(g, v) == usize::from(!in_i2[v]));
    check(
        f1_ok,
        "F1 covers X \\ I2 once inside E4",
        true,
        String::new(),
    );

    let mut in_i21 = vec![false; g.n()];
    for &v in &p.i21 {
        in_i21[v] = true;
    }
    let f2s = set(&p.f2);
    let f2_deg = f2s.degrees(g);
    let f2_ok = p.f2.iter().all(|&e| {
        let (a, b) = g.endpoints(e);
        in_i2[a] && in_i2[b] && !in_i21[a] && !in_i21[b] && (f2_deg[a] == 1 || f2_deg[b] == 1)
    }) && p.i2.iter().all(|&v| in_i21[v] || f2_deg[v] > 0);
    check(
        f2_ok,
        "F2 is a star forest covering I2 \\ I21",
        true,
        String::new(),
    );
    let f3s = set(&p.f3);
    let f3_ok = p.f3.len() == p.i21.len()
        && p.f3.iter().all(|&e| {
            let (a, b) = g.endpoints(e);
            is_x[a] && is_x[b] && (in_i21[a] != in_i21[b]) && (in_i2[a] != in_i2[b])
        })
        && p.i21.iter().all(|&v| f3s.degree(g, v) == 1);
    check(
        f3_ok,
        "F3 joins each I21 vertex once into X \\ I2",
        true,
        String::new(),
    );

    let g3s = set(&p.g3);
    let g3_ok =
        p.g3.iter()
            .all(|&e| p.gx.binary_search(&e).is_ok() && !f2s.contains(e) && !f3s.contains(e))
            && g.vertices().all(|v| g3s.degree(g, v) % 2 == 0);
    check(
        g3_ok,
        "G3 is an even subgraph of G[X] - F2 - F3",
        true,
        String::new(),
    );
    let mut e3 = p.g3.clone();
    e3.extend(&p.f2);
    e3.extend(&p.f3);
    e3.sort_unstable();
    check(e3 == p.e3, "E3 = G3 + F2 + F3", true, String::new());
    check(
        c.m21 == c.eps1 + c.k2 + c.k3 && c.m21 == p.e3.len(),
        "m21 = eps1 + k2 + k3",
        true,
        String::new(),
    );

    check(
        c.m == c.n_y + c.n_y_even + c.m1 + c.m2,
        "m = n_Y + n_Y_even + m1 + m2",
        true,
        format!("{} vs {}", c.m, c.n_y + c.n_y_even + c.m1 + c.m2),
    );
    let k = c.k1 + c.k2 + c.k3;
    check(
        k < c.n_x,
        "k1 + k2 + k3 <= n_X - 1",
        false,
        format!("k1 + k2 + k3 = {k}, n_X = {}", c.n_x),
    );
    check(
        c.k2 + c.k3 + 15 <= c.n_x,
        "k2 + k3 <= n_X - 15",
        false,
        format!("k2 + k3 = {}, n_X = {}", c.k2 + c.k3, c.n_x),
    );
    check(
        c.m1 >= 14 * c.n_y,
        "m1 >= 14 n_Y",
        false,
        format!("m1 = {}, n_Y = {}", c.m1, c.n_y),
    );
    let nx = c.n_x as i64;
    check(
        -nx < 2 * c.gamma && c.gamma < nx,
        "-n_X/2 < gamma < n_X",
        false,
        format!("gamma = {}, n_X = {nx}", c.gamma),
    );
    let l1 = (c.l_1[1] + c.l_1[2]) as i64;
    let g_a = (c.l_2[1] + c.l_2[2]) as i64 - c.m21 as i64;
    let g_b = c.m20 as i64 - c.l_2[0] as i64;
    let g_c = c.m11 as i64 - l1;
    check(
        c.gamma == g_a && g_a == g_b && g_b == g_c,
        "gamma = (l21 + l22) - m21 = m20 - l20 = m11 - (l11 + l12)",
        true,
        format!("{g_a}, {g_b}, {g_c}"),
    );
    check(c.m10 + c.m11 == c.m1, "m10 = m1 - m11", true, String::new());
    check(
        c.m10 > 2 * c.n_y,
        "m10 > 2 n_Y",
        false,
        format!("m10 = {}, n_Y = {}", c.m10, c.n_y),
    );

    check(
        p.e4.len() == c.m11 && p.e4.iter().all(|&e| g1s.contains(e)),
        "E4 in G1 with |E4| = m11",
        true,
        String::new(),
    );
    let c1 = p.y.iter().all(|&v| e4s.degree(g, v) >= 8);
    check(c1, "(C1) |E4(y)| >= 8", true, String::new());
    let odd = p.y.iter().filter(|&&v| e4s.degree(g, v) % 2 == 1).count();
    check(
        odd <= 1,
        "(C2) at most one odd |E4(y)|",
        true,
        format!("{odd} odd"),
    );
    let st = g4_status(g, &p.g4_edges(m), &p.g4_sides(g));
    check(
        st.eulerian == 0,
        "G4 has no Eulerian component",
        true,
        format!("{st:?}"),
    );
    check(
        st.targeted == 0 || st.mixed > 0,
        "G4 has a mixed component",
        true,
        format!("{st:?}"),
    );
    out
}
