//! Open-trail decompositions relative to a designated bipartition.
//!
//! A decomposition of an edge set with `2r` odd vertices into exactly `r` open
//! trails is built by walking maximal trails between odd vertices and then
//! splicing any leftover closed tours into trails that touch them.

use thiserror::Error;

use crate::graph::{
    connected_components, hierholzer, BipartiteGraph, EdgeId, EdgeSubset, VertexId, Walk,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrailError {
    #[error("component containing vertex {0} is Eulerian")]
    EulerianComponent(VertexId),
    #[error("leftover closed tour at vertex {0} touches no trail")]
    DetachedTour(VertexId),
}

/// Which side of the designated bipartition a vertex lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Side {
    X,
    Y,
}

/// Side assignment for every vertex of a host graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    is_x: Vec<bool>,
}

impl Bipartition {
    pub fn new(is_x: Vec<bool>) -> Self {
        Self { is_x }
    }

    /// Side A as X, side B as Y.
    pub fn by_host_sides(g: &BipartiteGraph) -> Self {
        Self {
            is_x: g.vertices().map(|v| g.is_side_a(v)).collect(),
        }
    }

    pub fn side(&self, v: VertexId) -> Side {
        if self.is_x[v] {
            Side::X
        } else {
            Side::Y
        }
    }

    pub fn is_x(&self, v: VertexId) -> bool {
        self.is_x[v]
    }
}

/// Ordering key: Y-trails, then XY-trails, then X-trails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum TrailKind {
    Y,
    XY,
    X,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trail {
    pub walk: Walk,
    pub kind: TrailKind,
}

impl Trail {
    pub fn new(walk: Walk, sides: &Bipartition) -> Self {
        let kind = kind_of(&walk, sides);
        Self { walk, kind }
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.walk.edges
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.walk.vertices
    }

    pub fn start(&self) -> VertexId {
        self.walk.vertices[0]
    }

    pub fn end(&self) -> VertexId {
        *self.walk.vertices.last().expect("trail has vertices")
    }

    pub fn is_x_link(&self) -> bool {
        self.kind == TrailKind::X && self.walk.len() == 2
    }
}

fn kind_of(walk: &Walk, sides: &Bipartition) -> TrailKind {
    let a = sides.side(walk.vertices[0]);
    let b = sides.side(*walk.vertices.last().expect("nonempty walk"));
    match (a, b) {
        (Side::Y, Side::Y) => TrailKind::Y,
        (Side::X, Side::X) => TrailKind::X,
        _ => TrailKind::XY,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TrailDecomposition {
    pub trails: Vec<Trail>,
}

impl TrailDecomposition {
    pub fn r(&self) -> usize {
        self.trails.len()
    }

    pub fn r1(&self) -> usize {
        self.count(TrailKind::Y)
    }

    pub fn r2(&self) -> usize {
        self.count(TrailKind::XY)
    }

    fn count(&self, kind: TrailKind) -> usize {
        self.trails.iter().filter(|t| t.kind == kind).count()
    }

    /// Vertex sequences, one line per trail.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for t in &self.trails {
            let seq: Vec<String> = t.vertices().iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("{:?}: {}\n", t.kind, seq.join(" ")));
        }
        out
    }
}

/// Exactly |V_odd|/2 open trails partitioning `s`, ends at odd vertices.
pub fn good_open_trail_decomposition(
    g: &BipartiteGraph,
    s: &EdgeSubset,
    sides: &Bipartition,
) -> Result<TrailDecomposition, TrailError> {
    for c in connected_components(g, s).components {
        if c.is_eulerian(g) {
            return Err(TrailError::EulerianComponent(c.vertices[0]));
        }
    }

    let mut remaining = s.clone();
    let mut deg = remaining.degrees(g);
    let mut walks: Vec<Walk> = Vec::new();
    for start in g.vertices() {
        while deg[start] % 2 == 1 {
            let mut vertices = vec![start];
            let mut edges = Vec::new();
            let mut v = start;
            loop {
                let Some(e) = remaining.incident(g, v).next() else {
                    break;
                };
                remaining.remove(e);
                deg[v] -= 1;
                v = g.other(e, v);
                deg[v] -= 1;
                vertices.push(v);
                edges.push(e);
            }
            walks.push(Walk { vertices, edges });
        }
    }

    // What is left is an even graph; fold each of its tours into a trail.
    while !remaining.is_empty() {
        let comp = connected_components(g, &remaining).components.remove(0);
        let comp_set = comp.edge_subset(g.m());
        let mut host = None;
        'search: for (ti, w) in walks.iter().enumerate() {
            for (pos, v) in w.vertices.iter().enumerate() {
                if comp.vertices.binary_search(v).is_ok() {
                    host = Some((ti, pos, *v));
                    break 'search;
                }
            }
        }
        let Some((ti, pos, v)) = host else {
            return Err(TrailError::DetachedTour(comp.vertices[0]));
        };
        let tour = hierholzer(g, &comp_set, v);
        let w = &mut walks[ti];
        let tail_v = w.vertices.split_off(pos + 1);
        let tail_e = w.edges.split_off(pos);
        w.vertices.extend_from_slice(&tour.vertices[1..]);
        w.edges.extend_from_slice(&tour.edges);
        w.vertices.extend(tail_v);
        w.edges.extend(tail_e);
        for e in comp.edges {
            remaining.remove(e);
        }
    }

    Ok(TrailDecomposition {
        trails: walks.into_iter().map(|w| Trail::new(w, sides)).collect(),
    })
}

/// Exchanges a Y-trail and an X-trail through a shared vertex until no such pair
/// remains. Each exchange turns both into XY-trails.
pub fn splice_for_xy(d: &TrailDecomposition, sides: &Bipartition) -> TrailDecomposition {
    let mut trails = d.trails.clone();
    loop {
        let Some((yi, yp, xi, xp)) = find_crossing(&trails) else {
            break;
        };
        let ty = &trails[yi].walk;
        let tx = &trails[xi].walk;
        // X-trail a_0..a_p and Y-trail b_0..b_q meet at u = a_xp = b_yp.
        let mut first = Walk {
            vertices: tx.vertices[..=xp].to_vec(),
            edges: tx.edges[..xp].to_vec(),
        };
        first.vertices.extend_from_slice(&ty.vertices[yp + 1..]);
        first.edges.extend_from_slice(&ty.edges[yp..]);
        let mut second = Walk {
            vertices: ty.vertices[..=yp].to_vec(),
            edges: ty.edges[..yp].to_vec(),
        };
        second.vertices.extend_from_slice(&tx.vertices[xp + 1..]);
        second.edges.extend_from_slice(&tx.edges[xp..]);
        trails[xi] = Trail::new(first, sides);
        trails[yi] = Trail::new(second, sides);
    }
    TrailDecomposition { trails }
}

/// Lowest shared vertex between some Y-trail and some X-trail, with the lowest
/// trail indices and first positions along each trail.
fn find_crossing(trails: &[Trail]) -> Option<(usize, usize, usize, usize)> {
    let mut best: Option<(VertexId, usize, usize, usize, usize)> = None;
    for (yi, ty) in trails
        .iter()
        .enumerate()
        .filter(|(_, t)| t.kind == TrailKind::Y)
    {
        for (xi, tx) in trails
            .iter()
            .enumerate()
            .filter(|(_, t)| t.kind == TrailKind::X)
        {
            for (yp, u) in ty.vertices().iter().enumerate() {
                if let Some(xp) = tx.vertices().iter().position(|w| w == u) {
                    let cand = (*u, yi, yp, xi, xp);
                    if best.is_none_or(|b| (cand.0, cand.1, cand.3) < (b.0, b.1, b.3)) {
                        best = Some(cand);
                    }
                }
            }
        }
    }
    best.map(|(_, yi, yp, xi, xp)| (yi, yp, xi, xp))
}

/// Orders trails Y, XY, X (stable within a kind); XY-trails start at their Y end.
pub fn order_and_orient(d: &TrailDecomposition, sides: &Bipartition) -> TrailDecomposition {
    let mut trails: Vec<Trail> = d
        .trails
        .iter()
        .map(|t| {
            if t.kind == TrailKind::XY && sides.side(t.start()) == Side::X {
                Trail {
                    walk: t.walk.reversed(),
                    kind: t.kind,
                }
            } else {
                t.clone()
            }
        })
        .collect();
    trails.sort_by_key(|t| t.kind);
    TrailDecomposition { trails }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_partition(g: &BipartiteGraph, s: &EdgeSubset, d: &TrailDecomposition) {
        let mut seen = EdgeSubset::empty(g.m());
        for t in &d.trails {
            assert_eq!(t.vertices().len(), t.edges().len() + 1);
            assert_ne!(t.start(), t.end());
            for (i, &e) in t.edges().iter().enumerate() {
                assert!(seen.insert(e), "edge {e} repeated");
                let (a, b) = g.endpoints(e);
                let (p, q) = (t.vertices()[i], t.vertices()[i + 1]);
                assert!((a, b) == (p, q) || (a, b) == (q, p));
            }
        }
        assert_eq!(&seen, s);
        let odd = s.degrees(g).iter().filter(|d| *d % 2 == 1).count();
        assert_eq!(d.r() * 2, odd);
    }

    #[test]
    fn path_is_one_trail() {
        let g = BipartiteGraph::new(1, 2, [(0, 1), (0, 2)]).unwrap();
        let sides = Bipartition::by_host_sides(&g);
        let d = good_open_trail_decomposition(&g, &g.all_edges(), &sides).unwrap();
        assert_eq!(d.r(), 1);
        check_partition(&g, &g.all_edges(), &d);
    }

    #[test]
    fn star_has_two_trails() {
        let g = BipartiteGraph::new(1, 4, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let sides = Bipartition::by_host_sides(&g);
        // K1,3 as the subset of the first three edges.
        let s = EdgeSubset::from_ids(4, [0, 1, 2]);
        let d = good_open_trail_decomposition(&g, &s, &sides).unwrap();
        assert_eq!(d.r(), 2);
        check_partition(&g, &s, &d);
    }

    #[test]
    fn cycle_is_rejected() {
        let g = BipartiteGraph::new(2, 2, [(0, 2), (2, 1), (1, 3), (3, 0)]).unwrap();
        let sides = Bipartition::by_host_sides(&g);
        assert_eq!(
            good_open_trail_decomposition(&g, &g.all_edges(), &sides),
            Err(TrailError::EulerianComponent(0))
        );
    }

    #[test]
    fn leftover_tour_is_absorbed() {
        // A 4-cycle 0-3-1-4-0 with a pendant edge 0-5: the walk from 5 may stop at 0 early.
        let g = BipartiteGraph::new(2, 4, [(0, 5), (0, 2), (2, 1), (1, 3), (3, 0)]).unwrap();
        let sides = Bipartition::by_host_sides(&g);
        let s = g.all_edges();
        let d = good_open_trail_decomposition(&g, &s, &sides).unwrap();
        check_partition(&g, &s, &d);
    }

    #[test]
    fn crossing_y_and_x_trails_become_two_xy_trails() {
        // X = {0,1,2} (side A), Y = {3,4,5,6}. Y-trail 3-0-4, X-trail 1-5-0-6-2 through u = 0.
        let g =
            BipartiteGraph::new(3, 4, [(0, 3), (0, 4), (1, 5), (0, 5), (0, 6), (2, 6)]).unwrap();
        let sides = Bipartition::by_host_sides(&g);
        let y = Trail::new(
            Walk {
                vertices: vec![3, 0, 4],
                edges: vec![0, 1],
            },
            &sides,
        );
        let x = Trail::new(
            Walk {
                vertices: vec![1, 5, 0, 6, 2],
                edges: vec![2, 3, 4, 5],
            },
            &sides,
        );
        assert_eq!((y.kind, x.kind), (TrailKind::Y, TrailKind::X));
        let d = TrailDecomposition { trails: vec![y, x] };
        let spliced = splice_for_xy(&d, &sides);
        assert_eq!(spliced.r(), 2);
        assert_eq!(spliced.r2(), 2);
        check_partition(&g, &g.all_edges(), &spliced);
    }

    #[test]
    fn splice_fixed_points() {
        let g = BipartiteGraph::new(2, 2, [(0, 2), (2, 1), (1, 3)]).unwrap();
        let sides = Bipartition::by_host_sides(&g);
        let d = good_open_trail_decomposition(&g, &g.all_edges(), &sides).unwrap();
        assert_eq!(d.r2(), 1);
        assert_eq!(splice_for_xy(&d, &sides), d);
    }

    #[test]
    fn ordering_and_orientation() {
        let g = BipartiteGraph::new(2, 2, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let sides = Bipartition::by_host_sides(&g);
        let x = Trail::new(
            Walk {
                vertices: vec![0, 2, 1],
                edges: vec![0, 2],
            },
            &sides,
        );
        let y = Trail::new(
            Walk {
                vertices: vec![3, 1],
                edges: vec![3],
            },
            &sides,
        );
        let y = Trail {
            walk: y.walk,
            kind: TrailKind::XY,
        };
        let d = TrailDecomposition {
            trails: vec![x.clone(), y],
        };
        let o = order_and_orient(&d, &sides);
        assert_eq!(o.trails[0].kind, TrailKind::XY);
        assert_eq!(o.trails[0].vertices(), &[3, 1]);
        assert_eq!(o.trails[1], x);

        let xy_backwards = Trail::new(
            Walk {
                vertices: vec![0, 3],
                edges: vec![1],
            },
            &sides,
        );
        let o = order_and_orient(
            &TrailDecomposition {
                trails: vec![xy_backwards],
            },
            &sides,
        );
        assert_eq!(o.trails[0].vertices(), &[3, 0]);
        assert_eq!(order_and_orient(&o, &sides), o);
    }
}
