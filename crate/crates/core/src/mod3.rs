//! Residue assignment on trail decompositions: decides which edges take a
//! label congruent to 1 and which take a label congruent to 2 (mod 3), so
//! that every X-side vertex ends with a nonzero residue and Y-side vertices
//! stay balanced.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{connected_components, BipartiteGraph, EdgeId, EdgeSubset, VertexId};
use crate::trails::{
    good_open_trail_decomposition, order_and_orient, splice_for_xy, Bipartition, Side, TrailError,
    TrailKind,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelerError {
    #[error("label counts {l1} and {l2} differ by more than 2")]
    Unbalanced { l1: usize, l2: usize },
    #[error("{labels} labels for {edges} edges")]
    CountMismatch { labels: usize, edges: usize },
    #[error("odd Y-side vertices present but no component has odd vertices on both sides")]
    NoMixedComponent,
    #[error(transparent)]
    Trail(#[from] TrailError),
    #[error("parity invariant broken at vertex {0}")]
    ParityInvariant(VertexId),
    #[error("residue totals ({got1}, {got2}) differ from requested ({l1}, {l2})")]
    Totals {
        got1: usize,
        got2: usize,
        l1: usize,
        l2: usize,
    },
    #[error("X-side vertex {0} ends with residue 0")]
    ZeroResidue(VertexId),
    #[error("Y-side vertex {0} is unbalanced")]
    YImbalance(VertexId),
    #[error("pool holds {ones} ones and {twos} twos, plan needs {need1} and {need2}")]
    PoolMismatch {
        ones: usize,
        twos: usize,
        need1: usize,
        need2: usize,
    },
    #[error("label {0} is in the wrong residue class")]
    WrongClass(u64),
    #[error("edge {0} has no residue in the plan")]
    NotPlanned(EdgeId),
    #[error("hypothesis for the residue exchange fails: {0}")]
    ExchangeHypothesis(&'static str),
    #[error("no exchange found to create both residues")]
    NoExchange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum Residue {
    One,
    Two,
}

impl Residue {
    pub fn value(self) -> u64 {
        match self {
            Residue::One => 1,
            Residue::Two => 2,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Residue::One => Residue::Two,
            Residue::Two => Residue::One,
        }
    }

    pub fn of(label: u64) -> Option<Self> {
        match label % 3 {
            1 => Some(Residue::One),
            2 => Some(Residue::Two),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResiduePlan {
    /// Indexed by host edge id; `None` outside the labeled subset.
    pub residue_of_edge: Vec<Option<Residue>>,
    pub ones_at: Vec<usize>,
    pub twos_at: Vec<usize>,
}

impl ResiduePlan {
    fn empty(g: &BipartiteGraph) -> Self {
        Self {
            residue_of_edge: vec![None; g.m()],
            ones_at: vec![0; g.n()],
            twos_at: vec![0; g.n()],
        }
    }

    fn set(&mut self, g: &BipartiteGraph, e: EdgeId, r: Residue) {
        let (a, b) = g.endpoints(e);
        if let Some(old) = self.residue_of_edge[e] {
            for v in [a, b] {
                match old {
                    Residue::One => self.ones_at[v] -= 1,
                    Residue::Two => self.twos_at[v] -= 1,
                }
            }
        }
        self.residue_of_edge[e] = Some(r);
        for v in [a, b] {
            match r {
                Residue::One => self.ones_at[v] += 1,
                Residue::Two => self.twos_at[v] += 1,
            }
        }
    }

    pub fn residue(&self, e: EdgeId) -> Option<Residue> {
        self.residue_of_edge[e]
    }

    /// Residue of the vertex sum restricted to planned edges.
    pub fn vertex_residue(&self, v: VertexId) -> u64 {
        (self.ones_at[v] + 2 * self.twos_at[v]) as u64 % 3
    }

    pub fn imbalance(&self, v: VertexId) -> usize {
        self.ones_at[v].abs_diff(self.twos_at[v])
    }

    pub fn totals(&self) -> (usize, usize) {
        let ones = self
            .residue_of_edge
            .iter()
            .filter(|r| **r == Some(Residue::One))
            .count();
        let twos = self
            .residue_of_edge
            .iter()
            .filter(|r| **r == Some(Residue::Two))
            .count();
        (ones, twos)
    }
}

/// Runs the trail rules over a decomposition with at least one XY-trail per
/// mixed component, ordered Y, XY, X.
pub fn assign_residues(
    g: &BipartiteGraph,
    s: &EdgeSubset,
    sides: &Bipartition,
    l1: usize,
    l2: usize,
) -> Result<ResiduePlan, LabelerError> {
    if l1.abs_diff(l2) > 2 {
        return Err(LabelerError::Unbalanced { l1, l2 });
    }
    if l1 + l2 != s.len() {
        return Err(LabelerError::CountMismatch {
            labels: l1 + l2,
            edges: s.len(),
        });
    }
    let deg = s.degrees(g);
    let y_all_even = g.vertices().all(|v| sides.is_x(v) || deg[v] % 2 == 0);
    if !y_all_even {
        let mixed = connected_components(g, s).components.iter().any(|c| {
            let odd_x = c.vertices.iter().any(|&v| sides.is_x(v) && deg[v] % 2 == 1);
            let odd_y = c
                .vertices
                .iter()
                .any(|&v| !sides.is_x(v) && deg[v] % 2 == 1);
            odd_x && odd_y
        });
        if !mixed {
            return Err(LabelerError::NoMixedComponent);
        }
    }

    let d = good_open_trail_decomposition(g, s, sides)?;
    let d = order_and_orient(&splice_for_xy(&d, sides), sides);

    // Work in the majority class; the minority class is its flip.
    let major = if l1 >= l2 { Residue::One } else { Residue::Two };
    let iota = l1.abs_diff(l2);
    let fallback = d.r2() == 0 && iota == 2;
    let last = d.r().saturating_sub(1);

    let mut plan = ResiduePlan::empty(g);
    let mut labeled_at = vec![0usize; g.n()];
    let (mut used_major, mut used_minor) = (0usize, 0usize);
    let mut seen_y_trail = false;

    for (ti, t) in d.trails.iter().enumerate() {
        let forced = fallback && ti == last;
        let mut prev: Option<Residue> = None;
        for (k, &e) in t.edges().iter().enumerate() {
            let from = t.vertices()[k];
            let r = if k == 0 {
                match t.kind {
                    TrailKind::Y if !seen_y_trail => major,
                    TrailKind::Y if used_major <= used_minor => major,
                    TrailKind::Y => major.flip(),
                    TrailKind::XY if used_major <= used_minor + iota => major,
                    TrailKind::XY => major.flip(),
                    TrailKind::X => major,
                }
            } else if forced && k == 1 {
                major
            } else {
                let before = prev.expect("previous edge labeled");
                match sides.side(from) {
                    Side::Y => before.flip(),
                    Side::X => {
                        let h = labeled_at[from];
                        let dx = deg[from];
                        if dx % 2 == 1 || h + 3 <= dx {
                            if dx % 2 == 0 && h % 2 == 0 {
                                return Err(LabelerError::ParityInvariant(from));
                            }
                            before.flip()
                        } else if h + 1 == dx {
                            before
                        } else {
                            return Err(LabelerError::ParityInvariant(from));
                        }
                    }
                }
            };
            plan.set(g, e, r);
            if r == major {
                used_major += 1;
            } else {
                used_minor += 1;
            }
            let (a, b) = g.endpoints(e);
            labeled_at[a] += 1;
            labeled_at[b] += 1;
            prev = Some(r);
        }
        if t.kind == TrailKind::Y {
            seen_y_trail = true;
        }
    }

    let (got1, got2) = plan.totals();
    if (got1, got2) != (l1, l2) {
        return Err(LabelerError::Totals { got1, got2, l1, l2 });
    }
    check_conclusions(g, s, sides, &plan)?;
    Ok(plan)
}

/// Nonzero residue at every X-side vertex; Y-side imbalance at most 1, or
/// exactly one vertex with imbalance 2 when all Y-side degrees are even.
pub fn check_conclusions(
    g: &BipartiteGraph,
    s: &EdgeSubset,
    sides: &Bipartition,
    plan: &ResiduePlan,
) -> Result<(), LabelerError> {
    let deg = s.degrees(g);
    let y_all_even = g.vertices().all(|v| sides.is_x(v) || deg[v] % 2 == 0);
    let mut twos = 0;
    for v in g.vertices().filter(|&v| deg[v] > 0) {
        if sides.is_x(v) {
            if plan.vertex_residue(v) == 0 {
                return Err(LabelerError::ZeroResidue(v));
            }
        } else {
            let d = plan.imbalance(v);
            if d == 2 && y_all_even {
                twos += 1;
                if twos > 1 {
                    return Err(LabelerError::YImbalance(v));
                }
            } else if d > 1 {
                return Err(LabelerError::YImbalance(v));
            }
        }
    }
    Ok(())
}

/// Concrete labels split by residue class, each kept sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ResiduePool {
    pub ones: Vec<u64>,
    pub twos: Vec<u64>,
}

impl ResiduePool {
    pub fn new(mut ones: Vec<u64>, mut twos: Vec<u64>) -> Result<Self, LabelerError> {
        if let Some(&bad) = ones.iter().find(|&&l| l % 3 != 1) {
            return Err(LabelerError::WrongClass(bad));
        }
        if let Some(&bad) = twos.iter().find(|&&l| l % 3 != 2) {
            return Err(LabelerError::WrongClass(bad));
        }
        ones.sort_unstable();
        twos.sort_unstable();
        Ok(Self { ones, twos })
    }

    pub fn class(&self, r: Residue) -> &[u64] {
        match r {
            Residue::One => &self.ones,
            Residue::Two => &self.twos,
        }
    }

    fn class_mut(&mut self, r: Residue) -> &mut Vec<u64> {
        match r {
            Residue::One => &mut self.ones,
            Residue::Two => &mut self.twos,
        }
    }

    /// Removes and returns the greatest label of class `r`.
    pub fn take_greatest(&mut self, r: Residue) -> Option<u64> {
        self.class_mut(r).pop()
    }

    /// Removes and returns the least label of class `r`.
    pub fn take_least(&mut self, r: Residue) -> Option<u64> {
        let c = self.class_mut(r);
        if c.is_empty() {
            None
        } else {
            Some(c.remove(0))
        }
    }
}

/// Turns residues into concrete labels. Reserved edges (in edge-id order) take
/// the greatest labels of their class; all other edges take the remaining
/// labels in ascending order by edge id.
pub fn materialize(
    plan: &ResiduePlan,
    pool: &ResiduePool,
    reserved: &[EdgeId],
) -> Result<BTreeMap<EdgeId, u64>, LabelerError> {
    let (need1, need2) = plan.totals();
    if pool.ones.len() != need1 || pool.twos.len() != need2 {
        return Err(LabelerError::PoolMismatch {
            ones: pool.ones.len(),
            twos: pool.twos.len(),
            need1,
            need2,
        });
    }
    let mut pool = pool.clone();
    let mut out = BTreeMap::new();
    let mut reserved = reserved.to_vec();
    reserved.sort_unstable();
    for &e in &reserved {
        let r = plan.residue(e).ok_or(LabelerError::NotPlanned(e))?;
        out.insert(e, pool.take_greatest(r).expect("class sizes checked"));
    }
    let (mut i1, mut i2) = (0, 0);
    for (e, r) in plan.residue_of_edge.iter().enumerate() {
        let Some(r) = r else { continue };
        if out.contains_key(&e) {
            continue;
        }
        let label = match r {
            Residue::One => {
                i1 += 1;
                pool.ones[i1 - 1]
            }
            Residue::Two => {
                i2 += 1;
                pool.twos[i2 - 1]
            }
        };
        out.insert(e, label);
    }
    Ok(out)
}

/// Makes both nonzero residues appear among the X-side vertices and the
/// pendant Y-side vertices, by one exchange of residues on four edges.
///
/// Pendant Y-side vertices form the set W; the exchange happens in the
/// subgraph without them.
pub fn ensure_both_residues(
    g: &BipartiteGraph,
    s: &EdgeSubset,
    sides: &Bipartition,
    plan: &ResiduePlan,
) -> Result<ResiduePlan, LabelerError> {
    let deg = s.degrees(g);
    let active: Vec<VertexId> = g.vertices().filter(|&v| deg[v] > 0).collect();
    let is_w = |v: VertexId| !sides.is_x(v) && deg[v] == 1;
    let y_rest: Vec<VertexId> = active
        .iter()
        .copied()
        .filter(|&v| !sides.is_x(v) && !is_w(v))
        .collect();
    if y_rest.iter().filter(|&&v| deg[v] % 2 == 1).count() > 1 {
        return Err(LabelerError::ExchangeHypothesis(
            "more than one odd Y-side vertex outside W",
        ));
    }
    if 2 * y_rest.len() < active.len() {
        return Err(LabelerError::ExchangeHypothesis(
            "too few non-pendant Y-side vertices",
        ));
    }
    if y_rest.iter().any(|&v| deg[v] < 4) {
        return Err(LabelerError::ExchangeHypothesis(
            "a non-pendant Y-side vertex has degree below 4",
        ));
    }

    let watched: Vec<VertexId> = active
        .iter()
        .copied()
        .filter(|&v| sides.is_x(v) || is_w(v))
        .collect();
    let count = |p: &ResiduePlan, r: u64| {
        watched
            .iter()
            .filter(|&&v| p.vertex_residue(v) == r)
            .count()
    };
    if count(plan, 1) > 0 && count(plan, 2) > 0 {
        return Ok(plan.clone());
    }
    let mu = if count(plan, 1) > 0 {
        Residue::One
    } else {
        Residue::Two
    };

    // At u, two edges of class 3-mu toward non-pendant y1, y2; at each y_i an
    // edge of class mu toward distinct u_i != u. Swapping classes on all four
    // moves u, u1, u2 to residue 3-mu and keeps every y balanced.
    for &u in active.iter().filter(|&&v| sides.is_x(v)) {
        let opp: Vec<EdgeId> = s
            .incident(g, u)
            .filter(|&e| plan.residue(e) == Some(mu.flip()) && !is_w(g.other(e, u)))
            .collect();
        for (i, &e1) in opp.iter().enumerate() {
            for &e2 in &opp[i + 1..] {
                let (y1, y2) = (g.other(e1, u), g.other(e2, u));
                let mates = |y: VertexId| -> Vec<(EdgeId, VertexId)> {
                    s.incident(g, y)
                        .filter(|&f| plan.residue(f) == Some(mu))
                        .map(|f| (f, g.other(f, y)))
                        .filter(|&(_, w)| w != u)
                        .collect()
                };
                for (f1, u1) in mates(y1) {
                    for (f2, u2) in mates(y2) {
                        if u1 == u2 {
                            continue;
                        }
                        let mut next = plan.clone();
                        next.set(g, e1, mu);
                        next.set(g, e2, mu);
                        next.set(g, f1, mu.flip());
                        next.set(g, f2, mu.flip());
                        if count(&next, 1) > 0 && count(&next, 2) > 0 {
                            check_conclusions(g, s, sides, &next)?;
                            return Ok(next);
                        }
                    }
                }
            }
        }
    }
    Err(LabelerError::NoExchange)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_x1y1x2y2() -> (BipartiteGraph, Bipartition) {
        // x1 = 0, x2 = 1, y1 = 2, y2 = 3; edges x1y1, y1x2, x2y2.
        let g = BipartiteGraph::new(2, 2, [(0, 2), (1, 2), (1, 3)]).unwrap();
        let sides = Bipartition::by_host_sides(&g);
        (g, sides)
    }

    #[test]
    fn path_follows_the_rules() {
        let (g, sides) = path_x1y1x2y2();
        let plan = assign_residues(&g, &g.all_edges(), &sides, 2, 1).unwrap();
        // Trail runs y2 x2 y1 x1: edges x2y2, x2y1, x1y1.
        assert_eq!(plan.residue(2), Some(Residue::One));
        assert_eq!(plan.residue(1), Some(Residue::One));
        assert_eq!(plan.residue(0), Some(Residue::Two));
        assert_eq!(plan.vertex_residue(1), 2);
        assert_eq!(plan.vertex_residue(0), 2);
        assert_eq!((plan.ones_at[2], plan.twos_at[2]), (1, 1));
        assert_eq!((plan.ones_at[3], plan.twos_at[3]), (1, 0));
    }

    #[test]
    fn single_edge() {
        let g = BipartiteGraph::new(1, 1, [(0, 1)]).unwrap();
        let sides = Bipartition::by_host_sides(&g);
        let plan = assign_residues(&g, &g.all_edges(), &sides, 1, 0).unwrap();
        assert_eq!(plan.residue(0), Some(Residue::One));
        assert_ne!(plan.vertex_residue(0), 0);
    }

    #[test]
    fn cycle_is_rejected() {
        let g = BipartiteGraph::new(2, 2, [(0, 2), (2, 1), (1, 3), (3, 0)]).unwrap();
        let sides = Bipartition::by_host_sides(&g);
        assert!(matches!(
            assign_residues(&g, &g.all_edges(), &sides, 2, 2),
            Err(LabelerError::Trail(TrailError::EulerianComponent(_)))
        ));
    }

    #[test]
    fn rejects_bad_counts() {
        let (g, sides) = path_x1y1x2y2();
        assert_eq!(
            assign_residues(&g, &g.all_edges(), &sides, 3, 0),
            Err(LabelerError::Unbalanced { l1: 3, l2: 0 })
        );
        assert_eq!(
            assign_residues(&g, &g.all_edges(), &sides, 1, 1),
            Err(LabelerError::CountMismatch {
                labels: 2,
                edges: 3
            })
        );
    }

    #[test]
    fn materialize_examples() {
        let g = BipartiteGraph::new(1, 3, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let mut plan = ResiduePlan::empty(&g);
        plan.set(&g, 0, Residue::One);
        plan.set(&g, 1, Residue::Two);
        let pool = ResiduePool::new(vec![1], vec![2]).unwrap();
        let out = materialize(&plan, &pool, &[]).unwrap();
        assert_eq!(out.values().copied().collect::<Vec<_>>(), vec![1, 2]);

        plan.set(&g, 1, Residue::One);
        plan.set(&g, 2, Residue::Two);
        let pool = ResiduePool::new(vec![1, 4], vec![2]).unwrap();
        let out = materialize(&plan, &pool, &[0]).unwrap();
        assert_eq!(out[&0], 4);
        assert_eq!(out[&1], 1);
        assert_eq!(out[&2], 2);

        let short = ResiduePool::new(vec![1], vec![2]).unwrap();
        assert!(matches!(
            materialize(&plan, &short, &[]),
            Err(LabelerError::PoolMismatch { .. })
        ));
        assert_eq!(
            ResiduePool::new(vec![3], vec![]),
            Err(LabelerError::WrongClass(3))
        );
    }

    /// K4,4 with residues arranged so every X-side sum is 1 (mod 3) and only
    /// one Y-side vertex is imbalanced.
    fn all_ones_instance() -> (BipartiteGraph, Bipartition, ResiduePlan) {
        let g =
            BipartiteGraph::new(4, 4, (0..4).flat_map(|x| (4..8).map(move |y| (x, y)))).unwrap();
        let sides = Bipartition::by_host_sides(&g);
        let mut plan = ResiduePlan::empty(&g);
        for x in 0..4 {
            for y in 4..8 {
                // x0 takes four ones; x_i (i >= 1) takes a single one, at y = 3 + i.
                let r = if x == 0 || y == 3 + x {
                    Residue::One
                } else {
                    Residue::Two
                };
                plan.set(&g, g.edge_between(x, y).unwrap(), r);
            }
        }
        (g, sides, plan)
    }

    #[test]
    fn exchange_flips_exactly_three() {
        let (g, sides, plan) = all_ones_instance();
        let q = |p: &ResiduePlan, r| (0..4).filter(|&x| p.vertex_residue(x) == r).count();
        assert_eq!(q(&plan, 2), 0);
        assert_eq!(q(&plan, 1), 4);
        let next = ensure_both_residues(&g, &g.all_edges(), &sides, &plan).unwrap();
        assert_eq!(q(&next, 2), 3);
        assert_eq!(q(&next, 1), 1);
        for y in 4..8 {
            assert_eq!(next.imbalance(y), plan.imbalance(y));
        }
        assert_eq!(
            ensure_both_residues(&g, &g.all_edges(), &sides, &next).unwrap(),
            next
        );
    }
}
