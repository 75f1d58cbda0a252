//! Test corpora: complete bipartite graphs, seeded random graphs with a
//! minimum-degree floor, and all small connected bipartite graphs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{BipartiteGraph, VertexId};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("degree floor {delta} exceeds the side sizes {n_a} and {n_b}")]
    Infeasible {
        n_a: usize,
        n_b: usize,
        delta: usize,
    },
    #[error("edge probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("enumeration is limited to {TINY_LIMIT} edges, got {0}")]
    TooLarge(usize),
}

pub const TINY_LIMIT: usize = 7;

pub fn complete_bipartite(a: usize, b: usize) -> BipartiteGraph {
    let edges: Vec<(VertexId, VertexId)> = (0..a)
        .flat_map(|i| (0..b).map(move |j| (i, a + j)))
        .collect();
    BipartiteGraph::new(a, b, edges).expect("complete bipartite graph is valid")
}

/// Random bipartite graph with every degree at least `delta`.
///
/// Overlays `delta` random matchings that saturate the smaller side, tops up
/// any vertex still short of `delta`, then adds each remaining pair with
/// probability `extra`. The same arguments always give the same edge list.
pub fn random_min_degree(
    n_a: usize,
    n_b: usize,
    delta: usize,
    extra: f64,
    seed: u64,
) -> Result<BipartiteGraph, GenError> {
    if delta > n_a.min(n_b) || (delta > 0 && (n_a == 0 || n_b == 0)) {
        return Err(GenError::Infeasible { n_a, n_b, delta });
    }
    if !(0.0..=1.0).contains(&extra) {
        return Err(GenError::Probability(extra));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = vec![vec![false; n_b]; n_a];
    let (small, large) = if n_a <= n_b { (n_a, n_b) } else { (n_b, n_a) };
    let mut perm: Vec<usize> = (0..large).collect();
    for _ in 0..delta {
        perm.shuffle(&mut rng);
        for (i, &j) in perm.iter().take(small).enumerate() {
            let (a, b) = if n_a <= n_b { (i, j) } else { (j, i) };
            adj[a][b] = true;
        }
    }
    // Patch deficient vertices on both sides.
    for a in 0..n_a {
        let have = adj[a].iter().filter(|&&x| x).count();
        if have < delta {
            let mut free: Vec<usize> = (0..n_b).filter(|&b| !adj[a][b]).collect();
            free.shuffle(&mut rng);
            for &b in free.iter().take(delta - have) {
                adj[a][b] = true;
            }
        }
    }
    for b in 0..n_b {
        let have = (0..n_a).filter(|&a| adj[a][b]).count();
        if have < delta {
            let mut free: Vec<usize> = (0..n_a).filter(|&a| !adj[a][b]).collect();
            free.shuffle(&mut rng);
            for &a in free.iter().take(delta - have) {
                adj[a][b] = true;
            }
        }
    }
    for row in adj.iter_mut() {
        for cell in row.iter_mut() {
            if !*cell && extra > 0.0 && rng.gen_bool(extra) {
                *cell = true;
            }
        }
    }
    let edges: Vec<(VertexId, VertexId)> = (0..n_a)
        .flat_map(|a| (0..n_b).map(move |b| (a, b)))
        .filter(|&(a, b)| adj[a][b])
        .map(|(a, b)| (a, n_a + b))
        .collect();
    Ok(BipartiteGraph::new(n_a, n_b, edges).expect("generated graph is simple and bipartite"))
}

/// Random graph whose minimum vertex cover takes vertices from both sides.
///
/// Side A is `A1 ∪ A2` and side B is `B1 ∪ B2`. `A1`-`B2` pairs are edges with
/// probability `p_inner`, `A1`-`B1` and `A2`-`B2` pairs with probability
/// `p_cross`, and there are no `A2`-`B1` edges, so `A1 ∪ B2` covers every edge.
/// Degrees below `delta` are then topped up inside the allowed pairs.
///
/// The first `hermits` vertices of `A1` (and of `B2`) get a single neighbor
/// on the far side, so they keep almost all their edges inside the cover.
#[allow(clippy::too_many_arguments)]
pub fn layered(
    a1: usize,
    a2: usize,
    b1: usize,
    b2: usize,
    hermits: usize,
    delta: usize,
    p_inner: f64,
    p_cross: f64,
    seed: u64,
) -> Result<BipartiteGraph, GenError> {
    let (n_a, n_b) = (a1 + a2, b1 + b2);
    let core = a1.min(b2).saturating_sub(hermits);
    if delta > core || hermits > b1.min(a2) {
        return Err(GenError::Infeasible { n_a, n_b, delta });
    }
    for p in [p_inner, p_cross] {
        if !(0.0..=1.0).contains(&p) {
            return Err(GenError::Probability(p));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let allowed = |a: usize, b: usize| {
        let hermit_a = a < hermits && b < b1 && b != a;
        let hermit_b = b >= b1 && b - b1 < hermits && a >= a1 && a - a1 != b - b1;
        (a < a1 || b >= b1) && !hermit_a && !hermit_b
    };
    let mut adj = vec![vec![false; n_b]; n_a];
    for (a, row) in adj.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            let p = if a < a1 && b >= b1 { p_inner } else { p_cross };
            let forced = (a < hermits && b == a)
                || (b >= b1 && b - b1 < hermits && a >= a1 && a - a1 == b - b1);
            *cell = forced || (allowed(a, b) && p > 0.0 && rng.gen_bool(p));
        }
    }
    for a in 0..n_a {
        let have = adj[a].iter().filter(|&&x| x).count();
        if have < delta {
            let mut free: Vec<usize> = (0..n_b).filter(|&b| allowed(a, b) && !adj[a][b]).collect();
            free.shuffle(&mut rng);
            for &b in free.iter().take(delta - have) {
                adj[a][b] = true;
            }
        }
    }
    for b in 0..n_b {
        let have = (0..n_a).filter(|&a| adj[a][b]).count();
        if have < delta {
            let mut free: Vec<usize> = (0..n_a).filter(|&a| allowed(a, b) && !adj[a][b]).collect();
            free.shuffle(&mut rng);
            for &a in free.iter().take(delta - have) {
                adj[a][b] = true;
            }
        }
    }
    let edges: Vec<(VertexId, VertexId)> = (0..n_a)
        .flat_map(|a| (0..n_b).map(move |b| (a, b)))
        .filter(|&(a, b)| adj[a][b])
        .map(|(a, b)| (a, n_a + b))
        .collect();
    Ok(BipartiteGraph::new(n_a, n_b, edges).expect("generated graph is simple and bipartite"))
}

/// Canonical form: side sizes plus the lexicographically least sorted edge
/// list over all relabelings within sides (and the side swap when sizes match
/// or are reversed).
type Canon = (usize, usize, Vec<(u8, u8)>);

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut p, &mut out);
    out
}

fn heap_permute(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(p.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, p, out);
        let j = if k % 2 == 0 { i } else { 0 };
        p.swap(j, k - 1);
    }
}

/// `edges` as (side-A index, side-B index) pairs.
fn canonical(n_a: usize, n_b: usize, edges: &[(usize, usize)]) -> Canon {
    let mut best: Option<Canon> = None;
    let orient: [(usize, usize, bool); 2] = [(n_a, n_b, false), (n_b, n_a, true)];
    for &(sa, sb, swapped) in &orient {
        // Smaller side first keeps a single representative per shape.
        if sa > sb {
            continue;
        }
        let es: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| if swapped { (b, a) } else { (a, b) })
            .collect();
        let pa = permutations(sa);
        let pb = permutations(sb);
        for p in &pa {
            for q in &pb {
                let mut list: Vec<(u8, u8)> =
                    es.iter().map(|&(a, b)| (p[a] as u8, q[b] as u8)).collect();
                list.sort_unstable();
                if best
                    .as_ref()
                    .is_none_or(|b| (sa, sb, &list) < (b.0, b.1, &b.2))
                {
                    best = Some((sa, sb, list));
                }
            }
        }
    }
    best.expect("at least one orientation")
}

/// All connected bipartite graphs with `1..=max_edges` edges, one per
/// isomorphism class, ordered by edge count then canonical form.
pub fn tiny_enumerate(max_edges: usize) -> Result<Vec<BipartiteGraph>, GenError> {
    if max_edges > TINY_LIMIT {
        return Err(GenError::TooLarge(max_edges));
    }
    let mut out = Vec::new();
    if max_edges == 0 {
        return Ok(out);
    }
    let mut level: BTreeSet<Canon> = BTreeSet::from([canonical(1, 1, &[(0, 0)])]);
    for size in 1..=max_edges {
        let mut next = BTreeSet::new();
        for (n_a, n_b, es) in &level {
            let (n_a, n_b) = (*n_a, *n_b);
            let es: Vec<(usize, usize)> =
                es.iter().map(|&(a, b)| (a as usize, b as usize)).collect();
            out.push(build(n_a, n_b, &es));
            if size == max_edges {
                continue;
            }
            let has = |a: usize, b: usize| es.contains(&(a, b));
            let mut grow = |na: usize, nb: usize, e: (usize, usize)| {
                let mut v = es.clone();
                v.push(e);
                next.insert(canonical(na, nb, &v));
            };
            for a in 0..n_a {
                for b in 0..n_b {
                    if !has(a, b) {
                        grow(n_a, n_b, (a, b));
                    }
                }
            }
            for a in 0..n_a {
                grow(n_a, n_b + 1, (a, n_b));
            }
            for b in 0..n_b {
                grow(n_a + 1, n_b, (n_a, b));
            }
        }
        level = next;
    }
    Ok(out)
}

fn build(n_a: usize, n_b: usize, es: &[(usize, usize)]) -> BipartiteGraph {
    BipartiteGraph::new(n_a, n_b, es.iter().map(|&(a, b)| (a, n_a + b)))
        .expect("enumerated graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_examples() {
        let g = complete_bipartite(2, 3);
        assert_eq!(g.m(), 6);
        let mut d: Vec<usize> = g.vertices().map(|v| g.degree(v)).collect();
        d.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(d, vec![3, 3, 2, 2, 2]);
        assert_eq!(complete_bipartite(1, 1).m(), 1);
        let k = complete_bipartite(15, 15);
        assert_eq!((k.m(), k.min_degree()), (225, 15));
    }

    #[test]
    fn random_respects_floor() {
        let g = random_min_degree(20, 25, 15, 0.2, 1).unwrap();
        assert!(g.min_degree() >= 15);
        let g = random_min_degree(15, 15, 15, 0.0, 9).unwrap();
        assert_eq!(g.m(), 225);
        assert!(matches!(
            random_min_degree(10, 10, 15, 0.1, 0),
            Err(GenError::Infeasible { .. })
        ));
    }

    #[test]
    fn random_is_deterministic() {
        let a = random_min_degree(30, 17, 15, 0.1, 42).unwrap();
        let b = random_min_degree(30, 17, 15, 0.1, 42).unwrap();
        assert_eq!(a.edges(), b.edges());
        let c = random_min_degree(30, 17, 15, 0.1, 43).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn tiny_counts_per_edge_count() {
        let all = tiny_enumerate(5).unwrap();
        let per: Vec<usize> = (1..=5)
            .map(|k| all.iter().filter(|g| g.m() == k).count())
            .collect();
        // Trees plus C4 and C4 with a pendant edge.
        assert_eq!(per, vec![1, 1, 2, 4, 7]);
    }

    #[test]
    fn tiny_small_levels() {
        let one = tiny_enumerate(1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!((one[0].n(), one[0].m()), (2, 1));
        let two = tiny_enumerate(2).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two[1].n(), 3);
        let four = tiny_enumerate(4).unwrap();
        let c4 = four
            .iter()
            .any(|g| g.m() == 4 && g.n() == 4 && g.max_degree() == 2);
        let p5 = four
            .iter()
            .any(|g| g.m() == 4 && g.n() == 5 && g.max_degree() == 2);
        let k14 = four.iter().any(|g| g.m() == 4 && g.max_degree() == 4);
        assert!(c4 && p5 && k14);
        assert!(matches!(tiny_enumerate(8), Err(GenError::TooLarge(8))));
    }
}
