//! Exhaustive search for antimagic labelings of very small graphs.

use thiserror::Error;

use crate::graph::{BipartiteGraph, EdgeId};

pub const DEFAULT_CAP: usize = 9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{m} edges exceed the search cap of {cap}")]
    TooLarge { m: usize, cap: usize },
}

struct Search<'a> {
    g: &'a BipartiteGraph,
    order: Vec<EdgeId>,
    /// Vertices whose last edge in `order` sits at each position.
    done_at: Vec<Vec<usize>>,
    sums: Vec<u64>,
    used: Vec<bool>,
    labels: Vec<u64>,
    closed: Vec<u64>,
}

impl Search<'_> {
    fn run(&mut self, k: usize) -> bool {
        if k == self.order.len() {
            return true;
        }
        let e = self.order[k];
        let (a, b) = self.g.endpoints(e);
        let m = self.order.len();
        for l in 1..=m {
            if self.used[l] {
                continue;
            }
            self.used[l] = true;
            self.labels[e] = l as u64;
            self.sums[a] += l as u64;
            self.sums[b] += l as u64;
            let mark = self.closed.len();
            let mut ok = true;
            for &v in &self.done_at[k] {
                let s = self.sums[v];
                if self.closed.contains(&s) {
                    ok = false;
                    break;
                }
                self.closed.push(s);
            }
            if ok && self.run(k + 1) {
                return true;
            }
            self.closed.truncate(mark);
            self.sums[a] -= l as u64;
            self.sums[b] -= l as u64;
            self.used[l] = false;
        }
        false
    }
}

/// An antimagic labeling of `g` if one exists, searching with at most `cap` edges.
pub fn antimagic_witness_with_cap(
    g: &BipartiteGraph,
    cap: usize,
) -> Result<Option<Vec<u64>>, OracleError> {
    let m = g.m();
    if m > cap {
        return Err(OracleError::TooLarge { m, cap });
    }
    let mut order: Vec<EdgeId> = (0..m).collect();
    order.sort_by_key(|&e| {
        let (a, b) = g.endpoints(e);
        std::cmp::Reverse(g.degree(a) + g.degree(b))
    });
    let mut last = vec![None; g.n()];
    for (k, &e) in order.iter().enumerate() {
        let (a, b) = g.endpoints(e);
        last[a] = Some(k);
        last[b] = Some(k);
    }
    let mut done_at = vec![Vec::new(); m];
    let mut closed = Vec::new();
    for (v, k) in last.iter().enumerate() {
        match k {
            Some(k) => done_at[*k].push(v),
            None => closed.push(0),
        }
    }
    closed.sort_unstable();
    if closed.windows(2).any(|w| w[0] == w[1]) {
        return Ok(None);
    }
    let mut s = Search {
        g,
        order,
        done_at,
        sums: vec![0; g.n()],
        used: vec![false; m + 1],
        labels: vec![0; m],
        closed,
    };
    Ok(s.run(0).then_some(s.labels))
}

pub fn antimagic_witness(g: &BipartiteGraph) -> Result<Option<Vec<u64>>, OracleError> {
    antimagic_witness_with_cap(g, DEFAULT_CAP)
}

/// Whether some bijection onto `[m]` gives pairwise distinct vertex sums.
pub fn brute_force_is_antimagic(g: &BipartiteGraph) -> Result<bool, OracleError> {
    Ok(antimagic_witness(g)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::complete_bipartite;
    use crate::verify::verify;

    #[test]
    fn small_cases() {
        assert!(!brute_force_is_antimagic(&complete_bipartite(1, 1)).unwrap());
        assert!(brute_force_is_antimagic(&complete_bipartite(1, 2)).unwrap());
        assert!(brute_force_is_antimagic(&complete_bipartite(2, 2)).unwrap());
        assert!(brute_force_is_antimagic(&complete_bipartite(1, 3)).unwrap());
    }

    #[test]
    fn witness_is_accepted() {
        for (a, b) in [(1, 2), (2, 2), (1, 3), (2, 3), (3, 3)] {
            let g = complete_bipartite(a, b);
            let w = antimagic_witness(&g).unwrap().unwrap();
            assert!(verify(&g, &w).antimagic);
        }
    }

    #[test]
    fn cap_enforced() {
        let g = complete_bipartite(2, 5);
        assert_eq!(
            brute_force_is_antimagic(&g),
            Err(OracleError::TooLarge { m: 10, cap: 9 })
        );
        assert!(antimagic_witness_with_cap(&g, 10).unwrap().is_some());
    }

    #[test]
    fn isolated_pair_is_never_antimagic() {
        let g = BipartiteGraph::new(2, 1, [(0, 2)]).unwrap();
        // a1 is isolated with sum 0; a0 and b0 share the single label.
        assert!(!brute_force_is_antimagic(&g).unwrap());
        let h = BipartiteGraph::new(1, 0, []).unwrap();
        assert!(brute_force_is_antimagic(&h).unwrap());
        let two = BipartiteGraph::new(1, 1, []).unwrap();
        assert!(!brute_force_is_antimagic(&two).unwrap());
    }
}
