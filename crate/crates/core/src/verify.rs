//! Independent checks on a finished labeling.
//!
//! [`verify`] looks only at the graph and the labels. [`structural_report`]
//! additionally reads the decomposition plan to audit residues and pools.

use serde::Serialize;

use crate::decompose::DecompositionPlan;
use crate::graph::{BipartiteGraph, EdgeSubset, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub is_bijection: bool,
    pub sums_distinct: bool,
    pub antimagic: bool,
    /// Pairs of distinct vertices with equal sums, as `(u, v, sum)` with `u < v`.
    pub collisions: Vec<(VertexId, VertexId, u64)>,
    /// Vertex sum mod 3, indexed by vertex id.
    pub residue_report: Vec<u8>,
}

/// Checks that `labels` (indexed by edge id) is a bijection onto `[m]` with
/// pairwise distinct vertex sums.
pub fn verify(g: &BipartiteGraph, labels: &[u64]) -> Verdict {
    let m = g.m();
    let mut seen = vec![false; m + 1];
    let mut is_bijection = labels.len() == m;
    for &l in labels {
        let l = l as usize;
        if l == 0 || l > m || seen[l] {
            is_bijection = false;
            break;
        }
        seen[l] = true;
    }
    let mut sums = vec![0u64; g.n()];
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        let l = labels.get(e).copied().unwrap_or(0);
        sums[a] += l;
        sums[b] += l;
    }
    let mut by_sum: Vec<(u64, VertexId)> = sums.iter().copied().zip(0..).collect();
    by_sum.sort_unstable();
    let mut collisions = Vec::new();
    let mut i = 0;
    while i < by_sum.len() {
        let mut j = i + 1;
        while j < by_sum.len() && by_sum[j].0 == by_sum[i].0 {
            j += 1;
        }
        for p in i..j {
            for q in p + 1..j {
                collisions.push((by_sum[p].1, by_sum[q].1, by_sum[p].0));
            }
        }
        i = j;
    }
    let sums_distinct = collisions.is_empty();
    Verdict {
        is_bijection,
        sums_distinct,
        antimagic: is_bijection && sums_distinct,
        collisions,
        residue_report: sums.iter().map(|s| (s % 3) as u8).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructuralReport {
    /// Vertices of `X` whose sum is a multiple of 3.
    pub x_zero_residue: Vec<VertexId>,
    /// Vertices of `Y` whose sum is not a multiple of 3.
    pub y_nonzero_residue: Vec<VertexId>,
    /// Edge sets whose labels are not the expected residue class or range.
    pub pool_audit: Vec<String>,
}

impl StructuralReport {
    pub fn ok(&self) -> bool {
        self.x_zero_residue.is_empty()
            && self.y_nonzero_residue.len() <= 1
            && self.pool_audit.is_empty()
    }
}

/// Residue goals on both sides plus a check of which residue class and range
/// each edge set of the plan drew from.
pub fn structural_report(
    g: &BipartiteGraph,
    labels: &[u64],
    plan: &DecompositionPlan,
) -> StructuralReport {
    let mut sums = vec![0u64; g.n()];
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        sums[a] += labels[e];
        sums[b] += labels[e];
    }
    let x_zero_residue = plan
        .x
        .iter()
        .copied()
        .filter(|&v| sums[v] % 3 == 0)
        .collect();
    let y_nonzero_residue = plan
        .y
        .iter()
        .copied()
        .filter(|&v| sums[v] % 3 != 0)
        .collect();

    let m = g.m();
    let set = |v: &[usize]| EdgeSubset::from_ids(m, v.iter().copied());
    let e3 = set(&plan.e3);
    let e4 = set(&plan.e4);
    let rest_x: Vec<usize> = plan
        .gx
        .iter()
        .copied()
        .filter(|&e| !e3.contains(e))
        .collect();
    let g1_rest: Vec<usize> = plan
        .g1
        .iter()
        .copied()
        .filter(|&e| !e4.contains(e))
        .collect();
    let mut audit = Vec::new();
    let zero = |name: &str, edges: &[usize], audit: &mut Vec<String>| {
        if let Some(&e) = edges.iter().find(|&&e| labels[e] % 3 != 0) {
            audit.push(format!(
                "{name}: edge {e} has label {} not divisible by 3",
                labels[e]
            ));
        }
    };
    zero("M", &plan.matching, &mut audit);
    zero("E1", &plan.e1, &mut audit);
    zero("E2", &plan.e2, &mut audit);
    zero("G1 \\ E4", &g1_rest, &mut audit);
    zero("G[X] \\ E3", &rest_x, &mut audit);
    for (name, edges) in [("E3", &plan.e3), ("E4", &plan.e4)] {
        if let Some(&e) = edges.iter().find(|&&e| labels[e] % 3 == 0) {
            audit.push(format!("{name}: edge {e} has 0-label {}", labels[e]));
        }
    }
    // G[X] \ E3 holds the greatest multiples of 3; M ∪ E1 lie below G1 \ E4.
    let l0 = (m / 3) as u64;
    if let Some(&e) = rest_x
        .iter()
        .find(|&&e| labels[e] <= 3 * (l0 - rest_x.len() as u64))
    {
        audit.push(format!(
            "G[X] \\ E3: edge {e} label {} is not among the greatest 0-labels",
            labels[e]
        ));
    }
    let top_me = plan
        .matching
        .iter()
        .chain(&plan.e1)
        .map(|&e| labels[e])
        .max()
        .unwrap_or(0);
    if let Some(&e) = g1_rest.iter().find(|&&e| labels[e] <= top_me) {
        audit.push(format!(
            "G1 \\ E4: edge {e} label {} not above the M ∪ E1 labels",
            labels[e]
        ));
    }
    StructuralReport {
        x_zero_residue,
        y_nonzero_residue,
        pool_audit: audit,
    }
}
