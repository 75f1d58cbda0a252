//! Edge labelings and their vertex sums.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{BipartiteGraph, EdgeId, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabelingError {
    #[error("{labels} labels for {edges} edges")]
    Length { labels: usize, edges: usize },
    #[error("edge {0} is unlabeled")]
    Unlabeled(EdgeId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Labeling {
    /// Indexed by edge id.
    pub label_of_edge: Vec<u64>,
    /// Indexed by vertex id; always consistent with `label_of_edge`.
    pub vertex_sums: Vec<u64>,
}

impl Labeling {
    pub fn new(g: &BipartiteGraph, labels: Vec<u64>) -> Result<Self, LabelingError> {
        if labels.len() != g.m() {
            return Err(LabelingError::Length {
                labels: labels.len(),
                edges: g.m(),
            });
        }
        let vertex_sums = sums(g, &labels);
        Ok(Self {
            label_of_edge: labels,
            vertex_sums,
        })
    }

    /// Builds a labeling from a partial assignment that must cover every edge.
    pub fn from_partial(g: &BipartiteGraph, labels: &[Option<u64>]) -> Result<Self, LabelingError> {
        if labels.len() != g.m() {
            return Err(LabelingError::Length {
                labels: labels.len(),
                edges: g.m(),
            });
        }
        let full = labels
            .iter()
            .enumerate()
            .map(|(e, l)| l.ok_or(LabelingError::Unlabeled(e)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(g, full)
    }

    pub fn label(&self, e: EdgeId) -> u64 {
        self.label_of_edge[e]
    }

    pub fn sum(&self, v: VertexId) -> u64 {
        self.vertex_sums[v]
    }

    /// Replaces the label of `e`, keeping the sums in step.
    pub fn set(&mut self, g: &BipartiteGraph, e: EdgeId, label: u64) {
        let old = self.label_of_edge[e];
        let (a, b) = g.endpoints(e);
        for v in [a, b] {
            self.vertex_sums[v] = self.vertex_sums[v] - old + label;
        }
        self.label_of_edge[e] = label;
    }

    pub fn swap(&mut self, g: &BipartiteGraph, e: EdgeId, f: EdgeId) {
        let (le, lf) = (self.label_of_edge[e], self.label_of_edge[f]);
        self.set(g, e, lf);
        self.set(g, f, le);
    }

    /// True when all vertex sums are pairwise distinct.
    pub fn sums_distinct(&self) -> bool {
        let mut s = self.vertex_sums.clone();
        s.sort_unstable();
        s.windows(2).all(|w| w[0] != w[1])
    }
}

fn sums(g: &BipartiteGraph, labels: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; g.n()];
    for (e, &l) in labels.iter().enumerate() {
        let (a, b) = g.endpoints(e);
        out[a] += l;
        out[b] += l;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> BipartiteGraph {
        BipartiteGraph::new(1, 2, [(0, 1), (0, 2)]).unwrap()
    }

    #[test]
    fn sums_follow_labels() {
        let g = path3();
        let mut lab = Labeling::new(&g, vec![1, 2]).unwrap();
        assert_eq!(lab.vertex_sums, vec![3, 1, 2]);
        lab.swap(&g, 0, 1);
        assert_eq!(lab.vertex_sums, vec![3, 2, 1]);
        lab.set(&g, 0, 5);
        assert_eq!(lab.vertex_sums, vec![6, 5, 1]);
    }

    #[test]
    fn rejects_wrong_length_and_gaps() {
        let g = path3();
        assert_eq!(
            Labeling::new(&g, vec![1]),
            Err(LabelingError::Length {
                labels: 1,
                edges: 2
            })
        );
        assert_eq!(
            Labeling::from_partial(&g, &[Some(1), None]),
            Err(LabelingError::Unlabeled(1))
        );
    }
}
