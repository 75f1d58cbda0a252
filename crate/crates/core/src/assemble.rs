//! Turns a decomposition plan into a complete labeling.
//!
//! `[m]` is cut into pools by residue mod 3 (see [`LabelPartition`]). Edges
//! inside `X` and the pendant structure take the large nonzero labels, `E4`
//! takes the small nonzero ones in pairs with prescribed sums, and all X-Y
//! edges outside `G4` take multiples of 3. The matching is labeled last, in
//! the order of the partial sums on `X`, and a final window rotation on the
//! matching labels separates the one Y-side vertex that may carry a nonzero
//! residue.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::decompose::{Counts, DecompositionPlan};
use crate::graph::{
    connected_components, euler_tour, BipartiteGraph, EdgeId, EdgeSubset, GraphError, VertexId,
};
use crate::labeling::{Labeling, LabelingError};
use crate::mod3::{assign_residues, ensure_both_residues, LabelerError, Residue, ResiduePlan};
use crate::pairing::{pair_constant, pair_j, LabelPair, PairingError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssembleError {
    #[error("label pool exhausted while building {0}")]
    Pool(&'static str),
    #[error("label table: {0}")]
    Table(String),
    #[error(transparent)]
    Residue(#[from] LabelerError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Labeling(#[from] LabelingError),
    #[error("step {step}: {detail}")]
    Step { step: u8, detail: String },
}

fn step_err(step: u8, detail: impl Into<String>) -> AssembleError {
    AssembleError::Step {
        step,
        detail: detail.into(),
    }
}

/// The label pools. All sets are sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabelPartition {
    pub o1: Vec<u64>,
    pub o2: Vec<u64>,
    pub o3: Vec<u64>,
    pub o41: Vec<u64>,
    pub o42: Vec<u64>,
    pub j1: Vec<u64>,
    pub j2: Vec<u64>,
    pub j3: Vec<u64>,
    pub j4: Vec<u64>,
    pub j40: Vec<u64>,
    pub j41: Vec<LabelPair>,
    pub j42: Vec<LabelPair>,
    pub j43: Vec<LabelPair>,
    pub j44: Vec<LabelPair>,
    pub theta1: usize,
    pub theta2: usize,
    pub theta: usize,
    pub alpha: i64,
    pub p1: u64,
    pub p3: u64,
    pub p4: u64,
    /// `J2` split per star of `F2`, in labeling order.
    pub star_labels: Vec<Vec<u64>>,
    /// Residue counts of `J3`.
    pub rho3: (usize, usize),
}

struct Head {
    j1: Vec<u64>,
    star_labels: Vec<Vec<u64>>,
    ones: Vec<u64>,
    twos: Vec<u64>,
}

fn head(c: &Counts, star_sizes: &[usize]) -> Result<Head, AssembleError> {
    let mut ones: Vec<u64> = (1..=c.l[1] as u64).map(|i| 3 * i - 2).collect();
    let mut twos: Vec<u64> = (1..=c.l[2] as u64).map(|i| 3 * i - 1).collect();
    if c.eps1 % 2 == 1 {
        return Err(AssembleError::Table(format!("eps1 = {} is odd", c.eps1)));
    }
    let mut j1 = Vec::with_capacity(c.eps1);
    for _ in 0..c.eps1 / 2 {
        j1.push(ones.pop().ok_or(AssembleError::Pool("J1"))?);
        j1.push(twos.pop().ok_or(AssembleError::Pool("J1"))?);
    }
    j1.sort_unstable();
    let mut star_labels = Vec::with_capacity(star_sizes.len());
    for &size in star_sizes {
        let mu_is_one = match (ones.last(), twos.last()) {
            (Some(a), Some(b)) => a > b,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => return Err(AssembleError::Pool("J2")),
        };
        let (major, minor) = if size % 2 == 0 {
            (size / 2 + 1, size / 2 - 1)
        } else {
            (size.div_ceil(2), size / 2)
        };
        let (mu, other) = if mu_is_one {
            (&mut ones, &mut twos)
        } else {
            (&mut twos, &mut ones)
        };
        let mut labels = Vec::with_capacity(size);
        for _ in 0..major {
            labels.push(mu.pop().ok_or(AssembleError::Pool("J2"))?);
        }
        for _ in 0..minor {
            labels.push(other.pop().ok_or(AssembleError::Pool("J2"))?);
        }
        star_labels.push(labels);
    }
    Ok(Head {
        j1,
        star_labels,
        ones,
        twos,
    })
}

/// Numbers of 1-labels and 2-labels left for `G4` once `G3` and `F2` are served.
pub fn g4_label_counts(c: &Counts, star_sizes: &[usize]) -> Result<(usize, usize), AssembleError> {
    let h = head(c, star_sizes)?;
    Ok((h.ones.len(), h.twos.len()))
}

fn zero_labels(range: std::ops::RangeInclusive<usize>) -> Vec<u64> {
    range.map(|i| 3 * i as u64).collect()
}

/// The 0-labels for `E2` when `k = n_Y_even`: `3, 6, ..., 3k` for odd `k`;
/// for even `k` the top label `3k` is replaced by `9k/2`, which is what the
/// pair with sum `2p + 3` needs to reach the common total.
pub fn o2_labels(k: usize) -> Vec<u64> {
    if k % 2 == 1 {
        zero_labels(1..=k)
    } else if k == 0 {
        Vec::new()
    } else {
        let mut v = zero_labels(1..=k - 1);
        v.push(3 * (3 * k / 2) as u64);
        v
    }
}

/// Pairs a sorted run of labels from both ends; an odd run leaves its middle.
pub fn symmetric_pairs(labels: &[u64]) -> (Vec<(u64, u64)>, Option<u64>) {
    let n = labels.len();
    let pairs = (0..n / 2).map(|i| (labels[i], labels[n - 1 - i])).collect();
    (pairs, (n % 2 == 1).then(|| labels[n / 2]))
}

/// Builds every pool of the label table.
///
/// `star_sizes` lists the stars of `F2` in labeling order (even sizes first);
/// `rho3` is the number of 1- and 2-residues the residue plan puts on `F3`.
pub fn partition_labels(
    c: &Counts,
    star_sizes: &[usize],
    rho3: (usize, usize),
) -> Result<LabelPartition, AssembleError> {
    let Head {
        j1,
        star_labels,
        mut ones,
        mut twos,
    } = head(c, star_sizes)?;
    let mut j2: Vec<u64> = star_labels.iter().flatten().copied().collect();
    j2.sort_unstable();
    let mut j3 = Vec::with_capacity(rho3.0 + rho3.1);
    for _ in 0..rho3.0 {
        j3.push(ones.pop().ok_or(AssembleError::Pool("J3"))?);
    }
    for _ in 0..rho3.1 {
        j3.push(twos.pop().ok_or(AssembleError::Pool("J3"))?);
    }
    j3.sort_unstable();
    let (theta1, theta2) = (ones.len(), twos.len());
    let theta = theta1.min(theta2);
    let mut j4: Vec<u64> = ones.iter().chain(&twos).copied().collect();
    j4.sort_unstable();
    let j40: Vec<u64> = j4
        .iter()
        .copied()
        .filter(|&l| (l as usize).div_ceil(3) > theta)
        .collect();

    let table = |s: String| AssembleError::Table(s);
    let l0 = c.l[0];
    let (n_y, k, n_odd) = (c.n_y, c.n_y_even, c.n_y_odd);
    if c.m20 > l0 {
        return Err(table(format!(
            "m20 = {} exceeds the {l0} zero labels",
            c.m20
        )));
    }
    let top = l0 - c.m20;
    if n_y + k > top {
        return Err(table(format!(
            "n_Y + n_Y_even = {} exceeds l0 - m20 = {top}",
            n_y + k
        )));
    }
    let o1 = zero_labels(top + 1..=l0);
    let o2 = o2_labels(k);
    let o3 = zero_labels(n_y + k + 1..=top);
    let o4: Vec<u64> = zero_labels(1..=n_y + k)
        .into_iter()
        .filter(|l| !o2.contains(l))
        .collect();
    if n_y < c.n_x || o4.len() != n_y {
        return Err(table(format!(
            "O4 has {} labels for n_Y = {n_y}, n_X = {}",
            o4.len(),
            c.n_x
        )));
    }
    let o41 = o4[..n_y - c.n_x].to_vec();
    let o42 = o4[n_y - c.n_x..].to_vec();

    let alpha = k as i64 + top as i64 - theta as i64 + 1;
    let j41 = if n_odd > 0 {
        pair_constant(1, n_odd as u64)
    } else {
        Vec::new()
    };
    let j42 = if k > 0 {
        pair_j(3 * (n_odd as u64 + alpha.max(0) as u64), k)?
    } else {
        Vec::new()
    };
    let th = theta as i64;
    let j43 = match alpha {
        a if a > 0 => pair_constant(n_odd as u64 + 1, (n_odd as i64 + a) as u64),
        a if a < 0 => {
            if th + a < 0 {
                return Err(table(format!("alpha = {a} below -theta")));
            }
            pair_constant((th + a + 1) as u64, theta as u64)
        }
        _ => Vec::new(),
    };
    let (lo, hi) = if alpha >= 0 {
        (n_y as i64 + alpha + 1, th)
    } else {
        (n_y as i64 + 1, th + alpha)
    };
    if hi < lo - 1 || lo < 1 {
        return Err(table(format!("J44 index range [{lo}, {hi}] is negative")));
    }
    let j44 = if hi >= lo {
        pair_constant(lo as u64, hi as u64)
    } else {
        Vec::new()
    };
    let p1 = 3 * n_odd as u64;
    let p3 = if alpha >= 0 {
        6 * n_odd as i64 + 3 * alpha
    } else {
        6 * th + 3 * alpha
    };
    let p4 = 3 * (n_y as i64 + alpha + th);
    Ok(LabelPartition {
        o1,
        o2,
        o3,
        o41,
        o42,
        j1,
        j2,
        j3,
        j4,
        j40,
        j41,
        j42,
        j43,
        j44,
        theta1,
        theta2,
        theta,
        alpha,
        p1,
        p3: p3.max(0) as u64,
        p4: p4.max(0) as u64,
        star_labels,
        rho3,
    })
}

fn flatten(pairs: &[LabelPair]) -> Vec<u64> {
    pairs.iter().flat_map(|p| [p.lo, p.hi]).collect()
}

impl LabelPartition {
    /// Every size, union and closed-form relation of the label table that
    /// fails for these counts.
    pub fn violations(&self, c: &Counts) -> Vec<String> {
        let mut out = Vec::new();
        let mut need = |ok: bool, what: String| {
            if !ok {
                out.push(what);
            }
        };
        let m = c.m as u64;
        let mut zeros: Vec<u64> = [&self.o1, &self.o2, &self.o3, &self.o41, &self.o42]
            .into_iter()
            .flatten()
            .copied()
            .collect();
        zeros.sort_unstable();
        need(
            zeros == (1..=m / 3).map(|i| 3 * i).collect::<Vec<_>>(),
            "O pools partition the 0-labels".into(),
        );
        let mut nonzero: Vec<u64> = [&self.j1, &self.j2, &self.j3, &self.j4]
            .into_iter()
            .flatten()
            .copied()
            .collect();
        nonzero.sort_unstable();
        need(
            nonzero == (1..=m).filter(|l| l % 3 != 0).collect::<Vec<_>>(),
            "J pools partition the {1,2}-labels".into(),
        );

        let a = self.alpha.unsigned_abs() as usize;
        let sizes = [
            ("O1", self.o1.len(), c.m20),
            ("O2", self.o2.len(), c.n_y_even),
            ("O3", self.o3.len(), c.m10),
            ("O41", self.o41.len(), c.n_y.saturating_sub(c.n_x)),
            ("O42", self.o42.len(), c.n_x),
            ("J1", self.j1.len(), c.eps1),
            ("J2", self.j2.len(), c.k2),
            ("J3", self.j3.len(), c.k3),
            ("J4", self.j4.len(), c.m11),
            ("J40", self.j40.len(), self.theta1.abs_diff(self.theta2)),
            ("J41", 2 * self.j41.len(), 2 * c.n_y_odd),
            ("J42", 2 * self.j42.len(), 2 * c.n_y_even),
            ("J43", 2 * self.j43.len(), 2 * a),
            (
                "J44",
                2 * self.j44.len(),
                2 * self.theta.saturating_sub(c.n_y + a),
            ),
        ];
        for (name, got, want) in sizes {
            need(got == want, format!("|{name}| = {got}, table size {want}"));
        }
        need(
            self.theta == self.theta1.min(self.theta2),
            "theta = min(theta1, theta2)".into(),
        );
        need(
            self.theta1.abs_diff(self.theta2) <= 2,
            format!(
                "|theta1 - theta2| = {} > 2",
                self.theta1.abs_diff(self.theta2)
            ),
        );
        let theta_form = if self.theta1 == self.theta2 {
            c.m11 / 2
        } else {
            c.m11.saturating_sub(1) / 2
        };
        need(
            self.theta == theta_form,
            format!(
                "theta = {} but the closed form gives {theta_form}",
                self.theta
            ),
        );
        need(
            a < 2 * c.n_y,
            format!("|alpha / 2| = {}/2 not below n_Y = {}", a, c.n_y),
        );
        let alpha_form = c.n_y_even as i64 + c.l[0] as i64 - c.m20 as i64 - self.theta as i64 + 1;
        need(self.alpha == alpha_form, "alpha closed form".into());
        let expect_j4: Vec<u64> = {
            let mut v: Vec<u64> = (1..=self.theta1 as u64)
                .map(|i| 3 * i - 2)
                .chain((1..=self.theta2 as u64).map(|i| 3 * i - 1))
                .collect();
            v.sort_unstable();
            v
        };
        need(
            self.j4 == expect_j4,
            "J4 is the set of least {1,2}-labels".into(),
        );
        let mut parts: Vec<u64> = self.j40.clone();
        for p in [&self.j41, &self.j42, &self.j43, &self.j44] {
            parts.extend(flatten(p));
        }
        parts.sort_unstable();
        need(parts == self.j4, "J40..J44 partition J4".into());
        need(
            self.j41.iter().all(|p| p.sum() == self.p1),
            format!("J41 pair sums differ from p1 = {}", self.p1),
        );
        need(
            self.j43.iter().all(|p| p.sum() == self.p3),
            format!("J43 pair sums differ from p3 = {}", self.p3),
        );
        need(
            self.j44.iter().all(|p| p.sum() == self.p4),
            format!("J44 pair sums differ from p4 = {}", self.p4),
        );
        if let (Some(lo), Some(hi)) = (self.o3.first(), self.o3.last()) {
            need(
                lo + hi == self.p4,
                format!("O3 pairs sum to {} instead of p4 = {}", lo + hi, self.p4),
            );
        }
        let left1 = self.theta1 + self.rho3.0;
        let left2 = self.theta2 + self.rho3.1;
        need(
            left1.abs_diff(left2) <= 2,
            format!("G4 receives {left1} 1-labels and {left2} 2-labels"),
        );
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Step9Case {
    #[default]
    NotNeeded,
    Case1,
    Case2,
    Case31,
    Case32,
    /// None of the four rules separated the sums; a window rotation did.
    Fallback,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Step7Swap {
    /// Exchange of two equal-residue `E4` labels at a common Y-side vertex.
    OuterX { x: VertexId, e: EdgeId, f: EdgeId },
    /// Exchange of an `F2`/`F3` label at `x` with an `E4` label at `y'`.
    InnerX { x: VertexId, e: EdgeId, f: EdgeId },
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Trace {
    pub y_prime: Option<VertexId>,
    pub e40: Vec<EdgeId>,
    /// Partial sums on `Y \ Y0` right after the `G1 \ E4` labels.
    pub sigma1: Vec<(VertexId, u64)>,
    pub gap_ok: bool,
    pub o3_middle: Option<EdgeId>,
    pub step7: Option<Step7Swap>,
    pub step9: Step9Case,
    pub step9_mirrored: bool,
}

/// Equal or more than `3 n_Y` apart, for every pair.
pub fn gap_property(sums: &[u64], n_y: usize) -> bool {
    let mut s = sums.to_vec();
    s.sort_unstable();
    s.dedup();
    s.windows(2).all(|w| w[1] - w[0] > 3 * n_y as u64)
}

/// Applies one of the four matching rotations to `labels`, the matching
/// labels listed in the order of `X`. `aux` is `eta` for case 3.1 and `beta`
/// for case 3.2. Positions are 0-based.
pub fn rotate_matching(case: Step9Case, labels: &mut [u64], b: usize, xi: usize, aux: usize) {
    match case {
        Step9Case::Case1 => labels[b..=xi].rotate_left(1),
        Step9Case::Case2 => labels[b + 1..=xi].rotate_left(1),
        Step9Case::Case31 => labels[aux..=b].rotate_right(1),
        Step9Case::Case32 => labels[aux..=xi].rotate_left(1),
        Step9Case::NotNeeded | Step9Case::Fallback => {}
    }
}

/// Output of [`assemble`].
#[derive(Clone, Debug)]
pub struct Assembly {
    pub labeling: Labeling,
    pub partition: LabelPartition,
    pub residues: ResiduePlan,
    pub trace: Trace,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Base,
    Three,
    Four,
}

/// Step-by-step labeler; each `step*` method must run in order.
pub struct Assembler<'a> {
    g: &'a BipartiteGraph,
    plan: &'a DecompositionPlan,
    pub partition: LabelPartition,
    pub residues: ResiduePlan,
    pub trace: Trace,
    stars: Vec<Vec<EdgeId>>,
    labels: Vec<Option<u64>>,
    /// `E4,2` pair sum per vertex of `Y_even`.
    e42_sum: BTreeMap<VertexId, u64>,
    order: Vec<VertexId>,
}

impl<'a> Assembler<'a> {
    pub fn new(g: &'a BipartiteGraph, plan: &'a DecompositionPlan) -> Result<Self, AssembleError> {
        let m = g.m();
        let f2 = EdgeSubset::from_ids(m, plan.f2.iter().copied());
        let mut stars: Vec<Vec<EdgeId>> = connected_components(g, &f2)
            .components
            .into_iter()
            .map(|c| c.edges)
            .collect();
        stars.sort_by_key(|s| s.len() % 2);
        let sizes: Vec<usize> = stars.iter().map(Vec::len).collect();
        let (r1, r2) = g4_label_counts(&plan.counts, &sizes)?;
        let g4 = plan.g4_edges(m);
        let sides = plan.g4_sides(g);
        let residues = assign_residues(g, &g4, &sides, r1, r2)?;
        let residues = ensure_both_residues(g, &g4, &sides, &residues)?;
        let count = |r: Residue| {
            plan.f3
                .iter()
                .filter(|&&e| residues.residue(e) == Some(r))
                .count()
        };
        let rho3 = (count(Residue::One), count(Residue::Two));
        let partition = partition_labels(&plan.counts, &sizes, rho3)?;
        Ok(Self {
            g,
            plan,
            partition,
            residues,
            trace: Trace::default(),
            stars,
            labels: vec![None; m],
            e42_sum: BTreeMap::new(),
            order: Vec::new(),
        })
    }

    fn put(&mut self, e: EdgeId, label: u64, step: u8) -> Result<(), AssembleError> {
        if let Some(old) = self.labels[e] {
            return Err(step_err(step, format!("edge {e} already holds {old}")));
        }
        self.labels[e] = Some(label);
        Ok(())
    }

    fn put_pair(
        &mut self,
        one: EdgeId,
        two: EdgeId,
        p: LabelPair,
        step: u8,
    ) -> Result<(), AssembleError> {
        let (a, b) = if p.lo % 3 == 1 {
            (p.lo, p.hi)
        } else {
            (p.hi, p.lo)
        };
        if a % 3 != 1 || b % 3 != 2 {
            return Err(step_err(
                step,
                format!("pair {{{}, {}}} is not a 1/2 pair", p.lo, p.hi),
            ));
        }
        self.put(one, a, step)?;
        self.put(two, b, step)
    }

    /// Sum of the labels placed so far at `v`.
    pub fn partial_sum(&self, v: VertexId) -> u64 {
        self.g
            .incident(v)
            .iter()
            .filter_map(|&e| self.labels[e])
            .sum()
    }

    fn y_side(&self, e: EdgeId) -> VertexId {
        let (a, b) = self.g.endpoints(e);
        if self.plan.is_x(a) {
            b
        } else {
            a
        }
    }

    /// `G[X] \ E3` with the greatest 0-labels.
    pub fn step1(&mut self) -> Result<(), AssembleError> {
        let e3 = EdgeSubset::from_ids(self.g.m(), self.plan.e3.iter().copied());
        let edges: Vec<EdgeId> = self
            .plan
            .gx
            .iter()
            .copied()
            .filter(|&e| !e3.contains(e))
            .collect();
        if edges.len() != self.partition.o1.len() {
            return Err(step_err(
                1,
                format!(
                    "{} edges for {} labels",
                    edges.len(),
                    self.partition.o1.len()
                ),
            ));
        }
        let o1 = self.partition.o1.clone();
        for (e, l) in edges.into_iter().zip(o1) {
            self.put(e, l, 1)?;
        }
        Ok(())
    }

    /// Each component of `G3` alternates 1- and 2-labels along an Euler tour.
    pub fn step2(&mut self) -> Result<(), AssembleError> {
        let g3 = EdgeSubset::from_ids(self.g.m(), self.plan.g3.iter().copied());
        let mut ones: Vec<u64> = self
            .partition
            .j1
            .iter()
            .copied()
            .filter(|l| l % 3 == 1)
            .collect();
        let mut twos: Vec<u64> = self
            .partition
            .j1
            .iter()
            .copied()
            .filter(|l| l % 3 == 2)
            .collect();
        for c in connected_components(self.g, &g3).components {
            let tour = euler_tour(self.g, &c)?;
            if tour.len() % 2 == 1 {
                return Err(step_err(2, "odd closed tour"));
            }
            for (i, &e) in tour.edges.iter().enumerate() {
                let pool = if i % 2 == 0 { &mut ones } else { &mut twos };
                let l = pool.pop().ok_or(AssembleError::Pool("J1"))?;
                self.put(e, l, 2)?;
            }
        }
        if !ones.is_empty() || !twos.is_empty() {
            return Err(step_err(2, "J1 not used up"));
        }
        Ok(())
    }

    /// Stars of `F2` with the labels fixed per star in the partition.
    pub fn step3(&mut self) -> Result<(), AssembleError> {
        let stars = std::mem::take(&mut self.stars);
        for (star, labels) in stars.iter().zip(self.partition.star_labels.clone()) {
            for (&e, l) in star.iter().zip(labels) {
                self.put(e, l, 3)?;
            }
        }
        self.stars = stars;
        Ok(())
    }

    /// `F3` from `J3`, then `E4` split into `E4,0..E4,4` and labeled in pairs.
    pub fn step4(&mut self) -> Result<(), AssembleError> {
        let (g, plan) = (self.g, self.plan);
        let mut j3_ones: Vec<u64> = self
            .partition
            .j3
            .iter()
            .copied()
            .filter(|l| l % 3 == 1)
            .collect();
        let mut j3_twos: Vec<u64> = self
            .partition
            .j3
            .iter()
            .copied()
            .filter(|l| l % 3 == 2)
            .collect();
        let mut f3 = plan.f3.clone();
        f3.sort_unstable();
        for e in f3 {
            let pool = match self.residues.residue(e) {
                Some(Residue::One) => &mut j3_ones,
                Some(Residue::Two) => &mut j3_twos,
                None => return Err(step_err(4, format!("F3 edge {e} has no residue"))),
            };
            let l = pool.pop().ok_or(AssembleError::Pool("J3"))?;
            self.put(e, l, 4)?;
        }

        let (t1, t2) = (self.partition.theta1, self.partition.theta2);
        let unbalanced: Vec<VertexId> = plan
            .y
            .iter()
            .copied()
            .filter(|&y| self.residues.ones_at[y] != self.residues.twos_at[y])
            .collect();
        let y_prime = match (t1 == t2, unbalanced.as_slice()) {
            (true, []) => None,
            (false, [y]) => {
                let d = self.residues.ones_at[*y] as i64 - self.residues.twos_at[*y] as i64;
                if d != t1 as i64 - t2 as i64 {
                    return Err(step_err(
                        4,
                        format!("imbalance {d} at {y} against theta1 - theta2"),
                    ));
                }
                Some(*y)
            }
            _ => {
                return Err(step_err(
                    4,
                    format!("unbalanced Y-side vertices {unbalanced:?}"),
                ))
            }
        };
        self.trace.y_prime = y_prime;
        let e4 = EdgeSubset::from_ids(g.m(), plan.e4.iter().copied());
        let mut e40 = Vec::new();
        if let Some(y) = y_prime {
            let major = if t1 > t2 { Residue::One } else { Residue::Two };
            e40 = g
                .incident(y)
                .iter()
                .copied()
                .filter(|&e| e4.contains(e) && self.residues.residue(e) == Some(major))
                .take(t1.abs_diff(t2))
                .collect();
            for (&e, l) in e40.iter().zip(self.partition.j40.clone()) {
                self.put(e, l, 4)?;
            }
        }
        self.trace.e40 = e40.clone();

        let mut ys = plan.y.clone();
        ys.sort_by_key(|&y| (g.degree(y), y));
        let n_y = ys.len() as i64;
        let alpha = self.partition.alpha;
        let (fl, cl) = (alpha.div_euclid(2), -(-alpha).div_euclid(2));
        let in_e43 = |i: i64, half: i64| {
            if alpha >= 0 {
                i <= half
            } else {
                i > n_y + half
            }
        };
        let mut slots: Vec<(Slot, VertexId, EdgeId, EdgeId)> = Vec::new();
        for (idx, &y) in ys.iter().enumerate() {
            let i = idx as i64 + 1;
            let class = |r: Residue| -> Vec<EdgeId> {
                g.incident(y)
                    .iter()
                    .copied()
                    .filter(|&e| {
                        e4.contains(e) && !e40.contains(&e) && self.residues.residue(e) == Some(r)
                    })
                    .collect()
            };
            let (ones, twos) = (class(Residue::One), class(Residue::Two));
            if ones.len() != twos.len() || ones.len() < 3 {
                return Err(step_err(
                    4,
                    format!(
                        "vertex {y} has {} and {} residues in E4",
                        ones.len(),
                        twos.len()
                    ),
                ));
            }
            for (j, (&a, &b)) in ones.iter().zip(&twos).enumerate() {
                let slot = match j {
                    0 => Slot::Base,
                    1 if in_e43(i, fl) => Slot::Three,
                    2 if in_e43(i, cl) => Slot::Three,
                    _ => Slot::Four,
                };
                slots.push((slot, y, a, b));
            }
        }

        let (mut c41, mut c42, mut c43, mut c44) = (0, 0, 0, 0);
        let part = self.partition.clone();
        for (slot, y, a, b) in slots {
            let (pool, cur, name) = match slot {
                Slot::Base if g.degree(y) % 2 == 1 => (&part.j41, &mut c41, "J41"),
                Slot::Base => (&part.j42, &mut c42, "J42"),
                Slot::Three => (&part.j43, &mut c43, "J43"),
                Slot::Four => (&part.j44, &mut c44, "J44"),
            };
            let p = *pool.get(*cur).ok_or(AssembleError::Pool(name))?;
            *cur += 1;
            if slot == Slot::Base && g.degree(y) % 2 == 0 {
                self.e42_sum.insert(y, p.sum());
            }
            self.put_pair(a, b, p, 4)?;
        }
        let used = [
            (c41, part.j41.len()),
            (c42, part.j42.len()),
            (c43, part.j43.len()),
            (c44, part.j44.len()),
        ];
        if used.iter().any(|(a, b)| a != b) {
            return Err(step_err(4, format!("pair pools not used up: {used:?}")));
        }
        Ok(())
    }

    /// `E2` from `O2`, so that `E4,2 ∪ E2` gives one common sum on `Y_even`.
    pub fn step5(&mut self) -> Result<(), AssembleError> {
        let mut at: BTreeMap<VertexId, EdgeId> = BTreeMap::new();
        for &e in &self.plan.e2 {
            at.insert(self.y_side(e), e);
        }
        let mut ys: Vec<(u64, VertexId)> = self.e42_sum.iter().map(|(&y, &s)| (s, y)).collect();
        ys.sort_unstable();
        if ys.len() != at.len() || ys.len() != self.partition.o2.len() {
            return Err(step_err(5, "Y_even, E2 and O2 sizes differ"));
        }
        let o2: Vec<u64> = self.partition.o2.iter().rev().copied().collect();
        let mut totals = Vec::new();
        for ((s, y), l) in ys.into_iter().zip(o2) {
            let e = *at
                .get(&y)
                .ok_or_else(|| step_err(5, format!("no E2 edge at {y}")))?;
            self.put(e, l, 5)?;
            totals.push(s + l);
        }
        totals.dedup();
        if totals.len() > 1 {
            return Err(step_err(
                5,
                format!("E4,2 ∪ E2 sums are not constant: {totals:?}"),
            ));
        }
        Ok(())
    }

    /// `G1 \ E4` from `O3`, symmetric pairs at each Y-side vertex.
    pub fn step6(&mut self) -> Result<(), AssembleError> {
        let e4 = EdgeSubset::from_ids(self.g.m(), self.plan.e4.iter().copied());
        let mut at: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
        for &e in self.plan.g1.iter().filter(|&&e| !e4.contains(e)) {
            at.entry(self.y_side(e)).or_default().push(e);
        }
        let (pairs, mut middle) = symmetric_pairs(&self.partition.o3);
        let mut pairs = pairs.into_iter();
        for (y, mut edges) in at {
            edges.sort_unstable();
            let mut rest = edges.as_slice();
            if edges.len() % 2 == 1 {
                if Some(y) != self.trace.y_prime {
                    return Err(step_err(6, format!("odd leftover degree at {y}")));
                }
                let l = middle
                    .take()
                    .ok_or_else(|| step_err(6, "O3 has no middle label"))?;
                self.put(edges[0], l, 6)?;
                self.trace.o3_middle = Some(edges[0]);
                rest = &edges[1..];
            }
            for w in rest.chunks(2) {
                let (a, b) = pairs.next().ok_or(AssembleError::Pool("O3"))?;
                self.put(w[0], a, 6)?;
                self.put(w[1], b, 6)?;
            }
        }
        if pairs.next().is_some() || middle.is_some() {
            return Err(step_err(6, "O3 not used up"));
        }
        let sigma1: Vec<(VertexId, u64)> = self
            .plan
            .y
            .iter()
            .filter(|&&y| Some(y) != self.trace.y_prime)
            .map(|&y| (y, self.partial_sum(y)))
            .collect();
        let sums: Vec<u64> = sigma1.iter().map(|p| p.1).collect();
        self.trace.gap_ok = gap_property(&sums, self.plan.y.len());
        self.trace.sigma1 = sigma1;
        if !self.trace.gap_ok {
            return Err(step_err(6, "Y-side partial sums closer than 3 n_Y"));
        }
        Ok(())
    }

    /// `E1` from `O41`, then separates `y'` from its matching partner if needed.
    pub fn step7(&mut self) -> Result<(), AssembleError> {
        let mut e1 = self.plan.e1.clone();
        e1.sort_unstable();
        for (e, l) in e1.into_iter().zip(self.partition.o41.clone()) {
            self.put(e, l, 7)?;
        }
        let Some(y) = self.trace.y_prime else {
            return Ok(());
        };
        let Some(me) = self.plan.mate_edge(y) else {
            return Ok(());
        };
        let x = self.g.other(me, y);
        if self.partial_sum(x) != self.partial_sum(y) {
            return Ok(());
        }
        self.separate(y, x)
    }

    /// The exchange that moves the partial sum of `x` away from that of `y'`.
    /// Public so that it can be exercised without an actual tie.
    pub fn separate(&mut self, y: VertexId, x: VertexId) -> Result<(), AssembleError> {
        let (g, plan) = (self.g, self.plan);
        let e4 = EdgeSubset::from_ids(g.m(), plan.e4.iter().copied());
        let inner = plan.i2.contains(&x);
        let class = |l: Option<u64>| l.map(|l| l % 3);
        let before = (self.partial_sum(x), self.partial_sum(y));
        let mut candidates: Vec<(EdgeId, EdgeId)> = Vec::new();
        if !inner {
            for &e in g.incident(x).iter().filter(|&&e| e4.contains(e)) {
                let w = g.other(e, x);
                for &f in g.incident(w).iter().filter(|&&f| f != e && e4.contains(f)) {
                    if class(self.labels[f]) == class(self.labels[e])
                        && !self.trace.e40.contains(&f)
                    {
                        candidates.push((e, f));
                    }
                }
            }
        } else {
            let f23: Vec<EdgeId> = plan.f2.iter().chain(&plan.f3).copied().collect();
            for &e in g.incident(x).iter().filter(|e| f23.contains(e)) {
                let x2 = g.other(e, x);
                for &f in g.incident(y).iter().filter(|&&f| e4.contains(f)) {
                    let x3 = g.other(f, y);
                    if x3 != x && x3 != x2 && class(self.labels[f]) == class(self.labels[e]) {
                        candidates.push((e, f));
                    }
                }
            }
        }
        for (e, f) in candidates {
            self.labels.swap(e, f);
            let after = (self.partial_sum(x), self.partial_sum(y));
            if after.0 != after.1 && after.0 != before.0 {
                self.trace.step7 = Some(if inner {
                    Step7Swap::InnerX { x, e, f }
                } else {
                    Step7Swap::OuterX { x, e, f }
                });
                return Ok(());
            }
            self.labels.swap(e, f);
        }
        Err(step_err(7, format!("no exchange separates {x} from {y}")))
    }

    /// The matching in the order of the partial sums on `X`.
    pub fn step8(&mut self) -> Result<(), AssembleError> {
        let mut order: Vec<(u64, VertexId)> = self
            .plan
            .x
            .iter()
            .map(|&x| (self.partial_sum(x), x))
            .collect();
        order.sort_unstable();
        self.order = order.into_iter().map(|p| p.1).collect();
        for (i, x) in self.order.clone().into_iter().enumerate() {
            let e = self
                .plan
                .mate_edge(x)
                .ok_or_else(|| step_err(8, format!("{x} is unmatched")))?;
            let l = self.partition.o42[i];
            self.put(e, l, 8)?;
        }
        Ok(())
    }

    /// Rotates matching labels when `y'` collides with a vertex of `X`.
    pub fn step9(&mut self) -> Result<Labeling, AssembleError> {
        let (g, plan) = (self.g, self.plan);
        let lab = Labeling::from_partial(g, &self.labels)?;
        let Some(y) = self.trace.y_prime else {
            return Ok(lab);
        };
        let n = self.order.len();
        let Some(b) = self.order.iter().position(|&x| lab.sum(x) == lab.sum(y)) else {
            return Ok(lab);
        };
        let mu = lab.sum(self.order[b]) % 3;
        let other: Vec<usize> = (0..n)
            .filter(|&i| lab.sum(self.order[i]) % 3 == 3 - mu)
            .collect();
        if other.is_empty() {
            return Err(step_err(9, "no vertex of X carries the other residue"));
        }
        let mates: Vec<EdgeId> = self
            .order
            .iter()
            .map(|&x| plan.mate_edge(x).expect("X is saturated"))
            .collect();
        let mate_pos = plan
            .mate_edge(y)
            .and_then(|e| mates.iter().position(|&f| f == e));
        let base: Vec<u64> = mates.iter().map(|&e| lab.label(e)).collect();

        let nearest = |side_right: bool| -> Option<usize> {
            other
                .iter()
                .copied()
                .filter(|&i| (i > b) == side_right)
                .min_by_key(|&i| i.abs_diff(b))
        };
        let mut tries: Vec<usize> = Vec::new();
        let (r, l) = (nearest(true), nearest(false));
        match (r, l) {
            (Some(r), Some(l)) if l.abs_diff(b) < r.abs_diff(b) => tries.extend([l, r]),
            _ => tries.extend(r.into_iter().chain(l)),
        }

        let apply = |lab: &mut Labeling, labels: &[u64]| {
            for (&e, &l) in mates.iter().zip(labels) {
                lab.set(g, e, l);
            }
        };
        for xi in tries {
            let mirrored = xi < b;
            let view = |i: usize| if mirrored { n - 1 - i } else { i };
            let (bv, xv) = (view(b), view(xi));
            let lam = mate_pos.map(view);
            let sums_v: Vec<u64> = (0..n).map(|i| lab.sum(self.order[view(i)])).collect();
            let (case, aux) = match lam {
                Some(l) if l > bv && l < xv => (Step9Case::Case2, 0),
                Some(l) if l == xv => match (0..bv).rev().find(|&i| sums_v[i] % 3 == 3 - mu) {
                    Some(eta) => (Step9Case::Case31, eta),
                    None => {
                        let s2y = lab.sum(y) - mate_pos.map_or(0, |p| base[p]);
                        let s2 = |i: usize| sums_v[i] - base[view(i)];
                        let beta = (0..=bv).find(|&i| s2y <= s2(i)).unwrap_or(bv);
                        (Step9Case::Case32, beta)
                    }
                },
                _ => (Step9Case::Case1, 0),
            };
            let mut v: Vec<u64> = (0..n).map(|i| base[view(i)]).collect();
            rotate_matching(case, &mut v, bv, xv, aux);
            let new: Vec<u64> = (0..n).map(|i| v[view(i)]).collect();
            let mut cand = lab.clone();
            apply(&mut cand, &new);
            if cand.sums_distinct() {
                self.trace.step9 = case;
                self.trace.step9_mirrored = mirrored;
                return Ok(cand);
            }
        }
        for width in 2..=n {
            for start in 0..=n - width {
                for left in [true, false] {
                    let mut v = base.clone();
                    if left {
                        v[start..start + width].rotate_left(1);
                    } else {
                        v[start..start + width].rotate_right(1);
                    }
                    let mut cand = lab.clone();
                    apply(&mut cand, &v);
                    if cand.sums_distinct() {
                        self.trace.step9 = Step9Case::Fallback;
                        return Ok(cand);
                    }
                }
            }
        }
        Err(step_err(
            9,
            format!("no rotation separates {y} from X (sum {})", lab.sum(y)),
        ))
    }

    pub fn run(mut self) -> Result<Assembly, AssembleError> {
        self.step1()?;
        self.step2()?;
        self.step3()?;
        self.step4()?;
        self.step5()?;
        self.step6()?;
        self.step7()?;
        self.step8()?;
        let labeling = self.step9()?;
        Ok(Assembly {
            labeling,
            partition: self.partition,
            residues: self.residues,
            trace: self.trace,
        })
    }
}

/// Runs all labeling steps on a plan.
pub fn assemble(g: &BipartiteGraph, plan: &DecompositionPlan) -> Result<Assembly, AssembleError> {
    Assembler::new(g, plan)?.run()
}
