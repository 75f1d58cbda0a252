//! Acceptance criteria, one test per criterion. Each test writes a single
//! `criterion N: PASS|FAIL` line to stderr (outside the test harness capture)
//! and then asserts.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use antimagic::generators::{complete_bipartite, layered, random_min_degree, tiny_enumerate};
use antimagic::graph::{BipartiteGraph, EdgeSubset};
use antimagic::mod3::{assign_residues, ensure_both_residues, Residue, ResiduePlan};
use antimagic::oracle::brute_force_is_antimagic;
use antimagic::pairing::{pair_j, pair_j_prime, LabelPair};
use antimagic::pipeline::{label_graph, Options, Outcome};
use antimagic::trails::{
    good_open_trail_decomposition, splice_for_xy, Bipartition, TrailDecomposition, TrailKind,
};
use antimagic::verify::{structural_report, verify};

const CORPUS_RANDOM: u64 = 200;
const CORPUS_LAYERED: u64 = 120;
const MEDIAN_LIMIT: Duration = Duration::from_secs(1);
const MAX_LIMIT: Duration = Duration::from_secs(10);
const TRAIL_INSTANCES: u64 = 100;
const SPLICE_INSTANCES: u64 = 50;
const RESIDUE_INSTANCES: u64 = 100;
const TINY_EDGES: usize = 6;

fn report(n: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n}: {verdict} ({detail})");
    assert!(pass, "criterion {n} failed: {detail}");
}

fn named() -> Vec<(&'static str, BipartiteGraph)> {
    vec![
        ("K15,15", complete_bipartite(15, 15)),
        ("K15,16", complete_bipartite(15, 16)),
        ("K16,16", complete_bipartite(16, 16)),
        ("K15,31", complete_bipartite(15, 31)),
    ]
}

/// Sides drawn uniformly from [15, 40], density cycling through 0, 0.1, 0.3.
fn random_corpus() -> Vec<BipartiteGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..CORPUS_RANDOM)
        .map(|i| {
            let (a, b) = (rng.gen_range(15..=40), rng.gen_range(15..=40));
            random_min_degree(a, b, 15, [0.0, 0.1, 0.3][(i % 3) as usize], i).unwrap()
        })
        .collect()
}

/// Graphs whose cover side has inner edges, pendant partners and isolated parts.
fn layered_corpus() -> Vec<BipartiteGraph> {
    (0..CORPUS_LAYERED)
        .map(|i| {
            let j = i as usize;
            let h = j % 5;
            let a1 = 15 + h + (j * 7) % 10;
            let b2 = 15 + h + (j * 3) % 10;
            let a2 = b2 + 2 + j % 9;
            let b1 = a1 + 1 + j % 7;
            let p_inner = [0.05, 0.3, 0.9][j % 3];
            let p_cross = [0.05, 0.2, 0.5, 0.8][j % 4];
            layered(a1, a2, b1, b2, h, 15, p_inner, p_cross, i).unwrap()
        })
        .collect()
}

struct Labeled {
    g: BipartiteGraph,
    outcome: Option<Outcome>,
}

fn full_corpus() -> &'static [Labeled] {
    static CORPUS: OnceLock<Vec<Labeled>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        named()
            .into_iter()
            .map(|p| p.1)
            .chain(random_corpus())
            .chain(layered_corpus())
            .map(|g| {
                let outcome = label_graph(&g, Options::default()).ok();
                Labeled { g, outcome }
            })
            .collect()
    })
}

#[test]
fn criterion_01_end_to_end_corpus() {
    let graphs = random_corpus();
    let mut times = Vec::new();
    let mut failures = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        let t = Instant::now();
        let ok = label_graph(g, Options::default()).is_ok_and(|o| verify(g, o.labels()).antimagic);
        times.push(t.elapsed());
        if !ok {
            failures.push(i);
        }
    }
    times.sort();
    let (median, max) = (times[times.len() / 2], *times.last().unwrap());
    let pass = failures.is_empty() && median < MEDIAN_LIMIT && max < MAX_LIMIT;
    report(
        1,
        pass,
        &format!(
            "{} of {} antimagic, median {median:?}, max {max:?}",
            graphs.len() - failures.len(),
            graphs.len()
        ),
    );
}

#[test]
fn criterion_02_named_instances() {
    let mut bad = Vec::new();
    for (name, g) in named() {
        let o = label_graph(&g, Options::default()).unwrap();
        let v = verify(&g, o.labels());
        let rep = structural_report(&g, o.labels(), &o.plan);
        if !v.antimagic
            || !rep.x_zero_residue.is_empty()
            || rep.y_nonzero_residue.len() > 1
            || !rep.pool_audit.is_empty()
        {
            bad.push(format!("{name}: {rep:?}"));
        }
    }
    report(
        2,
        bad.is_empty(),
        &format!("4 named instances, problems: {bad:?}"),
    );
}

/// Components as lists of edges, by union-find over the edges of `s`.
fn components(g: &BipartiteGraph, s: &EdgeSubset) -> Vec<Vec<usize>> {
    fn find(p: &mut [usize], v: usize) -> usize {
        let mut r = v;
        while p[r] != r {
            r = p[r];
        }
        p[v] = r;
        r
    }
    let mut parent: Vec<usize> = (0..g.n()).collect();
    for e in s.iter() {
        let (a, b) = g.endpoints(e);
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in s.iter() {
        let r = find(&mut parent, g.endpoints(e).0);
        by_root.entry(r).or_default().push(e);
    }
    by_root.into_values().collect()
}

fn degrees(g: &BipartiteGraph, edges: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut d = vec![0; g.n()];
    for e in edges {
        let (a, b) = g.endpoints(e);
        d[a] += 1;
        d[b] += 1;
    }
    d
}

/// Drops every component whose degrees are all even.
fn strip_eulerian(g: &BipartiteGraph, s: &EdgeSubset) -> EdgeSubset {
    let deg = degrees(g, s.iter());
    let keep = components(g, s).into_iter().filter(|c| {
        c.iter().any(|&e| {
            let (a, b) = g.endpoints(e);
            deg[a] % 2 == 1 || deg[b] % 2 == 1
        })
    });
    EdgeSubset::from_ids(g.m(), keep.flatten())
}

fn random_graph(rng: &mut ChaCha8Rng, max_side: usize) -> BipartiteGraph {
    let (a, b) = (rng.gen_range(2..=max_side), rng.gen_range(2..=max_side));
    let p: f64 = rng.gen_range(0.2..0.8);
    let edges: Vec<(usize, usize)> = (0..a)
        .flat_map(|u| (a..a + b).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    BipartiteGraph::new(a, b, edges).unwrap()
}

/// Checks `d` is exactly |V_odd|/2 open trails partitioning `s`; returns a problem, if any.
fn trail_problem(g: &BipartiteGraph, s: &EdgeSubset, d: &TrailDecomposition) -> Option<String> {
    let deg = degrees(g, s.iter());
    let odd = deg.iter().filter(|&&x| x % 2 == 1).count();
    if 2 * d.trails.len() != odd {
        return Some(format!("{} trails for {odd} odd vertices", d.trails.len()));
    }
    let mut used = vec![false; g.m()];
    for t in &d.trails {
        let (vs, es) = (t.walk.vertices.as_slice(), t.walk.edges.as_slice());
        if es.is_empty() || vs.len() != es.len() + 1 || vs[0] == vs[vs.len() - 1] {
            return Some("trail is not open".into());
        }
        for (i, &e) in es.iter().enumerate() {
            let (a, b) = g.endpoints(e);
            if !((a, b) == (vs[i], vs[i + 1]) || (b, a) == (vs[i], vs[i + 1]))
                || !s.contains(e)
                || used[e]
            {
                return Some(format!("edge {e} misplaced"));
            }
            used[e] = true;
        }
    }
    if used.iter().filter(|&&u| u).count() != s.len() {
        return Some("edges not covered".into());
    }
    None
}

#[test]
fn criterion_03_good_decompositions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut done = 0;
    let mut bad = Vec::new();
    while done < TRAIL_INSTANCES {
        let g = random_graph(&mut rng, 12);
        let keep: Vec<usize> = (0..g.m()).filter(|_| rng.gen_bool(0.7)).collect();
        let s = strip_eulerian(&g, &EdgeSubset::from_ids(g.m(), keep));
        if s.is_empty() {
            continue;
        }
        done += 1;
        let sides = Bipartition::by_host_sides(&g);
        match good_open_trail_decomposition(&g, &s, &sides) {
            Ok(d) => bad.extend(trail_problem(&g, &s, &d)),
            Err(e) => bad.push(e.to_string()),
        }
    }
    report(
        3,
        bad.is_empty(),
        &format!("{done} subgraphs, problems: {bad:?}"),
    );
}

/// A connected graph with odd-degree vertices on both sides.
fn mixed_component(rng: &mut ChaCha8Rng) -> BipartiteGraph {
    loop {
        let (a, b) = (rng.gen_range(2..=9), rng.gen_range(2..=9));
        let mut edges = Vec::new();
        // Random spanning tree, then extra edges.
        let mut order: Vec<usize> = (0..a + b).collect();
        order.shuffle(rng);
        let mut placed = vec![order[0]];
        for &v in &order[1..] {
            let others: Vec<usize> = placed
                .iter()
                .copied()
                .filter(|&u| (u < a) != (v < a))
                .collect();
            if let Some(&u) = others.choose(rng) {
                edges.push((u.min(v), u.max(v)));
                placed.push(v);
            }
        }
        if placed.len() != a + b {
            continue;
        }
        for u in 0..a {
            for v in a..a + b {
                if !edges.contains(&(u, v)) && rng.gen_bool(0.3) {
                    edges.push((u, v));
                }
            }
        }
        let g = BipartiteGraph::new(a, b, edges).unwrap();
        let odd_a = (0..a).any(|v| g.degree(v) % 2 == 1);
        let odd_b = (a..a + b).any(|v| g.degree(v) % 2 == 1);
        if odd_a && odd_b {
            return g;
        }
    }
}

#[test]
fn criterion_04_splice_creates_xy_trail() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = Vec::new();
    let mut without_before = 0;
    for _ in 0..SPLICE_INSTANCES {
        let g = mixed_component(&mut rng);
        let s = g.all_edges();
        let sides = Bipartition::by_host_sides(&g);
        let d = good_open_trail_decomposition(&g, &s, &sides).unwrap();
        let xy =
            |d: &TrailDecomposition| d.trails.iter().filter(|t| t.kind == TrailKind::XY).count();
        if xy(&d) == 0 {
            without_before += 1;
        }
        let after = splice_for_xy(&d, &sides);
        if after.trails.len() != d.trails.len() || xy(&after) == 0 {
            bad.push(format!(
                "{} -> {} trails, {} XY",
                d.trails.len(),
                after.trails.len(),
                xy(&after)
            ));
        }
        bad.extend(trail_problem(&g, &s, &after));
    }
    report(
        4,
        bad.is_empty(),
        &format!("{SPLICE_INSTANCES} components, {without_before} without an XY-trail before splicing, problems: {bad:?}"),
    );
}

fn counts_at(g: &BipartiteGraph, plan: &ResiduePlan, v: usize) -> (usize, usize) {
    let mut c = (0, 0);
    for &e in g.incident(v) {
        match plan.residue_of_edge[e] {
            Some(Residue::One) => c.0 += 1,
            Some(Residue::Two) => c.1 += 1,
            None => {}
        }
    }
    c
}

/// Conclusions (i) and (ii), recomputed from the per-edge residues.
fn residue_problem(
    g: &BipartiteGraph,
    s: &EdgeSubset,
    sides: &Bipartition,
    plan: &ResiduePlan,
) -> Option<String> {
    let deg = degrees(g, s.iter());
    let y_all_even = g.vertices().all(|v| sides.is_x(v) || deg[v] % 2 == 0);
    let mut off_by_two = 0;
    for v in g.vertices().filter(|&v| deg[v] > 0) {
        let (ones, twos) = counts_at(g, plan, v);
        if ones + twos != deg[v] {
            return Some(format!("vertex {v} has unlabeled edges"));
        }
        if sides.is_x(v) {
            if (ones + 2 * twos) % 3 == 0 {
                return Some(format!("X vertex {v} has a 0-sum"));
            }
        } else {
            let diff = ones.abs_diff(twos);
            if y_all_even && diff == 2 {
                off_by_two += 1;
            } else if diff > 1 || (y_all_even && diff != 0) {
                return Some(format!("Y vertex {v} has {ones} ones, {twos} twos"));
            }
        }
    }
    (off_by_two > 1).then(|| format!("{off_by_two} Y vertices off by two"))
}

/// A connected non-Eulerian graph with more Y-side than X-side vertices, all
/// Y-side degrees even and at least 4.
fn exchange_instance(rng: &mut ChaCha8Rng) -> BipartiteGraph {
    loop {
        let nx = rng.gen_range(4..=7);
        let ny = nx + rng.gen_range(1..=4);
        let mut edges = Vec::new();
        for y in nx..nx + ny {
            let mut xs: Vec<usize> = (0..nx).collect();
            xs.shuffle(rng);
            let d = 2 * rng.gen_range(2..=nx / 2);
            edges.extend(xs[..d].iter().map(|&x| (x, y)));
        }
        let g = BipartiteGraph::new(nx, ny, edges).unwrap();
        let odd_x = (0..nx).any(|x| g.degree(x) % 2 == 1);
        if odd_x && (0..nx).all(|x| g.degree(x) > 0) && components(&g, &g.all_edges()).len() == 1 {
            return g;
        }
    }
}

#[test]
fn criterion_05_residue_assignment() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = Vec::new();
    let (mut all_even, mut mixed, mut exchanges) = (0, 0, 0);
    let mut done = 0;
    while done < RESIDUE_INSTANCES {
        let (g, s) = if done % 4 == 3 {
            let g = exchange_instance(&mut rng);
            let s = g.all_edges();
            (g, s)
        } else {
            let g = random_graph(&mut rng, 10);
            let mut s = g.all_edges();
            if done % 2 == 0 {
                // Make every B-side degree even.
                for v in g.n_a()..g.n() {
                    if s.degree(&g, v) % 2 == 1 {
                        let e = s.incident(&g, v).next().unwrap();
                        s.remove(e);
                    }
                }
            }
            let s = strip_eulerian(&g, &s);
            (g, s)
        };
        if s.is_empty() {
            continue;
        }
        let sides = Bipartition::by_host_sides(&g);
        let deg = degrees(&g, s.iter());
        let y_even = g.vertices().all(|v| sides.is_x(v) || deg[v] % 2 == 0);
        let has_mixed = components(&g, &s).iter().any(|c| {
            let ends = c.iter().flat_map(|&e| {
                let (a, b) = g.endpoints(e);
                [a, b]
            });
            let odd: Vec<usize> = ends.filter(|&v| deg[v] % 2 == 1).collect();
            odd.iter().any(|&v| sides.is_x(v)) && odd.iter().any(|&v| !sides.is_x(v))
        });
        if !y_even && !has_mixed {
            continue;
        }
        done += 1;
        if y_even {
            all_even += 1;
        } else {
            mixed += 1;
        }
        let m = s.len();
        let diffs: Vec<usize> = [0, 1, 2]
            .into_iter()
            .filter(|d| (m + d) % 2 == 0 && *d <= m)
            .collect();
        let d = *diffs.choose(&mut rng).unwrap();
        let (big, small) = ((m + d) / 2, (m - d) / 2);
        let (l1, l2) = if rng.gen_bool(0.5) {
            (big, small)
        } else {
            (small, big)
        };
        let plan = match assign_residues(&g, &s, &sides, l1, l2) {
            Ok(p) => p,
            Err(e) => {
                bad.push(e.to_string());
                continue;
            }
        };
        if plan.totals() != (l1, l2) {
            bad.push(format!("totals {:?} for ({l1}, {l2})", plan.totals()));
        }
        bad.extend(residue_problem(&g, &s, &sides, &plan));

        // Conclusion (iii) when its hypotheses hold.
        let ys: Vec<usize> = g
            .vertices()
            .filter(|&v| !sides.is_x(v) && deg[v] > 0)
            .collect();
        let w: Vec<usize> = ys.iter().copied().filter(|&v| deg[v] == 1).collect();
        let rest: Vec<usize> = ys.iter().copied().filter(|&v| deg[v] != 1).collect();
        let active = g.vertices().filter(|&v| deg[v] > 0).count();
        let y3 = rest.iter().filter(|&&v| deg[v] % 2 == 1).count();
        if y3 <= 1 && 2 * rest.len() >= active && rest.iter().all(|&v| deg[v] >= 4) {
            exchanges += 1;
            match ensure_both_residues(&g, &s, &sides, &plan) {
                Ok(p2) => {
                    bad.extend(residue_problem(&g, &s, &sides, &p2));
                    let mut seen = [false; 3];
                    for v in g
                        .vertices()
                        .filter(|&v| deg[v] > 0 && (sides.is_x(v) || w.contains(&v)))
                    {
                        let (ones, twos) = counts_at(&g, &p2, v);
                        seen[(ones + 2 * twos) % 3] = true;
                    }
                    if !(seen[1] && seen[2]) {
                        bad.push("X and W miss a residue after the exchange".into());
                    }
                }
                Err(e) => bad.push(format!("exchange: {e}")),
            }
        }
    }
    report(
        5,
        bad.is_empty() && all_even > 0 && mixed > 0 && exchanges > 0,
        &format!("{done} instances ({all_even} even-Y, {mixed} mixed, {exchanges} with (iii)), problems: {bad:?}"),
    );
}

#[test]
fn criterion_06_pairings() {
    let mut bad = Vec::new();
    let mut checked = 0;
    for p in (0..=300u64).step_by(3) {
        for k in 1..=50usize {
            let kk = k as u64;
            let block: Vec<u64> = (1..=kk)
                .flat_map(|i| [p + 3 * i - 2, p + 3 * i - 1])
                .collect();
            let block_prime: Vec<u64> = (1..=kk)
                .flat_map(|i| [p + 3 * i - 1, p + 3 * i + 1])
                .collect();
            let (expect, expect_prime): (Vec<u64>, Vec<u64>) = if k % 2 == 1 {
                (
                    (1..=kk).map(|i| 2 * p + 3 * (kk - 1) / 2 + 3 * i).collect(),
                    (1..=kk).map(|i| 2 * p + 3 * (kk + 1) / 2 + 3 * i).collect(),
                )
            } else {
                (
                    std::iter::once(2 * p + 3)
                        .chain((1..kk).map(|i| 2 * p + 3 * (kk / 2 + 1) + 3 * i))
                        .collect(),
                    std::iter::once(2 * p + 6)
                        .chain((1..kk).map(|i| 2 * p + 3 * (kk / 2 + 2) + 3 * i))
                        .collect(),
                )
            };
            for (pairs, labels, sums) in [
                (pair_j(p, k).unwrap(), block, expect),
                (pair_j_prime(p, k).unwrap(), block_prime, expect_prime),
            ] {
                let mut got: Vec<u64> = pairs
                    .iter()
                    .flat_map(|q: &LabelPair| [q.lo, q.hi])
                    .collect();
                got.sort_unstable();
                let mut want = labels;
                want.sort_unstable();
                let mut got_sums: Vec<u64> = pairs.iter().map(LabelPair::sum).collect();
                got_sums.sort_unstable();
                let mut sums = sums;
                sums.sort_unstable();
                if got != want || got_sums != sums {
                    bad.push((p, k));
                }
                checked += 1;
            }
        }
    }
    report(
        6,
        bad.is_empty(),
        &format!("{checked} pairings, mismatches at {bad:?}"),
    );
}

#[test]
fn criterion_07_g4_components() {
    let mut bad = Vec::new();
    let mut needed = 0;
    for (i, item) in full_corpus().iter().enumerate() {
        let Some(o) = &item.outcome else {
            bad.push(format!("#{i}: no labeling"));
            continue;
        };
        let g = &item.g;
        let s = o.plan.g4_edges(g.m());
        let sides = o.plan.g4_sides(g);
        let deg = degrees(g, s.iter());
        let comps = components(g, &s);
        let eulerian = comps.iter().filter(|c| {
            c.iter().all(|&e| {
                let (a, b) = g.endpoints(e);
                deg[a] % 2 == 0 && deg[b] % 2 == 0
            })
        });
        if eulerian.count() > 0 {
            bad.push(format!("#{i}: Eulerian component"));
        }
        let y_odd = g.vertices().any(|v| !sides.is_x(v) && deg[v] % 2 == 1);
        if !o.plan.i21.is_empty() || y_odd {
            needed += 1;
            let mixed = comps.iter().any(|c| {
                let odd: Vec<usize> = c
                    .iter()
                    .flat_map(|&e| {
                        let (a, b) = g.endpoints(e);
                        [a, b]
                    })
                    .filter(|&v| deg[v] % 2 == 1)
                    .collect();
                odd.iter().any(|&v| sides.is_x(v)) && odd.iter().any(|&v| !sides.is_x(v))
            });
            if !mixed {
                bad.push(format!(
                    "#{i}: no component with odd vertices on both sides"
                ));
            }
        }
    }
    report(
        7,
        bad.is_empty(),
        &format!(
            "{} graphs, {needed} needing a mixed component, problems: {bad:?}",
            full_corpus().len()
        ),
    );
}

#[test]
fn criterion_08_gap_property() {
    let mut bad = Vec::new();
    let mut with_y0 = 0;
    for (i, item) in full_corpus().iter().enumerate() {
        let Some(o) = &item.outcome else {
            bad.push(format!("#{i}: no labeling"));
            continue;
        };
        let g = &item.g;
        let labels = o.labels();
        let y0 = o.assembly.trace.y_prime;
        with_y0 += usize::from(y0.is_some());
        let me: Vec<usize> = o.plan.matching.iter().chain(&o.plan.e1).copied().collect();
        // After the G1 \ E4 labels each Y vertex carries everything but its M ∪ E1 edge.
        let sums: Vec<u64> = o
            .plan
            .y
            .iter()
            .filter(|&&y| Some(y) != y0)
            .map(|&y| {
                g.incident(y)
                    .iter()
                    .filter(|e| !me.contains(e))
                    .map(|&e| labels[e])
                    .sum()
            })
            .collect();
        let traced: Vec<u64> = o.assembly.trace.sigma1.iter().map(|p| p.1).collect();
        let gap = 3 * o.plan.y.len() as u64;
        let mut sorted = sums.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sums != traced || sorted.windows(2).any(|w| w[1] - w[0] <= gap) {
            bad.push(format!("#{i}"));
        }
    }
    report(
        8,
        bad.is_empty(),
        &format!(
            "{} graphs ({with_y0} with y'), problems: {bad:?}",
            full_corpus().len()
        ),
    );
}

fn next_permutation(v: &mut [u64]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[test]
fn criterion_09_verifier_and_oracle() {
    let graphs = tiny_enumerate(TINY_EDGES).unwrap();
    let mut checked = 0u64;
    let mut bad = Vec::new();
    for (gi, g) in graphs.iter().enumerate() {
        let mut labels: Vec<u64> = (1..=g.m() as u64).collect();
        loop {
            let mut sums = BTreeMap::<usize, u64>::new();
            for v in 0..g.n() {
                sums.insert(v, 0);
            }
            for (e, &(a, b)) in g.edges().iter().enumerate() {
                *sums.get_mut(&a).unwrap() += labels[e];
                *sums.get_mut(&b).unwrap() += labels[e];
            }
            let mut vals: Vec<u64> = sums.values().copied().collect();
            vals.sort_unstable();
            let distinct = vals.windows(2).all(|w| w[0] != w[1]);
            let v = verify(g, &labels);
            if !v.is_bijection || v.sums_distinct != distinct || v.antimagic != distinct {
                bad.push(format!("graph {gi}, labels {labels:?}"));
            }
            checked += 1;
            if !next_permutation(&mut labels) {
                break;
            }
        }
    }
    let k2 = complete_bipartite(1, 1);
    let p3 = complete_bipartite(1, 2);
    let c4 = complete_bipartite(2, 2);
    let k13 = complete_bipartite(1, 3);
    let oracle = [
        brute_force_is_antimagic(&k2) == Ok(false),
        brute_force_is_antimagic(&p3) == Ok(true),
        brute_force_is_antimagic(&c4) == Ok(true),
        brute_force_is_antimagic(&k13) == Ok(true),
    ];
    if oracle.contains(&false) {
        bad.push(format!("oracle K2, P3, C4, K1,3: {oracle:?}"));
    }
    report(
        9,
        bad.is_empty() && !graphs.is_empty(),
        &format!(
            "{} graphs, {checked} bijections, problems: {bad:?}",
            graphs.len()
        ),
    );
}

#[test]
fn criterion_10_count_identities() {
    let mut by_rule: BTreeMap<String, usize> = BTreeMap::new();
    let mut missing = 0;
    for item in full_corpus() {
        let Some(o) = &item.outcome else {
            missing += 1;
            continue;
        };
        for v in o.plan.violations(&item.g) {
            *by_rule.entry(v.rule.to_string()).or_default() += 1;
        }
        for v in o.assembly.partition.violations(&o.plan.counts) {
            *by_rule.entry(v).or_default() += 1;
        }
    }
    report(
        10,
        by_rule.is_empty() && missing == 0,
        &format!(
            "{} graphs, {missing} unlabeled, violated rules: {by_rule:?}",
            full_corpus().len()
        ),
    );
}
