//! Text formats.
//!
//! Graphs: a header `bip <n_a> <n_b> <m>` followed by `m` lines `<u> <v>`,
//! with side-A ids in `[0, n_a)` and side-B ids in `[n_a, n_a + n_b)`.
//! Labelings: one line `<u> <v> <label>` per edge. Blank lines and text after
//! `#` are ignored in both.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{BipartiteGraph, VertexId};
use crate::verify::Verdict;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

struct Tokens<'a> {
    line: usize,
    items: Vec<(usize, &'a str)>,
}

fn lines(text: &str) -> impl Iterator<Item = Tokens<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let mut items = Vec::new();
        let mut start = None;
        for (j, ch) in body.char_indices() {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(j),
                (true, Some(s)) => {
                    items.push((s + 1, &body[s..j]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            items.push((s + 1, &body[s..]));
        }
        (!items.is_empty()).then_some(Tokens { line: i + 1, items })
    })
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

impl Tokens<'_> {
    fn expect_len(&self, n: usize, what: &str) -> Result<(), ParseError> {
        if self.items.len() != n {
            let col = self
                .items
                .get(n)
                .map_or(self.items.last().map_or(1, |t| t.0), |t| t.0);
            return Err(err(self.line, col, format!("expected {what}")));
        }
        Ok(())
    }

    fn num<T: std::str::FromStr>(&self, i: usize) -> Result<T, ParseError> {
        let (col, tok) = self.items[i];
        tok.parse().map_err(|_| {
            err(
                self.line,
                col,
                format!("'{tok}' is not a non-negative integer"),
            )
        })
    }
}

pub fn parse_edge_list(text: &str) -> Result<BipartiteGraph, ParseError> {
    let mut it = lines(text);
    let head = it
        .next()
        .ok_or_else(|| err(1, 1, "missing header 'bip <n_a> <n_b> <m>'"))?;
    head.expect_len(4, "header 'bip <n_a> <n_b> <m>'")?;
    if head.items[0].1 != "bip" {
        return Err(err(
            head.line,
            head.items[0].0,
            "header must start with 'bip'",
        ));
    }
    let (n_a, n_b, m): (usize, usize, usize) = (head.num(1)?, head.num(2)?, head.num(3)?);
    let mut edges = Vec::with_capacity(m);
    let mut last_line = head.line;
    for t in it {
        t.expect_len(2, "'<u> <v>'")?;
        let (u, v): (VertexId, VertexId) = (t.num(0)?, t.num(1)?);
        let single = BipartiteGraph::new(n_a, n_b, [(u, v)]);
        if let Err(e) = single {
            return Err(err(t.line, t.items[0].0, e.to_string()));
        }
        if edges.contains(&(u.min(v), u.max(v))) {
            return Err(err(
                t.line,
                t.items[0].0,
                format!("repeated edge ({u}, {v})"),
            ));
        }
        edges.push((u.min(v), u.max(v)));
        last_line = t.line;
    }
    if edges.len() != m {
        return Err(err(
            last_line + 1,
            1,
            format!("header announces {m} edges, found {}", edges.len()),
        ));
    }
    Ok(BipartiteGraph::new(n_a, n_b, edges).expect("edges checked one by one"))
}

pub fn write_edge_list(g: &BipartiteGraph) -> String {
    let mut out = format!("bip {} {} {}\n", g.n_a(), g.n_b(), g.m());
    for &(a, b) in g.edges() {
        writeln!(out, "{a} {b}").unwrap();
    }
    out
}

/// Reads labels by edge id. Edges missing from the file get label 0, which
/// the verifier reports as not a bijection.
pub fn parse_labeling(text: &str, g: &BipartiteGraph) -> Result<Vec<u64>, ParseError> {
    let mut labels = vec![0u64; g.m()];
    let mut seen = vec![false; g.m()];
    for t in lines(text) {
        t.expect_len(3, "'<u> <v> <label>'")?;
        let (u, v): (VertexId, VertexId) = (t.num(0)?, t.num(1)?);
        let label: u64 = t.num(2)?;
        let e = g
            .edge_between(u, v)
            .ok_or_else(|| err(t.line, t.items[0].0, format!("({u}, {v}) is not an edge")))?;
        if seen[e] {
            return Err(err(
                t.line,
                t.items[0].0,
                format!("edge ({u}, {v}) labeled twice"),
            ));
        }
        seen[e] = true;
        labels[e] = label;
    }
    Ok(labels)
}

pub fn write_labeling(g: &BipartiteGraph, labels: &[u64]) -> String {
    let mut out = String::new();
    for (&(a, b), l) in g.edges().iter().zip(labels) {
        writeln!(out, "{a} {b} {l}").unwrap();
    }
    out
}

#[derive(Serialize)]
struct LabelingJson<'a> {
    edges: Vec<(VertexId, VertexId, u64)>,
    vertex_sums: Vec<u64>,
    verdict: &'a Verdict,
}

/// Edges with labels, vertex sums and the verdict (which carries the residue report).
pub fn labeling_json(g: &BipartiteGraph, labels: &[u64], verdict: &Verdict) -> String {
    let mut sums = vec![0u64; g.n()];
    let edges = g
        .edges()
        .iter()
        .zip(labels)
        .map(|(&(a, b), &l)| {
            sums[a] += l;
            sums[b] += l;
            (a, b, l)
        })
        .collect();
    serde_json::to_string_pretty(&LabelingJson {
        edges,
        vertex_sums: sums,
        verdict,
    })
    .expect("plain data")
}

pub fn to_dot(g: &BipartiteGraph, labels: Option<&[u64]>) -> String {
    let mut out = String::from("graph G {\n");
    for v in g.vertices() {
        let shape = if g.is_side_a(v) { "box" } else { "ellipse" };
        writeln!(out, "  {v} [shape={shape}];").unwrap();
    }
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        match labels {
            Some(l) => writeln!(out, "  {a} -- {b} [label=\"{}\"];", l[e]).unwrap(),
            None => writeln!(out, "  {a} -- {b};").unwrap(),
        }
    }
    out.push_str("}\n");
    out
}
