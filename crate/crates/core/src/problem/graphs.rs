//! Real-network benchmarks: edge-list parsing and the bundled fixtures.

use super::matrix::AdjacencyMatrix;
use crate::{Error, Result};

/// An undirected benchmark graph with ground-truth community labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub name: String,
    pub adjacency: AdjacencyMatrix,
    pub truth: Vec<usize>,
}

impl LabeledGraph {
    pub fn n(&self) -> usize {
        self.truth.len()
    }

    pub fn num_communities(&self) -> usize {
        self.truth.iter().copied().max().map_or(0, |m| m + 1)
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty())
}

/// Parse an edge list and a companion label file into a walkable graph.
///
/// Edge lines hold `u v` pairs, 0-indexed, `#` starts a comment; the label
/// file holds one integer per data line, line i labeling node i. Edges are
/// symmetrized and duplicates collapse silently. The label set must be
/// contiguous `0..c`, every node needs at least one edge, and the graph must
/// be connected so a walk can visit every node.
pub fn load_graph(name: &str, edges: &str, labels: &str) -> Result<LabeledGraph> {
    let mut truth = Vec::new();
    for (line_no, line) in data_lines(labels) {
        let label: usize = line
            .parse()
            .map_err(|_| Error::Graph(format!("{name} labels line {line_no}: {line:?}")))?;
        truth.push(label);
    }
    let n = truth.len();
    if n == 0 {
        return Err(Error::Graph(format!("{name}: empty label file")));
    }
    let c = truth.iter().copied().max().unwrap() + 1;
    let mut seen = vec![false; c];
    for &l in &truth {
        seen[l] = true;
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::Graph(format!("{name}: label set is not contiguous 0..{c}")));
    }

    let mut a = AdjacencyMatrix::zeros(n);
    for (line_no, line) in data_lines(edges) {
        let mut parts = line.split_whitespace();
        let bad = || Error::Graph(format!("{name} edges line {line_no}: {line:?}"));
        let u: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let v: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if parts.next().is_some() {
            return Err(bad());
        }
        if u >= n || v >= n {
            return Err(Error::Graph(format!(
                "{name} edges line {line_no}: node id out of range 0..{n}"
            )));
        }
        if u == v {
            return Err(Error::Graph(format!("{name} edges line {line_no}: self-loop at {u}")));
        }
        a.set(u, v);
        a.set(v, u);
    }
    a.validate().map_err(|e| Error::Graph(format!("{name}: {e}")))?;
    if !a.is_strongly_connected() {
        return Err(Error::Graph(format!("{name}: graph is not connected")));
    }
    Ok(LabeledGraph { name: name.to_string(), adjacency: a, truth })
}

/// Names accepted by [`builtin`].
pub const BUILTIN_GRAPHS: [&str; 5] = ["karate-2", "karate-4", "dolphins", "sbm", "whales"];

/// Load one of the bundled benchmark fixtures.
pub fn builtin(name: &str) -> Result<LabeledGraph> {
    let karate = include_str!("fixtures/karate.edges");
    let (edges, labels) = match name {
        "karate-2" => (karate, include_str!("fixtures/karate-2.labels")),
        "karate-4" => (karate, include_str!("fixtures/karate-4.labels")),
        "dolphins" => {
            (include_str!("fixtures/dolphins.edges"), include_str!("fixtures/dolphins.labels"))
        }
        "sbm" => (include_str!("fixtures/sbm.edges"), include_str!("fixtures/sbm.labels")),
        "whales" => {
            (include_str!("fixtures/whales.edges"), include_str!("fixtures/whales.labels"))
        }
        _ => return Err(Error::Graph(format!("unknown graph fixture {name:?}"))),
    };
    load_graph(name, edges, labels)
}
