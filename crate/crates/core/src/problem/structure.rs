//! Chunk-level description of a CGCP environment and its adjacency realization.

use serde::{Deserialize, Serialize};

use super::matrix::AdjacencyMatrix;
use crate::{Error, Result};

/// How transitions behave inside a chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChunkKind {
    /// Deterministic chain: each state leads to the next with probability 1
    /// (the last state exits through the wiring).
    Fixed,
    /// Community of a graph walked uniformly at random over its edges.
    Probabilistic,
}

/// One chunk: a set of states plus the edges realizing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkSpec {
    pub kind: ChunkKind,
    /// Member states in chain order for `Fixed`; order also fixes the
    /// entry (first) and exit (last) states used by the wiring.
    pub states: Vec<usize>,
    /// Undirected internal edges; only read for `Probabilistic` chunks.
    #[serde(default)]
    pub internal_edges: Vec<(usize, usize)>,
}

impl ChunkSpec {
    pub fn fixed(states: Vec<usize>) -> Self {
        Self { kind: ChunkKind::Fixed, states, internal_edges: Vec::new() }
    }

    /// Probabilistic chunk over the complete graph on `states`.
    pub fn probabilistic_complete(states: Vec<usize>) -> Self {
        let mut internal_edges = Vec::new();
        for i in 0..states.len() {
            for j in (i + 1)..states.len() {
                internal_edges.push((states[i], states[j]));
            }
        }
        Self { kind: ChunkKind::Probabilistic, states, internal_edges }
    }

    /// First state in declaration order; wiring targets enter here.
    pub fn entry(&self) -> usize {
        self.states[0]
    }

    /// Last state in declaration order; wiring sources leave from here.
    pub fn exit(&self) -> usize {
        self.states[self.states.len() - 1]
    }
}

/// A full CGCP structure: disjoint chunks covering `0..n_states` plus the
/// directed inter-chunk wiring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemStructure {
    pub chunks: Vec<ChunkSpec>,
    pub n_states: usize,
    /// Directed inter-chunk edges `(from_state, to_state)`.
    pub wiring: Vec<(usize, usize)>,
}

impl ProblemStructure {
    pub fn new(chunks: Vec<ChunkSpec>, n_states: usize, wiring: Vec<(usize, usize)>) -> Result<Self> {
        let s = Self { chunks, n_states, wiring };
        s.validate()?;
        Ok(s)
    }

    /// Chunk index of each state; the ground-truth labels for NMI.
    pub fn truth_labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n_states];
        for (c, chunk) in self.chunks.iter().enumerate() {
            for &s in &chunk.states {
                labels[s] = c;
            }
        }
        labels
    }

    /// Chunk index of each state, as a lookup table.
    fn chunk_of(&self) -> Vec<usize> {
        self.truth_labels()
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunks.is_empty() {
            return Err(Error::Structure("no chunks".into()));
        }
        let mut owner = vec![None; self.n_states];
        for (c, chunk) in self.chunks.iter().enumerate() {
            if chunk.states.is_empty() {
                return Err(Error::Structure(format!("chunk {c} has no states")));
            }
            for &s in &chunk.states {
                if s >= self.n_states {
                    return Err(Error::Structure(format!(
                        "chunk {c} uses state {s}, but n_states is {}",
                        self.n_states
                    )));
                }
                if let Some(prev) = owner[s] {
                    return Err(Error::Structure(format!(
                        "state {s} belongs to chunks {prev} and {c}"
                    )));
                }
                owner[s] = Some(c);
            }
            match chunk.kind {
                ChunkKind::Fixed => {
                    if chunk.states.len() < 2 {
                        return Err(Error::Structure(format!(
                            "fixed chunk {c} needs at least 2 states"
                        )));
                    }
                }
                ChunkKind::Probabilistic => {
                    for &(u, v) in &chunk.internal_edges {
                        if u == v {
                            return Err(Error::Structure(format!(
                                "chunk {c} has a self-loop edge at state {u}"
                            )));
                        }
                        if !chunk.states.contains(&u) || !chunk.states.contains(&v) {
                            return Err(Error::Structure(format!(
                                "chunk {c} edge ({u},{v}) leaves the chunk"
                            )));
                        }
                    }
                }
            }
        }
        if let Some(s) = owner.iter().position(Option::is_none) {
            return Err(Error::Structure(format!("state {s} belongs to no chunk")));
        }

        let chunk_of: Vec<usize> = owner.into_iter().map(Option::unwrap).collect();
        for &(from, to) in &self.wiring {
            if from >= self.n_states || to >= self.n_states {
                return Err(Error::Structure(format!(
                    "wiring edge ({from},{to}) leaves the state range"
                )));
            }
            if chunk_of[from] == chunk_of[to] {
                return Err(Error::Structure(format!(
                    "wiring edge ({from},{to}) stays inside chunk {}",
                    chunk_of[from]
                )));
            }
        }

        if !self.chunk_graph_strongly_connected(&chunk_of) {
            return Err(Error::Structure(
                "wiring does not connect every chunk to every other chunk".into(),
            ));
        }
        Ok(())
    }

    fn chunk_graph_strongly_connected(&self, chunk_of: &[usize]) -> bool {
        let c = self.chunks.len();
        if c == 1 {
            return true;
        }
        let mut adj = vec![vec![false; c]; c];
        for &(from, to) in &self.wiring {
            adj[chunk_of[from]][chunk_of[to]] = true;
        }
        let dir = |rev: bool| {
            let mut seen = vec![false; c];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut count = 1;
            while let Some(i) = stack.pop() {
                for j in 0..c {
                    let edge = if rev { adj[j][i] } else { adj[i][j] };
                    if edge && !seen[j] {
                        seen[j] = true;
                        count += 1;
                        stack.push(j);
                    }
                }
            }
            count == c
        };
        dir(false) && dir(true)
    }

    /// Apply a state permutation: state `s` becomes `perm[s]`. Chunk
    /// membership and wiring move with the states, so the relabeled
    /// structure is the same environment under new state names.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_states {
            return Err(Error::Structure(format!(
                "permutation has {} entries, expected {}",
                perm.len(),
                self.n_states
            )));
        }
        let mut seen = vec![false; self.n_states];
        for &p in perm {
            if p >= self.n_states || seen[p] {
                return Err(Error::Structure("not a permutation of the state range".into()));
            }
            seen[p] = true;
        }
        let chunks = self
            .chunks
            .iter()
            .map(|chunk| ChunkSpec {
                kind: chunk.kind,
                states: chunk.states.iter().map(|&s| perm[s]).collect(),
                internal_edges: chunk
                    .internal_edges
                    .iter()
                    .map(|&(u, v)| (perm[u], perm[v]))
                    .collect(),
            })
            .collect();
        let wiring = self.wiring.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Self::new(chunks, self.n_states, wiring)
    }

    /// Realize the structure as a binary adjacency matrix.
    ///
    /// Fixed chunks contribute their chain edges, probabilistic chunks their
    /// internal edges in both directions, and the wiring its directed edges.
    /// Probabilistic chunks are checked for community structure: internal
    /// degree `d_in = 0.5 * sum_{i,j in C} a[i][j]` must strictly exceed
    /// external degree `d_ex = sum_{i in C, j not in C} a[i][j]`.
    pub fn build_adjacency(&self) -> Result<AdjacencyMatrix> {
        self.validate()?;
        let mut a = AdjacencyMatrix::zeros(self.n_states);
        for chunk in &self.chunks {
            match chunk.kind {
                ChunkKind::Fixed => {
                    for w in chunk.states.windows(2) {
                        a.set(w[0], w[1]);
                    }
                }
                ChunkKind::Probabilistic => {
                    for &(u, v) in &chunk.internal_edges {
                        a.set(u, v);
                        a.set(v, u);
                    }
                }
            }
        }
        for &(from, to) in &self.wiring {
            a.set(from, to);
        }
        a.validate()?;
        if !a.is_strongly_connected() {
            return Err(Error::Structure("state graph is not strongly connected".into()));
        }

        let chunk_of = self.chunk_of();
        for (c, chunk) in self.chunks.iter().enumerate() {
            if chunk.kind != ChunkKind::Probabilistic {
                continue;
            }
            let mut internal = 0usize;
            let mut external = 0usize;
            for &i in &chunk.states {
                for j in 0..self.n_states {
                    if !a.get(i, j) {
                        continue;
                    }
                    if chunk_of[j] == c {
                        internal += 1;
                    } else {
                        external += 1;
                    }
                }
            }
            let d_in = internal as f64 * 0.5;
            let d_ex = external as f64;
            if d_in <= d_ex {
                return Err(Error::Structure(format!(
                    "chunk {c} is not a community: internal degree {d_in} <= external degree {d_ex}"
                )));
            }
        }
        Ok(a)
    }
}
