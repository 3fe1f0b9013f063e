//! Adjacency and transition matrices backing the random-walk generator.

use crate::{Error, Result};

/// Row sums of a transition matrix must match 1 within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Binary adjacency matrix of the state graph.
///
/// Entries are 0/1, the diagonal is zero and every row has at least one
/// nonzero entry (no absorbing dead ends).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    a: Vec<u8>,
}

impl AdjacencyMatrix {
    /// Build from a flat row-major 0/1 buffer, checking all invariants.
    pub fn new(n: usize, a: Vec<u8>) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::Matrix(format!(
                "adjacency buffer has {} entries, expected {}",
                a.len(),
                n * n
            )));
        }
        let m = Self { n, a };
        m.validate()?;
        Ok(m)
    }

    /// Zero matrix builder for incremental construction; call
    /// [`AdjacencyMatrix::validate`] when done.
    pub(crate) fn zeros(n: usize) -> Self {
        Self { n, a: vec![0; n * n] }
    }

    pub(crate) fn set(&mut self, i: usize, j: usize) {
        self.a[i * self.n + j] = 1;
    }

    pub fn validate(&self) -> Result<()> {
        for (idx, &v) in self.a.iter().enumerate() {
            if v > 1 {
                return Err(Error::Matrix(format!(
                    "entry ({},{}) is {}, expected 0 or 1",
                    idx / self.n,
                    idx % self.n,
                    v
                )));
            }
        }
        for i in 0..self.n {
            if self.get(i, i) {
                return Err(Error::Matrix(format!("self-loop at state {i}")));
            }
            if self.out_degree(i) == 0 {
                return Err(Error::Matrix(format!("state {i} has no outgoing edge")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.a[i * self.n + j] == 1
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    /// Number of outgoing edges of state `i`.
    pub fn out_degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|&v| v as usize).sum()
    }

    /// All directed edges `(i, j)` with a 1 entry.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            (0..self.n).filter_map(move |j| if self.get(i, j) { Some((i, j)) } else { None })
        })
    }

    /// Number of undirected edges, counting a symmetric pair once.
    pub fn undirected_edge_count(&self) -> usize {
        let mut count = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    if self.get(j, i) {
                        if i < j {
                            count += 1;
                        }
                    } else {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    /// True when every state can reach every other state along directed edges.
    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let forward = |i: usize| (0..self.n).filter(move |&j| self.get(i, j));
        let backward = |i: usize| (0..self.n).filter(move |&j| self.get(j, i));
        reaches_all(self.n, forward) && reaches_all(self.n, backward)
    }
}

fn reaches_all<I>(n: usize, next: impl Fn(usize) -> I) -> bool
where
    I: Iterator<Item = usize>,
{
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for j in next(i) {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == n
}

/// Row-stochastic transition matrix driving the first-order Markov walk.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    p: Vec<f64>,
}

impl TransitionMatrix {
    /// Uniform transitions over the out-neighbors of each state:
    /// `p[i][j] = a[i][j] / d[i]` with `d[i]` the out-degree of row `i`.
    pub fn from_adjacency(a: &AdjacencyMatrix) -> Result<Self> {
        let n = a.n();
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            let d = a.out_degree(i);
            if d == 0 {
                return Err(Error::Matrix(format!("state {i} is absorbing (out-degree 0)")));
            }
            let w = 1.0 / d as f64;
            for j in 0..n {
                if a.get(i, j) {
                    p[i * n + j] = w;
                }
            }
        }
        Ok(Self { n, p })
    }

    /// Build from explicit probabilities, checking row sums.
    pub fn new(n: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != n * n {
            return Err(Error::Matrix(format!(
                "transition buffer has {} entries, expected {}",
                p.len(),
                n * n
            )));
        }
        let m = Self { n, p };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            let row = self.row(i);
            if row.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::Matrix(format!("row {i} has an entry outside [0,1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Matrix(format!("row {i} sums to {sum}, expected 1")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.n..(i + 1) * self.n]
    }

    /// True when the nonzero pattern equals the adjacency's 1 pattern.
    pub fn support_matches(&self, a: &AdjacencyMatrix) -> bool {
        self.n == a.n()
            && (0..self.n)
                .all(|i| (0..self.n).all(|j| (self.get(i, j) > 0.0) == a.get(i, j)))
    }
}
