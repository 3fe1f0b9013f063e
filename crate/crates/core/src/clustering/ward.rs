//! Agglomerative clustering with Ward's criterion via the Lance–Williams
//! recurrence, plus dendrogram export.

use super::{euclidean, ClusterAssignment};
use crate::{Error, Result};

/// One agglomeration: clusters `a` and `b` joined at `distance` into a
/// cluster of `size` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub size: usize,
}

/// The full merge history. Initial clusters are `0..n`; merge `i` creates
/// cluster `n + i`, so ids run up to `2n - 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub merges: Vec<Merge>,
}

/// Ward-linkage clustering of flat `n x k` positions, cut to
/// `num_clusters`.
///
/// Initial inter-singleton distances are Euclidean; merged distances follow
/// the Ward update, so heights equal `sqrt(2 * increase in within-cluster
/// sum of squares)`. Ties pick the lexicographically smallest id pair.
pub fn ward_cluster(
    positions: &[f64],
    k: usize,
    num_clusters: usize,
) -> Result<(ClusterAssignment, Dendrogram)> {
    let n = positions.len() / k;
    if n == 0 || positions.len() % k != 0 {
        return Err(Error::Config(format!(
            "positions length {} is not a nonempty multiple of k={k}",
            positions.len()
        )));
    }
    if num_clusters < 1 || num_clusters > n {
        return Err(Error::Config(format!(
            "num_clusters {num_clusters} outside 1..={n}"
        )));
    }

    let total = 2 * n - 1;
    let mut dist = vec![0.0; total * total];
    let mut size = vec![0usize; total];
    for i in 0..n {
        size[i] = 1;
        for j in 0..n {
            dist[i * total + j] = euclidean(positions, k, i, j);
        }
    }
    // Ascending cluster ids; new ids are always the largest, so the order
    // (and with it the tie-break scan) stays sorted without re-sorting.
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let (mut best, mut best_d) = ((0usize, 0usize), f64::INFINITY);
        for (pi, &a) in active.iter().enumerate() {
            for &b in &active[pi + 1..] {
                let d = dist[a * total + b];
                if d < best_d {
                    best_d = d;
                    best = (a, b);
                }
            }
        }
        let (a, b) = best;
        let c = n + step;
        let (na, nb) = (size[a] as f64, size[b] as f64);
        size[c] = size[a] + size[b];
        for &w in active.iter().filter(|&&w| w != a && w != b) {
            let nw = size[w] as f64;
            let (dwa, dwb) = (dist[w * total + a], dist[w * total + b]);
            let d2 = ((nw + na) * dwa * dwa + (nw + nb) * dwb * dwb - nw * best_d * best_d)
                / (nw + na + nb);
            let d = d2.max(0.0).sqrt();
            dist[w * total + c] = d;
            dist[c * total + w] = d;
        }
        active.retain(|&x| x != a && x != b);
        active.push(c);
        debug_assert!(
            merges
                .last()
                .map_or(true, |m: &Merge| best_d >= m.distance - 1e-9),
            "ward monotonicity violated at step {step}"
        );
        merges.push(Merge { a, b, distance: best_d, size: size[c] });
    }

    let dendrogram = Dendrogram { merges };
    let assignment = cut(&dendrogram, n, num_clusters);
    Ok((assignment, dendrogram))
}

/// Apply the first `n - num_clusters` merges and label the leaves.
fn cut(dendrogram: &Dendrogram, n: usize, num_clusters: usize) -> ClusterAssignment {
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (step, m) in dendrogram.merges.iter().take(n - num_clusters).enumerate() {
        let c = n + step;
        let ra = find(&mut parent, m.a);
        let rb = find(&mut parent, m.b);
        parent[ra] = c;
        parent[rb] = c;
    }
    let raw: Vec<Option<usize>> = (0..n).map(|i| Some(find(&mut parent, i))).collect();
    ClusterAssignment::from_raw(&raw)
}

/// Text form: one `a b dist size` line per merge.
pub fn export_dendrogram(d: &Dendrogram) -> String {
    let mut out = String::new();
    for m in &d.merges {
        out.push_str(&format!("{} {} {} {}\n", m.a, m.b, m.distance, m.size));
    }
    out
}
