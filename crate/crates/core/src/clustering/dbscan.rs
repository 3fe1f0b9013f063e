//! Density-based clustering with deterministic border handling.

use super::{euclidean, ClusterAssignment};
use crate::{Error, Result};

/// DBSCAN over flat `n x k` positions.
///
/// A point is core when at least `mc` points (itself included) lie within
/// `eps`; clusters are the connected components of core points under the
/// `<= eps` relation. A non-core point joins the cluster of its
/// lowest-indexed core neighbor (deterministic tie-break); points with no
/// core neighbor are noise and come back as singleton clusters.
pub fn dbscan(positions: &[f64], k: usize, eps: f64, mc: usize) -> Result<ClusterAssignment> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("dbscan eps {eps} must be > 0")));
    }
    if mc < 1 {
        return Err(Error::Config("dbscan mc must be >= 1".into()));
    }
    let n = positions.len() / k;
    if n == 0 || positions.len() % k != 0 {
        return Err(Error::Config(format!(
            "positions length {} is not a nonempty multiple of k={k}",
            positions.len()
        )));
    }

    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if euclidean(positions, k, i, j) <= eps {
                neighbors[i].push(j);
            }
        }
    }
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= mc).collect();

    let mut raw: Vec<Option<usize>> = vec![None; n];
    let mut cluster = 0;
    for start in 0..n {
        if !core[start] || raw[start].is_some() {
            continue;
        }
        let mut stack = vec![start];
        raw[start] = Some(cluster);
        while let Some(i) = stack.pop() {
            for &j in &neighbors[i] {
                if core[j] && raw[j].is_none() {
                    raw[j] = Some(cluster);
                    stack.push(j);
                }
            }
        }
        cluster += 1;
    }
    for i in 0..n {
        if core[i] {
            continue;
        }
        // Neighbor lists are in ascending index order, so the first core
        // entry is the lowest-indexed claimant.
        raw[i] = neighbors[i].iter().find(|&&j| core[j]).map(|&j| raw[j].unwrap());
    }
    Ok(ClusterAssignment::from_raw(&raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flat(points: &[[f64; 2]]) -> Vec<f64> {
        points.iter().flatten().copied().collect()
    }

    #[test]
    fn separated_blobs() {
        let pts = flat(&[[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [9.0, 9.0], [9.5, 9.0], [9.0, 9.5]]);
        let a = dbscan(&pts, 2, 1.0, 2).unwrap();
        assert_eq!(a.num_clusters, 2);
        assert_eq!(a.labels, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn identical_points_one_cluster() {
        let pts = vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        let a = dbscan(&pts, 2, 0.5, 2).unwrap();
        assert_eq!(a.num_clusters, 1);
    }

    #[test]
    fn noise_becomes_singletons() {
        let pts = flat(&[[0.0, 0.0], [0.1, 0.0], [50.0, 50.0], [-50.0, 10.0]]);
        let a = dbscan(&pts, 2, 1.0, 2).unwrap();
        assert_eq!(a.labels, vec![0, 0, 1, 2]);
        assert_eq!(a.num_clusters, 3);
    }

    #[test]
    fn border_point_joins_lowest_core_neighbor() {
        // Two 4-point core runs with a lone point 8 exactly eps from the
        // nearest core of each; with mc=4 point 8 stays non-core, so the
        // tie-break hands it to the lower-indexed claimant (core 3).
        let pts = flat(&[
            [0.0, 0.0],
            [0.3, 0.0],
            [0.6, 0.0],
            [0.9, 0.0],
            [2.9, 0.0],
            [3.2, 0.0],
            [3.5, 0.0],
            [3.8, 0.0],
            [1.9, 0.0],
        ]);
        let a = dbscan(&pts, 2, 1.0, 4).unwrap();
        assert_eq!(a.num_clusters, 2);
        assert_eq!(a.labels[8], a.labels[3]);
        assert_ne!(a.labels[8], a.labels[4]);
    }

    #[test]
    fn mc_one_makes_everything_core() {
        let pts = flat(&[[0.0, 0.0], [100.0, 0.0]]);
        let a = dbscan(&pts, 2, 1.0, 1).unwrap();
        assert_eq!(a.num_clusters, 2);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(dbscan(&[0.0, 0.0], 2, 0.0, 2).is_err());
        assert!(dbscan(&[0.0, 0.0], 2, 1.0, 0).is_err());
        assert!(dbscan(&[], 2, 1.0, 1).is_err());
    }

    /// Independent reference: full boolean adjacency, core flags by row
    /// count, BFS over core-core edges, border by lowest core neighbor.
    fn oracle(positions: &[f64], k: usize, eps: f64, mc: usize) -> ClusterAssignment {
        let n = positions.len() / k;
        let mut adj = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                adj[i][j] = euclidean(positions, k, i, j) <= eps;
            }
        }
        let core: Vec<bool> =
            (0..n).map(|i| adj[i].iter().filter(|&&b| b).count() >= mc).collect();
        let mut raw = vec![None; n];
        let mut next = 0;
        for s in 0..n {
            if core[s] && raw[s].is_none() {
                let mut queue = std::collections::VecDeque::from([s]);
                raw[s] = Some(next);
                while let Some(i) = queue.pop_front() {
                    for j in 0..n {
                        if adj[i][j] && core[j] && raw[j].is_none() {
                            raw[j] = Some(next);
                            queue.push_back(j);
                        }
                    }
                }
                next += 1;
            }
        }
        for i in 0..n {
            if !core[i] {
                raw[i] = (0..n).find(|&j| adj[i][j] && core[j]).map(|j| raw[j].unwrap());
            }
        }
        ClusterAssignment::from_raw(&raw)
    }

    proptest! {
        #[test]
        fn matches_brute_force_oracle(
            pts in proptest::collection::vec(-10.0f64..10.0, 2..50),
            eps in 0.5f64..6.0,
            mc in 1usize..5,
        ) {
            let mut pts = pts;
            if pts.len() % 2 == 1 {
                pts.pop();
            }
            let got = dbscan(&pts, 2, eps, mc).unwrap();
            let want = oracle(&pts, 2, eps, mc);
            prop_assert_eq!(got, want);
        }

        #[test]
        fn permutation_stable_partition(
            pts in proptest::collection::vec(-10.0f64..10.0, 4..40),
            eps in 0.5f64..6.0,
            mc in 1usize..5,
            seed in 0u64..1000,
        ) {
            let mut pts = pts;
            if pts.len() % 2 == 1 {
                pts.pop();
            }
            let n = pts.len() / 2;
            let base = dbscan(&pts, 2, eps, mc).unwrap();

            // Skip instances where a border point is claimed by two distinct
            // clusters: there the tie-break is index-dependent by design.
            let neighbors = |i: usize, pts: &[f64]| -> Vec<usize> {
                (0..n).filter(|&j| euclidean(pts, 2, i, j) <= eps).collect()
            };
            let core: Vec<bool> = (0..n).map(|i| neighbors(i, &pts).len() >= mc).collect();
            for i in 0..n {
                if core[i] {
                    continue;
                }
                let claims: std::collections::BTreeSet<usize> = neighbors(i, &pts)
                    .into_iter()
                    .filter(|&j| core[j])
                    .map(|j| base.labels[j])
                    .collect();
                prop_assume!(claims.len() <= 1);
            }

            // Permute points, cluster, and map the partition back.
            let mut perm: Vec<usize> = (0..n).collect();
            let mut s = seed.wrapping_mul(2654435761).wrapping_add(1);
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let mut shuffled = vec![0.0; pts.len()];
            for (new, &old) in perm.iter().enumerate() {
                shuffled[new * 2] = pts[old * 2];
                shuffled[new * 2 + 1] = pts[old * 2 + 1];
            }
            let permuted = dbscan(&shuffled, 2, eps, mc).unwrap();
            // Same partition: label pairs agree on same-cluster relations.
            for a in 0..n {
                for b in (a + 1)..n {
                    let same_base = base.labels[a] == base.labels[b];
                    let pa = perm.iter().position(|&o| o == a).unwrap();
                    let pb = perm.iter().position(|&o| o == b).unwrap();
                    let same_perm = permuted.labels[pa] == permuted.labels[pb];
                    prop_assert_eq!(same_base, same_perm, "pair ({}, {})", a, b);
                }
            }
        }
    }
}
