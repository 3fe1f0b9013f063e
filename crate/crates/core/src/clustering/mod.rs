//! Map readout: DBSCAN for the chunking experiments, Ward-linkage
//! agglomerative clustering with dendrogram export for the hierarchy
//! studies.

pub mod dbscan;
pub mod ward;

use serde::{Deserialize, Serialize};

pub use dbscan::dbscan;
pub use ward::{export_dendrogram, ward_cluster, Dendrogram, Merge};

use crate::Result;

/// A total clustering of the map's nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    /// Per-node label, contiguous `0..num_clusters`.
    pub labels: Vec<usize>,
    pub num_clusters: usize,
}

impl ClusterAssignment {
    /// Build from raw labels (`None` = noise), renaming labels to first-
    /// occurrence order and promoting each noise point to its own cluster.
    pub(crate) fn from_raw(raw: &[Option<usize>]) -> Self {
        let mut remap = std::collections::HashMap::new();
        let mut labels = Vec::with_capacity(raw.len());
        let mut next = 0;
        for &r in raw {
            let label = match r {
                Some(old) => *remap.entry(old).or_insert_with(|| {
                    let l = next;
                    next += 1;
                    l
                }),
                None => {
                    let l = next;
                    next += 1;
                    l
                }
            };
            labels.push(label);
        }
        Self { labels, num_clusters: next }
    }
}

/// Readout configuration: which clusterer scores the map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Clusterer {
    Dbscan { eps: f64, mc: usize },
    Ward { num_clusters: usize },
}

impl Clusterer {
    pub fn assign(&self, positions: &[f64], k: usize) -> Result<ClusterAssignment> {
        match *self {
            Clusterer::Dbscan { eps, mc } => dbscan(positions, k, eps, mc),
            Clusterer::Ward { num_clusters } => {
                ward_cluster(positions, k, num_clusters).map(|(a, _)| a)
            }
        }
    }
}

pub(crate) fn euclidean(positions: &[f64], k: usize, i: usize, j: usize) -> f64 {
    let mut d2 = 0.0;
    for d in 0..k {
        let diff = positions[i * k + d] - positions[j * k + d];
        d2 += diff * diff;
    }
    d2.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_labels_normalize_by_first_occurrence() {
        let a = ClusterAssignment::from_raw(&[Some(7), Some(7), None, Some(1), None, Some(7)]);
        assert_eq!(a.labels, vec![0, 0, 1, 2, 3, 0]);
        assert_eq!(a.num_clusters, 4);
    }
}
