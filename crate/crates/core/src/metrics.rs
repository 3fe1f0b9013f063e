//! Normalized mutual information between a predicted clustering and the
//! ground truth, plus NMI-over-time traces.

use crate::clustering::Clusterer;
use crate::dynamics::Snapshot;
use crate::{Error, Result};

/// Map arbitrary labels to dense `0..c` ids (first-occurrence order).
fn densify(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut remap = std::collections::HashMap::new();
    let mut out = Vec::with_capacity(labels.len());
    for &l in labels {
        let next = remap.len();
        out.push(*remap.entry(l).or_insert(next));
    }
    (out, remap.len())
}

/// NMI in nats: `I(Ŷ;Y) / (0.5 * (H(Ŷ) + H(Y)))` from the empirical
/// contingency table.
///
/// When both partitions are single-cluster the ratio is 0/0; that case is
/// defined as 1.0 (the labelings are identical). One trivial partition
/// against a non-trivial one scores 0 (zero mutual information).
pub fn nmi(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() || predicted.is_empty() {
        return Err(Error::LabelLength { predicted: predicted.len(), truth: truth.len() });
    }
    let n = predicted.len() as f64;
    let (p_dense, pc) = densify(predicted);
    let (t_dense, tc) = densify(truth);
    let mut joint = vec![0usize; pc * tc];
    let mut p_count = vec![0usize; pc];
    let mut t_count = vec![0usize; tc];
    for (&p, &t) in p_dense.iter().zip(&t_dense) {
        joint[p * tc + t] += 1;
        p_count[p] += 1;
        t_count[t] += 1;
    }
    let entropy = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let hp = entropy(&p_count);
    let ht = entropy(&t_count);
    let denom = 0.5 * (hp + ht);
    if denom <= 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for p in 0..pc {
        for t in 0..tc {
            let c = joint[p * tc + t];
            if c > 0 {
                let pj = c as f64 / n;
                mi += pj * (pj * n * n / (p_count[p] as f64 * t_count[t] as f64)).ln();
            }
        }
    }
    Ok((mi / denom).clamp(0.0, 1.0))
}

/// Cluster and score every snapshot's readout positions.
pub fn nmi_over_time(
    snapshots: &[Snapshot],
    k: usize,
    clusterer: &Clusterer,
    truth: &[usize],
) -> Result<Vec<(usize, f64)>> {
    snapshots
        .iter()
        .map(|s| {
            let assignment = clusterer.assign(&s.readout, k)?;
            Ok((s.step, nmi(&assignment.labels, truth)?))
        })
        .collect()
}
