//! Self-contained SVG artifacts: truth-colored scatter plots of the map
//! (k > 2 maps are shown as their two principal-variance axes) and
//! dendrograms of Ward merge histories.

use crate::clustering::Dendrogram;
use crate::{Error, Result};

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
];

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 50.0;

/// Jacobi eigendecomposition of a symmetric `k x k` matrix (row-major).
/// Returns `(eigenvalues, eigenvectors)` with eigenvector `j` stored in
/// column `j`.
pub(crate) fn jacobi_eigen(mut a: Vec<f64>, k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..k {
            for j in (i + 1)..k {
                off += a[i * k + j] * a[i * k + j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[p * k + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..k {
                    let aip = a[i * k + p];
                    let aiq = a[i * k + q];
                    a[i * k + p] = c * aip - s * aiq;
                    a[i * k + q] = s * aip + c * aiq;
                }
                for j in 0..k {
                    let apj = a[p * k + j];
                    let aqj = a[q * k + j];
                    a[p * k + j] = c * apj - s * aqj;
                    a[q * k + j] = s * apj + c * aqj;
                }
                for i in 0..k {
                    let vip = v[i * k + p];
                    let viq = v[i * k + q];
                    v[i * k + p] = c * vip - s * viq;
                    v[i * k + q] = s * vip + c * viq;
                }
            }
        }
    }
    let values = (0..k).map(|i| a[i * k + i]).collect();
    (values, v)
}

/// Project flat `n x k` positions onto their two top-variance axes.
/// 1-D input gets a zero second coordinate; 2-D input is returned as-is.
fn to_plane(positions: &[f64], k: usize) -> Vec<[f64; 2]> {
    let n = positions.len() / k;
    if k == 1 {
        return positions.iter().map(|&x| [x, 0.0]).collect();
    }
    if k == 2 {
        return positions.chunks(2).map(|p| [p[0], p[1]]).collect();
    }
    let mut mean = vec![0.0; k];
    for row in positions.chunks(k) {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x / n as f64;
        }
    }
    let mut cov = vec![0.0; k * k];
    for row in positions.chunks(k) {
        for i in 0..k {
            for j in 0..k {
                cov[i * k + j] += (row[i] - mean[i]) * (row[j] - mean[j]) / n as f64;
            }
        }
    }
    let (values, vectors) = jacobi_eigen(cov, k);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let axis = |col: usize| -> Vec<f64> {
        let raw: Vec<f64> = (0..k).map(|i| vectors[i * k + col]).collect();
        // Canonical sign: largest-magnitude component positive, so the
        // view does not flip between otherwise identical runs.
        let lead = raw
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        raw.into_iter().map(|x| x * sign).collect()
    };
    let (a0, a1) = (axis(order[0]), axis(order[1]));
    positions
        .chunks(k)
        .map(|row| {
            let centered: Vec<f64> = row.iter().zip(&mean).map(|(x, m)| x - m).collect();
            [
                centered.iter().zip(&a0).map(|(x, a)| x * a).sum(),
                centered.iter().zip(&a1).map(|(x, a)| x * a).sum(),
            ]
        })
        .collect()
}

fn fit(points: &[[f64; 2]]) -> impl Fn([f64; 2]) -> [f64; 2] + '_ {
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in points {
        for d in 0..2 {
            min[d] = min[d].min(p[d]);
            max[d] = max[d].max(p[d]);
        }
    }
    let span = (max[0] - min[0]).max(max[1] - min[1]).max(1e-9);
    let scale = (WIDTH - 2.0 * MARGIN) / span;
    let center = [(min[0] + max[0]) / 2.0, (min[1] + max[1]) / 2.0];
    move |p: [f64; 2]| {
        [
            WIDTH / 2.0 + (p[0] - center[0]) * scale,
            // SVG y grows downward.
            HEIGHT / 2.0 - (p[1] - center[1]) * scale,
        ]
    }
}

fn svg_header(title: &str, width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n\
         <title>{title}</title>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\">{title}</text>\n",
        width / 2.0
    )
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter plot of flat `n x k` positions, one circle per node colored by
/// its truth label. Maps with k > 2 are projected onto their two
/// top-variance axes and the title says so.
pub fn scatter_svg(positions: &[f64], k: usize, labels: &[usize], title: &str) -> Result<String> {
    if k < 1 {
        return Err(Error::Config("map dimension k must be >= 1".into()));
    }
    if positions.is_empty() || positions.len() != labels.len() * k {
        return Err(Error::Artifact(format!(
            "scatter: {} coordinates do not match {} labels in {k} dims",
            positions.len(),
            labels.len()
        )));
    }
    if positions.iter().any(|v| !v.is_finite()) {
        return Err(Error::Artifact("scatter: non-finite coordinate".into()));
    }
    let full_title = if k > 2 {
        format!("{} (top-2 principal-variance view of {k}-D map)", escape(title))
    } else {
        escape(title)
    };
    let plane = to_plane(positions, k);
    let project = fit(&plane);
    let mut out = svg_header(&full_title, WIDTH, HEIGHT);
    for (node, (point, label)) in plane.iter().zip(labels).enumerate() {
        let [cx, cy] = project(*point);
        let color = PALETTE[label % PALETTE.len()];
        out.push_str(&format!(
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"5\" fill=\"{color}\" \
             stroke=\"black\" stroke-width=\"0.5\"><title>node {node} (label {label})\
             </title></circle>\n"
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Dendrogram of a Ward merge history: leaves ordered by tree traversal,
/// U-links at each merge's distance.
pub fn dendrogram_svg(dendrogram: &Dendrogram, title: &str) -> Result<String> {
    let merges = &dendrogram.merges;
    let n = merges.len() + 1;
    if n < 2 {
        return Err(Error::Artifact("dendrogram: no merges".into()));
    }
    for (i, m) in merges.iter().enumerate() {
        if m.a >= n + i || m.b >= n + i || m.a == m.b {
            return Err(Error::Artifact(format!(
                "dendrogram: merge {i} references invalid clusters {} and {}",
                m.a, m.b
            )));
        }
        if !(m.distance >= 0.0) {
            return Err(Error::Artifact(format!(
                "dendrogram: merge {i} has bad distance {}",
                m.distance
            )));
        }
    }

    // Left-to-right leaf order by explicit-stack traversal from the root.
    let mut leaf_order = Vec::with_capacity(n);
    let mut stack = vec![2 * n - 2];
    while let Some(id) = stack.pop() {
        if id < n {
            leaf_order.push(id);
        } else {
            let m = &merges[id - n];
            stack.push(m.b);
            stack.push(m.a);
        }
    }
    let mut x = vec![0.0; 2 * n - 1];
    let mut y = vec![0.0; 2 * n - 1];
    for (slot, &leaf) in leaf_order.iter().enumerate() {
        x[leaf] = slot as f64;
    }
    for (i, m) in merges.iter().enumerate() {
        x[n + i] = (x[m.a] + x[m.b]) / 2.0;
        y[n + i] = m.distance;
    }

    let max_y = y.iter().cloned().fold(0.0, f64::max).max(1e-9);
    let px = |slot: f64| MARGIN + slot * (WIDTH - 2.0 * MARGIN) / (n - 1).max(1) as f64;
    let py = |dist: f64| (HEIGHT - MARGIN) - dist / max_y * (HEIGHT - 2.0 * MARGIN);

    let mut out = svg_header(&escape(title), WIDTH, HEIGHT);
    for (i, m) in merges.iter().enumerate() {
        let top = py(y[n + i]);
        for child in [m.a, m.b] {
            out.push_str(&format!(
                "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" \
                 stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
                px(x[child]),
                py(y[child]),
                top,
            ));
        }
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{top:.2}\" x2=\"{:.2}\" y2=\"{top:.2}\" \
             stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
            px(x[m.a]),
            px(x[m.b]),
        ));
    }
    for &leaf in &leaf_order {
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"9\">{leaf}</text>\n",
            px(x[leaf]),
            HEIGHT - MARGIN + 14.0,
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
