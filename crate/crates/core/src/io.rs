//! Text artifact formats: map snapshot CSV, NMI trace CSV, assignment CSV,
//! label/sequence files and dendrogram text. Writers emit full-precision
//! decimal (shortest round-tripping form); parsers reject malformed input
//! with [`Error::Artifact`].

use crate::clustering::{Dendrogram, Merge};
use crate::problem::{AdjacencyMatrix, TransitionMatrix};
use crate::{Error, Result};

/// One map snapshot: `positions` is flat row-major `n x k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFrame {
    pub step: usize,
    pub positions: Vec<f64>,
}

/// A parsed or to-be-written map CSV: one or more frames of `n` nodes in
/// `k` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct MapDump {
    pub k: usize,
    pub frames: Vec<MapFrame>,
}

impl MapDump {
    pub fn n(&self) -> usize {
        self.frames.first().map_or(0, |f| f.positions.len() / self.k)
    }

    pub fn final_frame(&self) -> Option<&MapFrame> {
        self.frames.last()
    }
}

fn artifact(msg: impl Into<String>) -> Error {
    Error::Artifact(msg.into())
}

/// Non-comment, non-blank lines.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// `step,node_id,coord_0..coord_{k-1}` rows, one per node per frame.
pub fn map_csv(dump: &MapDump) -> String {
    let mut out = String::from("step,node_id");
    for d in 0..dump.k {
        out.push_str(&format!(",coord_{d}"));
    }
    out.push('\n');
    for frame in &dump.frames {
        for (node, coords) in frame.positions.chunks(dump.k).enumerate() {
            out.push_str(&format!("{},{}", frame.step, node));
            for c in coords {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
    }
    out
}

/// Inverse of [`map_csv`]. Frames are consecutive runs of equal `step`;
/// node ids must count up from 0 within each frame and every frame must
/// hold the same number of nodes.
pub fn parse_map_csv(text: &str) -> Result<MapDump> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines
        .next()
        .ok_or_else(|| artifact("map csv: empty file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "step" || cols[1] != "node_id" {
        return Err(artifact(format!("map csv: bad header `{header}`")));
    }
    let k = cols.len() - 2;
    let mut frames: Vec<MapFrame> = Vec::new();
    for (line_no, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != k + 2 {
            return Err(artifact(format!(
                "map csv line {line_no}: expected {} fields, got {}",
                k + 2,
                fields.len()
            )));
        }
        let step: usize = fields[0]
            .parse()
            .map_err(|_| artifact(format!("map csv line {line_no}: bad step `{}`", fields[0])))?;
        let node: usize = fields[1]
            .parse()
            .map_err(|_| artifact(format!("map csv line {line_no}: bad node `{}`", fields[1])))?;
        if frames.last().is_none_or(|f| f.step != step) {
            frames.push(MapFrame { step, positions: Vec::new() });
        }
        let frame = frames.last_mut().unwrap();
        if node != frame.positions.len() / k {
            return Err(artifact(format!(
                "map csv line {line_no}: node {node} out of order"
            )));
        }
        for field in &fields[2..] {
            let v: f64 = field
                .parse()
                .map_err(|_| artifact(format!("map csv line {line_no}: bad value `{field}`")))?;
            frame.positions.push(v);
        }
    }
    if frames.is_empty() {
        return Err(artifact("map csv: no data rows"));
    }
    let n = frames[0].positions.len() / k;
    if frames.iter().any(|f| f.positions.len() != n * k) {
        return Err(artifact("map csv: frames differ in node count"));
    }
    Ok(MapDump { k, frames })
}

/// `step,trial,nmi` rows.
pub fn trace_csv(rows: &[(usize, u32, f64)]) -> String {
    let mut out = String::from("step,trial,nmi\n");
    for (step, trial, nmi) in rows {
        out.push_str(&format!("{step},{trial},{nmi}\n"));
    }
    out
}

/// `node_id,label` rows for a clustering.
pub fn assignment_csv(labels: &[usize]) -> String {
    let mut out = String::from("node_id,label\n");
    for (node, label) in labels.iter().enumerate() {
        out.push_str(&format!("{node},{label}\n"));
    }
    out
}

/// One label per line (`#` comments and blanks allowed) — the same shape
/// as the bundled graph label fixtures.
pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    let mut labels = Vec::new();
    for (line_no, line) in data_lines(text) {
        let label: usize = line
            .parse()
            .map_err(|_| artifact(format!("labels line {line_no}: bad label `{line}`")))?;
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(artifact("labels: no entries"));
    }
    Ok(labels)
}

/// Inverse of [`parse_labels`]: one label per line.
pub fn labels_file(labels: &[usize]) -> String {
    let mut out = String::new();
    for l in labels {
        out.push_str(&format!("{l}\n"));
    }
    out
}

/// One state per line.
pub fn sequence_file(states: &[usize]) -> String {
    let mut out = String::new();
    for s in states {
        out.push_str(&format!("{s}\n"));
    }
    out
}

pub fn parse_sequence(text: &str) -> Result<Vec<usize>> {
    let mut states = Vec::new();
    for (line_no, line) in data_lines(text) {
        let s: usize = line
            .parse()
            .map_err(|_| artifact(format!("sequence line {line_no}: bad state `{line}`")))?;
        states.push(s);
    }
    Ok(states)
}

/// Dense 0/1 rows, comma separated.
pub fn adjacency_csv(a: &AdjacencyMatrix) -> String {
    let mut out = String::new();
    for i in 0..a.n() {
        let row: Vec<String> = (0..a.n()).map(|j| u8::from(a.get(i, j)).to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Dense probability rows, comma separated, full precision.
pub fn transition_csv(p: &TransitionMatrix) -> String {
    let mut out = String::new();
    for i in 0..p.n() {
        let row: Vec<String> = p.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Inverse of [`crate::clustering::export_dendrogram`]: `a b dist size`
/// per line.
pub fn parse_dendrogram(text: &str) -> Result<Dendrogram> {
    let mut merges = Vec::new();
    for (line_no, line) in data_lines(text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(artifact(format!(
                "dendrogram line {line_no}: expected 4 fields, got {}",
                fields.len()
            )));
        }
        let parse_usize = |f: &str| {
            f.parse::<usize>()
                .map_err(|_| artifact(format!("dendrogram line {line_no}: bad field `{f}`")))
        };
        let distance: f64 = fields[2]
            .parse()
            .map_err(|_| artifact(format!("dendrogram line {line_no}: bad field `{}`", fields[2])))?;
        merges.push(Merge {
            a: parse_usize(fields[0])?,
            b: parse_usize(fields[1])?,
            distance,
            size: parse_usize(fields[3])?,
        });
    }
    if merges.is_empty() {
        return Err(artifact("dendrogram: no merges"));
    }
    Ok(Dendrogram { merges })
}
