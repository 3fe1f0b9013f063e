//! Named CGCP environments: twelve chunk-size triples and the long-term
//! ten-chunk layout, exposed under stable string ids.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;

use super::structure::{ChunkSpec, ProblemStructure};
use crate::rng::{stream_rng, STREAM_STRUCTURE};
use crate::{Error, Result};

/// Chunk-size triples offered for each preset family.
pub const TRIPLE_SIZES: [[usize; 3]; 4] = [[20, 20, 5], [20, 10, 5], [20, 5, 5], [15, 15, 5]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetFamily {
    Fixed,
    Probabilistic,
    Mixed,
}

impl PresetFamily {
    fn name(self) -> &'static str {
        match self {
            PresetFamily::Fixed => "fixed",
            PresetFamily::Probabilistic => "probabilistic",
            PresetFamily::Mixed => "mixed",
        }
    }
}

/// Stable identifier of a built-in environment, e.g. `mixed-20-10-5` or
/// `longterm-10x6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetId {
    Triple(PresetFamily, [usize; 3]),
    LongTerm,
}

/// All thirteen built-in presets in listing order.
pub fn all_presets() -> Vec<PresetId> {
    let mut out = Vec::new();
    for family in [PresetFamily::Fixed, PresetFamily::Probabilistic, PresetFamily::Mixed] {
        for sizes in TRIPLE_SIZES {
            out.push(PresetId::Triple(family, sizes));
        }
    }
    out.push(PresetId::LongTerm);
    out
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PresetId::Triple(family, [a, b, c]) => {
                write!(f, "{}-{a}-{b}-{c}", family.name())
            }
            PresetId::LongTerm => write!(f, "longterm-10x6"),
        }
    }
}

impl FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "longterm-10x6" {
            return Ok(PresetId::LongTerm);
        }
        let unknown = || Error::UnknownPreset(s.to_string());
        let (family, rest) = s.split_once('-').ok_or_else(unknown)?;
        let family = match family {
            "fixed" => PresetFamily::Fixed,
            "probabilistic" => PresetFamily::Probabilistic,
            "mixed" => PresetFamily::Mixed,
            _ => return Err(unknown()),
        };
        let sizes: Vec<usize> = rest
            .split('-')
            .map(|p| p.parse().map_err(|_| unknown()))
            .collect::<Result<_>>()?;
        let sizes: [usize; 3] = sizes.try_into().map_err(|_| unknown())?;
        if !TRIPLE_SIZES.contains(&sizes) {
            return Err(unknown());
        }
        Ok(PresetId::Triple(family, sizes))
    }
}

/// Consecutive state ranges for the given chunk sizes.
fn ranges(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut next = 0;
    sizes
        .iter()
        .map(|&len| {
            let r: Vec<usize> = (next..next + len).collect();
            next += len;
            r
        })
        .collect()
}

/// Chains with all-to-all chunk wiring: each exit feeds every other entry,
/// so the walk leaves a chunk to a uniformly random successor chunk.
pub fn fixed_chunks(sizes: &[usize]) -> Result<ProblemStructure> {
    let ranges = ranges(sizes);
    let chunks: Vec<ChunkSpec> = ranges.iter().cloned().map(ChunkSpec::fixed).collect();
    let mut wiring = Vec::new();
    for (i, from) in ranges.iter().enumerate() {
        for (j, to) in ranges.iter().enumerate() {
            if i != j {
                wiring.push((*from.last().unwrap(), to[0]));
            }
        }
    }
    ProblemStructure::new(chunks, sizes.iter().sum(), wiring)
}

/// Complete communities joined in a single exit-to-entry cycle: one external
/// edge per chunk keeps the internal-over-external degree margin maximal at
/// every size.
pub fn probabilistic_cycle(sizes: &[usize]) -> Result<ProblemStructure> {
    let ranges = ranges(sizes);
    let chunks: Vec<ChunkSpec> =
        ranges.iter().cloned().map(ChunkSpec::probabilistic_complete).collect();
    let wiring = cycle_wiring(&ranges);
    ProblemStructure::new(chunks, sizes.iter().sum(), wiring)
}

/// First probabilistic chunk, then the fixed chain, then the second
/// probabilistic chunk, wired exit-to-entry in a cycle.
pub fn mixed_cycle(sizes: [usize; 3]) -> Result<ProblemStructure> {
    let ranges = ranges(&sizes);
    let chunks = vec![
        ChunkSpec::probabilistic_complete(ranges[0].clone()),
        ChunkSpec::fixed(ranges[1].clone()),
        ChunkSpec::probabilistic_complete(ranges[2].clone()),
    ];
    let wiring = cycle_wiring(&ranges);
    ProblemStructure::new(chunks, sizes.iter().sum(), wiring)
}

fn cycle_wiring(ranges: &[Vec<usize>]) -> Vec<(usize, usize)> {
    (0..ranges.len())
        .map(|i| {
            let next = (i + 1) % ranges.len();
            (*ranges[i].last().unwrap(), ranges[next][0])
        })
        .collect()
}

/// Ten fixed chunks of six states; after the sixth state the walk jumps to
/// any other chunk's entry with equal probability.
pub fn longterm() -> Result<ProblemStructure> {
    fixed_chunks(&[6; 10])
}

/// Build the structure behind a preset id.
pub fn make_preset(id: PresetId) -> Result<ProblemStructure> {
    match id {
        PresetId::Triple(PresetFamily::Fixed, sizes) => fixed_chunks(&sizes),
        PresetId::Triple(PresetFamily::Probabilistic, sizes) => probabilistic_cycle(&sizes),
        PresetId::Triple(PresetFamily::Mixed, sizes) => mixed_cycle(sizes),
        PresetId::LongTerm => longterm(),
    }
}

/// The same environment under a seeded random renaming of states, drawn
/// from the structure stream. Used as the post-switch phase of continual
/// runs whose chunk sizes do not change.
pub fn relabel_shuffled(s: &ProblemStructure, seed: u64) -> Result<ProblemStructure> {
    let mut rng = stream_rng(seed, STREAM_STRUCTURE);
    let mut perm: Vec<usize> = (0..s.n_states).collect();
    perm.shuffle(&mut rng);
    s.relabel(&perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::structure::ChunkKind;

    #[test]
    fn ids_round_trip() {
        for id in all_presets() {
            let s = id.to_string();
            assert_eq!(s.parse::<PresetId>().unwrap(), id, "{s}");
        }
    }

    #[test]
    fn unknown_ids_rejected() {
        for s in ["fixed-1-2-3", "fixed-20-20", "laplacian-20-20-5", "longterm-9x6", ""] {
            assert!(s.parse::<PresetId>().is_err(), "{s:?} should not parse");
        }
    }

    #[test]
    fn fixed_20_20_5_shape() {
        let s = make_preset("fixed-20-20-5".parse().unwrap()).unwrap();
        assert_eq!(s.n_states, 45);
        assert_eq!(s.chunks.len(), 3);
        assert_eq!(s.chunks[0].states.len(), 20);
        assert_eq!(s.chunks[2].states.len(), 5);
        assert!(s.chunks.iter().all(|c| c.kind == ChunkKind::Fixed));
        // Each exit reaches both other entries.
        assert_eq!(s.wiring.len(), 6);
    }

    #[test]
    fn longterm_shape() {
        let s = make_preset(PresetId::LongTerm).unwrap();
        assert_eq!(s.n_states, 60);
        assert_eq!(s.chunks.len(), 10);
        assert!(s.chunks.iter().all(|c| c.states.len() == 6));
        let a = s.build_adjacency().unwrap();
        // Chunk tails fan out to the nine other heads.
        assert_eq!(a.out_degree(5), 9);
        assert_eq!(a.out_degree(0), 1);
    }

    #[test]
    fn mixed_20_10_5_orders_chunks() {
        let s = make_preset("mixed-20-10-5".parse().unwrap()).unwrap();
        assert_eq!(s.chunks[0].kind, ChunkKind::Probabilistic);
        assert_eq!(s.chunks[0].states.len(), 20);
        assert_eq!(s.chunks[1].kind, ChunkKind::Fixed);
        assert_eq!(s.chunks[1].states.len(), 10);
        assert_eq!(s.chunks[2].kind, ChunkKind::Probabilistic);
        assert_eq!(s.chunks[2].states.len(), 5);
    }

    #[test]
    fn every_preset_builds_and_connects() {
        for id in all_presets() {
            let s = make_preset(id).unwrap();
            let a = s.build_adjacency().unwrap_or_else(|e| panic!("{id}: {e}"));
            assert!(a.is_strongly_connected(), "{id}");
        }
    }

    #[test]
    fn community_margin_by_exhaustive_count() {
        // Recount the internal-vs-external degree margin from the raw edge
        // list for every probabilistic chunk.
        for id in all_presets() {
            let s = make_preset(id).unwrap();
            let a = s.build_adjacency().unwrap();
            let labels = s.truth_labels();
            for (c, chunk) in s.chunks.iter().enumerate() {
                if chunk.kind != ChunkKind::Probabilistic {
                    continue;
                }
                let mut internal = 0.0;
                let mut external = 0.0;
                for &i in &chunk.states {
                    for j in 0..s.n_states {
                        if a.get(i, j) {
                            if labels[j] == c {
                                internal += 0.5;
                            } else {
                                external += 1.0;
                            }
                        }
                    }
                }
                assert!(internal > external, "{id} chunk {c}: {internal} <= {external}");
            }
        }
    }

    #[test]
    fn shuffled_relabel_is_deterministic() {
        let s = make_preset(PresetId::LongTerm).unwrap();
        let a = relabel_shuffled(&s, 11).unwrap();
        let b = relabel_shuffled(&s, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(relabel_shuffled(&s, 12).unwrap(), a);
        // Still ten chunks of six over the same state range.
        assert_eq!(a.n_states, 60);
        assert!(a.validate().is_ok());
    }
}
