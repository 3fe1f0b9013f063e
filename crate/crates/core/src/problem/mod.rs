//! CGCP environment generation: chunk structures, their adjacency and
//! transition matrices, random-walk sequences, named presets, and the
//! real-network benchmark fixtures.

pub mod graphs;
pub mod matrix;
pub mod presets;
pub mod structure;
pub mod walk;

pub use graphs::{builtin, load_graph, LabeledGraph, BUILTIN_GRAPHS};
pub use matrix::{AdjacencyMatrix, TransitionMatrix};
pub use presets::{all_presets, make_preset, relabel_shuffled, PresetFamily, PresetId};
pub use structure::{ChunkKind, ChunkSpec, ProblemStructure};
pub use walk::{random_walk, ContinualProblem, StateSequence};
