//! Self-organizing chunking dynamics over temporal sequences.
//!
//! This crate implements the SyncMap family of self-organizing dynamical
//! systems (the original dynamics and the symmetrical-activation variant)
//! together with everything needed to evaluate them on continual general
//! chunking problems (CGCPs):
//!
//! * [`problem`] — chunk-structured graph construction, random-walk sequence
//!   generation, continual (structure-switching) problems and real-world
//!   benchmark graphs with ground-truth labels.
//! * [`encoder`] — exponentially decaying input encoding with a configurable
//!   memory window.
//! * [`dynamics`] — the map dynamics: activation partitioning, symmetrical
//!   stochastic selection, centroid feedback updates, hypersphere
//!   normalization and the moving-average readout trace.
//! * [`clustering`] — DBSCAN and Ward-linkage readout of the learned map.
//! * [`metrics`] — normalized mutual information scoring.
//! * [`harness`] — seeded multi-trial experiments, aggregation and artifact
//!   emission.
//! * [`plot`] — SVG scatter and dendrogram rendering.

pub mod clustering;
pub mod dynamics;
pub mod encoder;
mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod plot;
pub mod problem;
pub mod rng;

pub use error::{Error, Result};
