//! First-order Markov walks over transition matrices, including the
//! continual variant that swaps structures mid-sequence.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::matrix::TransitionMatrix;
use super::structure::ProblemStructure;
use crate::rng::{stream_rng, STREAM_WALK};
use crate::{Error, Result};

/// A generated walk: `states[0]` is the start state, each later entry one
/// transition. `tau` in experiment configs counts these entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSequence {
    pub states: Vec<usize>,
    pub seed: u64,
}

impl StateSequence {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Cumulative-probability sampler for one transition row.
struct RowSampler {
    // (cumulative probability, state); binary-searched per draw.
    cum: Vec<(f64, usize)>,
}

impl RowSampler {
    fn new(row: &[f64]) -> Self {
        let mut cum = Vec::new();
        let mut acc = 0.0;
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                cum.push((acc, j));
            }
        }
        // Guard against the row sum landing a hair under 1.0.
        if let Some(last) = cum.last_mut() {
            last.0 = f64::INFINITY;
        }
        Self { cum }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let r: f64 = rng.random();
        let idx = self.cum.partition_point(|&(c, _)| c <= r);
        self.cum[idx].1
    }
}

fn samplers(p: &TransitionMatrix) -> Vec<RowSampler> {
    (0..p.n()).map(|i| RowSampler::new(p.row(i))).collect()
}

fn draw_start(rng: &mut ChaCha8Rng, n: usize, start: Option<usize>) -> Result<usize> {
    match start {
        Some(s) if s < n => Ok(s),
        Some(s) => Err(Error::Structure(format!("start state {s} out of range 0..{n}"))),
        None => Ok(rng.random_range(0..n)),
    }
}

/// Walk `tau` states under `p`, seeding the walk stream of `seed`.
/// `start = None` draws the start state uniformly from the same stream.
pub fn random_walk(
    p: &TransitionMatrix,
    tau: usize,
    seed: u64,
    start: Option<usize>,
) -> Result<StateSequence> {
    let mut rng = stream_rng(seed, STREAM_WALK);
    let rows = samplers(p);
    let mut states = Vec::with_capacity(tau);
    if tau == 0 {
        return Ok(StateSequence { states, seed });
    }
    let mut s = draw_start(&mut rng, p.n(), start)?;
    states.push(s);
    for _ in 1..tau {
        s = rows[s].sample(&mut rng);
        states.push(s);
    }
    Ok(StateSequence { states, seed })
}

/// A CGCP whose structure changes once, with no reset of the walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinualProblem {
    pub phase_a: ProblemStructure,
    pub phase_b: ProblemStructure,
    /// Transition index at which the generator swaps structures: the
    /// transition producing `states[switch_step]` is the first to use
    /// phase B.
    pub switch_step: usize,
}

impl ContinualProblem {
    pub fn new(phase_a: ProblemStructure, phase_b: ProblemStructure, switch_step: usize) -> Result<Self> {
        if phase_a.n_states != phase_b.n_states {
            return Err(Error::Structure(format!(
                "phases disagree on state count: {} vs {}",
                phase_a.n_states, phase_b.n_states
            )));
        }
        phase_a.validate()?;
        phase_b.validate()?;
        Ok(Self { phase_a, phase_b, switch_step })
    }

    /// Walk `tau` states, switching transition matrices at `switch_step`.
    /// The crossing transition already follows phase B, so its endpoint is
    /// always reachable even if the current state's neighborhoods differ
    /// between phases.
    pub fn generate(&self, tau: usize, seed: u64, start: Option<usize>) -> Result<StateSequence> {
        let pa = TransitionMatrix::from_adjacency(&self.phase_a.build_adjacency()?)?;
        let pb = TransitionMatrix::from_adjacency(&self.phase_b.build_adjacency()?)?;
        let mut rng = stream_rng(seed, STREAM_WALK);
        let rows_a = samplers(&pa);
        let rows_b = samplers(&pb);
        let mut states = Vec::with_capacity(tau);
        if tau == 0 {
            return Ok(StateSequence { states, seed });
        }
        let mut s = draw_start(&mut rng, pa.n(), start)?;
        states.push(s);
        for t in 1..tau {
            let rows = if t < self.switch_step { &rows_a } else { &rows_b };
            s = rows[s].sample(&mut rng);
            states.push(s);
        }
        Ok(StateSequence { states, seed })
    }
}
