//! Exponentially decaying input encoding with a generalized memory window.
//!
//! Each state transition activates its state's entry at 1.0; the entry then
//! decays as `exp(-0.1 * (t - t_a))` per encoded step and is hard-zeroed
//! once `t - t_a >= m * tstep`. With the threshold derived from the window,
//! exactly the `m` most recent distinct states sit above threshold during
//! steady streaming.

use serde::{Deserialize, Serialize};

use crate::problem::StateSequence;
use crate::{Error, Result};

/// Per-encoded-step decay exponent; fixed because the threshold relation
/// `a = exp(-DECAY_RATE * m * tstep)` depends on it.
pub const DECAY_RATE: f64 = 0.1;

/// Activation threshold that keeps exactly `m` transitions in memory.
pub fn threshold_from_memory(m: usize, tstep: usize) -> Result<f64> {
    if m < 2 || tstep < 1 {
        return Err(Error::Config(format!(
            "memory window needs m >= 2 and tstep >= 1, got m={m} tstep={tstep}"
        )));
    }
    Ok((-DECAY_RATE * (m * tstep) as f64).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Encoded steps per state transition.
    pub tstep: usize,
    /// State memory in transitions.
    pub m: usize,
    /// Activation threshold separating the positive from the negative set.
    pub a: f64,
}

impl EncoderConfig {
    /// Threshold derived from the memory window.
    pub fn from_memory(m: usize, tstep: usize) -> Result<Self> {
        Ok(Self { tstep, m, a: threshold_from_memory(m, tstep)? })
    }

    /// Explicit threshold; the original baseline uses a literal `a = 0.1`
    /// even though its window formula would give `exp(-2)`.
    pub fn with_threshold(m: usize, tstep: usize, a: f64) -> Result<Self> {
        let cfg = Self { tstep, m, a };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 || self.tstep < 1 {
            return Err(Error::Config(format!(
                "memory window needs m >= 2 and tstep >= 1, got m={} tstep={}",
                self.m, self.tstep
            )));
        }
        if !(0.0..=1.0).contains(&self.a) {
            return Err(Error::Config(format!("threshold a={} outside [0,1]", self.a)));
        }
        Ok(())
    }

    /// Window length in encoded steps after which an entry is zeroed.
    pub fn window(&self) -> usize {
        self.m * self.tstep
    }
}

/// One encoded step: the input vector and the step it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedInput {
    pub step: usize,
    pub x: Vec<f64>,
}

/// Streaming encoder over a state sequence.
///
/// Pure function of `(seq, cfg)`: no RNG. The low-level [`Encoder::step_into`]
/// writes into a caller-owned buffer; the `Iterator` impl allocates a fresh
/// vector per step for convenience.
pub struct Encoder<'a> {
    seq: &'a [usize],
    cfg: EncoderConfig,
    n: usize,
    t: usize,
    total: usize,
    /// Last activation step per state; only meaningful for active states.
    t_last: Vec<usize>,
    /// States currently inside the memory window (at most m of them).
    active: Vec<usize>,
    /// `decay[dt] = exp(-DECAY_RATE * dt)` for dt in `0..window`.
    decay: Vec<f64>,
}

impl<'a> Encoder<'a> {
    pub fn new(seq: &'a StateSequence, n: usize, cfg: EncoderConfig) -> Result<Self> {
        cfg.validate()?;
        if let Some(&s) = seq.states.iter().find(|&&s| s >= n) {
            return Err(Error::Config(format!("sequence state {s} out of range 0..{n}")));
        }
        let decay = (0..cfg.window()).map(|dt| (-DECAY_RATE * dt as f64).exp()).collect();
        Ok(Self {
            seq: &seq.states,
            cfg,
            n,
            t: 0,
            total: seq.states.len() * cfg.tstep,
            t_last: vec![0; n],
            active: Vec::with_capacity(cfg.m + 1),
            decay,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Encoded steps the full stream will emit: `tau * tstep`.
    pub fn total_steps(&self) -> usize {
        self.total
    }

    /// Advance one encoded step, writing the input vector into `x`.
    /// Returns the step index, or `None` once the stream is exhausted.
    pub fn step_into(&mut self, x: &mut [f64]) -> Option<usize> {
        assert_eq!(x.len(), self.n);
        if self.t >= self.total {
            return None;
        }
        let t = self.t;
        if t % self.cfg.tstep == 0 {
            let s = self.seq[t / self.cfg.tstep];
            if !self.active.contains(&s) {
                self.active.push(s);
            }
            self.t_last[s] = t;
        }
        // Retire entries that left the window, then emit the survivors.
        let window = self.cfg.window();
        let mut i = 0;
        while i < self.active.len() {
            if t - self.t_last[self.active[i]] >= window {
                self.active.swap_remove(i);
            } else {
                i += 1;
            }
        }
        x.fill(0.0);
        for &s in &self.active {
            x[s] = self.decay[t - self.t_last[s]];
        }
        self.t += 1;
        Some(t)
    }
}

impl Iterator for Encoder<'_> {
    type Item = EncodedInput;

    fn next(&mut self) -> Option<EncodedInput> {
        let mut x = vec![0.0; self.n];
        let step = self.step_into(&mut x)?;
        Some(EncodedInput { step, x })
    }
}
