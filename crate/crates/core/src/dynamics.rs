//! The self-organizing map dynamics: activation partitioning, symmetrical
//! stochastic selection, centroid feedback updates, hypersphere
//! normalization and the moving-average readout trace.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::{Encoder, EncoderConfig};
use crate::problem::StateSequence;
use crate::rng::{stream_rng, STREAM_INIT, STREAM_SELECT};
use crate::{Error, Result};

/// Nodes closer than this to their centroid skip the update (the unit
/// vector is undefined at the singularity).
pub const SINGULARITY_EPS: f64 = 1e-12;

/// Which dynamics rule set drives training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Baseline: all above-threshold nodes attract, the full complement
    /// repels, cluster readout on a snapshot of the map.
    Original,
    /// Symmetrical activation (equal positive/negative set sizes via
    /// stochastic selection) plus moving-average readout.
    Symmetrical,
    /// Baseline rule set with the wider memory window (m=3).
    AblationWindowOnly,
    /// Symmetrical activation on the baseline window (m=2).
    AblationSymmetricalOnly,
}

impl Variant {
    /// Variants that use stochastic selection and the moving-average readout.
    pub fn symmetrical_family(self) -> bool {
        matches!(self, Variant::Symmetrical | Variant::AblationSymmetricalOnly)
    }

    pub fn default_m(self) -> usize {
        match self {
            Variant::Original | Variant::AblationSymmetricalOnly => 2,
            Variant::Symmetrical | Variant::AblationWindowOnly => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Symmetrical => "symmetrical",
            Variant::AblationWindowOnly => "window-only",
            Variant::AblationSymmetricalOnly => "symmetrical-only",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Variant::Original),
            "symmetrical" => Ok(Variant::Symmetrical),
            "window-only" => Ok(Variant::AblationWindowOnly),
            "symmetrical-only" => Ok(Variant::AblationSymmetricalOnly),
            _ => Err(Error::Config(format!("unknown variant {s:?}"))),
        }
    }
}

/// How positions are kept inside the radius after each update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Center, then rescale all nodes uniformly if any exceeds the radius
    /// (similarity transform; preserves distance ratios). Default.
    Rescale,
    /// Center, then clamp each node's norm to the radius individually.
    Project,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Rescale => "rescale",
            Normalization::Project => "project",
        })
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rescale" => Ok(Normalization::Rescale),
            "project" => Ok(Normalization::Project),
            _ => Err(Error::Config(format!("unknown normalization {s:?}"))),
        }
    }
}

/// When the moving average absorbs the current positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaFold {
    /// Every encoded step (default; finest trace).
    EveryStep,
    /// Only on encoded steps that begin a state transition.
    EveryTransition,
}

impl fmt::Display for MaFold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaFold::EveryStep => "every-step",
            MaFold::EveryTransition => "every-transition",
        })
    }
}

impl FromStr for MaFold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "every-step" => Ok(MaFold::EveryStep),
            "every-transition" => Ok(MaFold::EveryTransition),
            _ => Err(Error::Config(format!("unknown ma fold mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    /// Map dimension.
    pub k: usize,
    /// Learning-rate base; the effective rate is `alpha_base * n`.
    pub alpha_base: f64,
    pub variant: Variant,
    /// State memory in transitions; must match the encoder's.
    pub m: usize,
    /// Stochastic-selection probability (symmetrical family, m > 2).
    pub pr: f64,
    /// Normalization hypersphere radius.
    pub radius: f64,
    /// Moving-average window in encoded steps.
    pub ma_window: usize,
    pub normalization: Normalization,
    pub ma_fold: MaFold,
    pub seed: u64,
}

impl DynamicsConfig {
    /// Published defaults: k=3, α=0.001·n, Pr=0.3, radius 10, 10000-step
    /// moving average; `m` follows the variant.
    pub fn benchmark_default(variant: Variant) -> Self {
        Self {
            k: 3,
            alpha_base: 0.001,
            variant,
            m: variant.default_m(),
            pr: 0.3,
            radius: 10.0,
            ma_window: 10_000,
            normalization: Normalization::Rescale,
            ma_fold: MaFold::EveryStep,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::Config("map dimension k must be >= 1".into()));
        }
        if !(self.alpha_base > 0.0) {
            return Err(Error::Config(format!("alpha_base {} must be > 0", self.alpha_base)));
        }
        if !(0.0..=1.0).contains(&self.pr) {
            return Err(Error::Config(format!("pr {} outside [0,1]", self.pr)));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Config(format!("radius {} must be > 0", self.radius)));
        }
        if self.ma_window < 1 {
            return Err(Error::Config("ma_window must be >= 1".into()));
        }
        if self.m < 2 {
            return Err(Error::Config(format!("m {} must be >= 2", self.m)));
        }
        match self.variant {
            Variant::Original | Variant::AblationSymmetricalOnly if self.m != 2 => Err(
                Error::Config(format!("variant {} requires m=2, got m={}", self.variant, self.m)),
            ),
            _ => Ok(()),
        }
    }

    /// Effective learning rate for an n-node map.
    pub fn alpha(&self, n: usize) -> f64 {
        self.alpha_base * n as f64
    }
}

/// Uniform moving average over a ring of the last `window` position folds.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingAverage {
    window: usize,
    dim: usize,
    buf: Vec<f64>,
    sum: Vec<f64>,
    filled: usize,
    head: usize,
}

impl MovingAverage {
    fn new(window: usize, dim: usize) -> Self {
        Self { window, dim, buf: vec![0.0; window * dim], sum: vec![0.0; dim], filled: 0, head: 0 }
    }

    fn fold(&mut self, w: &[f64]) {
        debug_assert_eq!(w.len(), self.dim);
        let slot = &mut self.buf[self.head * self.dim..(self.head + 1) * self.dim];
        if self.filled == self.window {
            for (s, (&new, old)) in self.sum.iter_mut().zip(w.iter().zip(slot.iter_mut())) {
                *s += new - *old;
                *old = new;
            }
        } else {
            self.filled += 1;
            for (s, (&new, old)) in self.sum.iter_mut().zip(w.iter().zip(slot.iter_mut())) {
                *s += new;
                *old = new;
            }
        }
        self.head = (self.head + 1) % self.window;
    }

    fn positions(&self) -> Vec<f64> {
        let inv = 1.0 / self.filled as f64;
        self.sum.iter().map(|&s| s * inv).collect()
    }
}

/// The evolving map: one k-dimensional position per state.
#[derive(Debug, Clone, PartialEq)]
pub struct MapState {
    pub k: usize,
    /// Row-major n x k positions.
    pub w: Vec<f64>,
    /// Encoded steps processed so far.
    pub t: usize,
    ma: MovingAverage,
}

impl MapState {
    pub fn n(&self) -> usize {
        self.w.len() / self.k
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.w[i * self.k..(i + 1) * self.k]
    }

    /// Moving-average positions over the fold window.
    pub fn ma_positions(&self) -> Vec<f64> {
        self.ma.positions()
    }

    /// Largest node norm after centering; the normalization contract keeps
    /// this at or below the radius.
    pub fn centered_max_norm(&self) -> f64 {
        let (n, k) = (self.n(), self.k);
        let mut mean = vec![0.0; k];
        for i in 0..n {
            for d in 0..k {
                mean[d] += self.w[i * k + d];
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut max2: f64 = 0.0;
        for i in 0..n {
            let mut norm2 = 0.0;
            for d in 0..k {
                let v = self.w[i * k + d] - mean[d];
                norm2 += v * v;
            }
            max2 = max2.max(norm2);
        }
        max2.sqrt()
    }
}

/// Random initial map: i.i.d. uniform in `[-radius/10, radius/10]^k` from
/// the init stream, then one normalization pass; the moving average starts
/// at the initial positions.
pub fn init_map(n: usize, cfg: &DynamicsConfig) -> Result<MapState> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::Config(format!("map needs at least 2 nodes, got {n}")));
    }
    let mut rng = stream_rng(cfg.seed, STREAM_INIT);
    let scale = cfg.radius / 10.0;
    let mut w: Vec<f64> = (0..n * cfg.k).map(|_| rng.random_range(-scale..scale)).collect();
    normalize(&mut w, cfg.k, cfg.radius, cfg.normalization);
    let mut ma = MovingAverage::new(cfg.ma_window, n * cfg.k);
    ma.fold(&w);
    Ok(MapState { k: cfg.k, w, t: 0, ma })
}

/// Above-threshold nodes and their complement: `ps = {i : x_i > a}`.
pub fn partition(x: &[f64], a: f64) -> (Vec<usize>, Vec<usize>) {
    let mut ps = Vec::new();
    let mut ns = Vec::new();
    partition_into(x, a, &mut ps, &mut ns);
    (ps, ns)
}

fn partition_into(x: &[f64], a: f64, ps: &mut Vec<usize>, ns: &mut Vec<usize>) {
    ps.clear();
    ns.clear();
    for (i, &v) in x.iter().enumerate() {
        if v > a {
            ps.push(i);
        } else {
            ns.push(i);
        }
    }
}

/// The positive and negative activation sets driving one update.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActivationSets {
    pub ps: Vec<usize>,
    pub ns: Vec<usize>,
}

struct SelectScratch {
    in_ps: Vec<bool>,
    complement: Vec<usize>,
}

impl SelectScratch {
    fn new(n: usize) -> Self {
        Self { in_ps: vec![false; n], complement: Vec::with_capacity(n) }
    }
}

/// Symmetrical stochastic selection.
///
/// A positive pair is activated every step: for m > 2, with probability
/// `pr` the pair is sampled uniformly from the whole memory window,
/// otherwise the two most recent states (largest activations) are taken.
/// For m = 2 the window already is the most-recent pair. The negative set
/// draws `|ps|` nodes from everything outside `ps`, so inhibited positives
/// may land in it. Fewer than 2 positive candidates (or not enough
/// negatives) yields empty sets, which the cardinality guard turns into a
/// skipped update.
pub fn symmetrical_select(
    ps_temp: &[usize],
    x: &[f64],
    n: usize,
    m: usize,
    pr: f64,
    rng: &mut ChaCha8Rng,
) -> ActivationSets {
    let mut sets = ActivationSets::default();
    let mut scratch = SelectScratch::new(n);
    select_into(ps_temp, x, n, m, pr, rng, &mut sets, &mut scratch);
    sets
}

fn select_into(
    ps_temp: &[usize],
    x: &[f64],
    n: usize,
    m: usize,
    pr: f64,
    rng: &mut ChaCha8Rng,
    sets: &mut ActivationSets,
    scratch: &mut SelectScratch,
) {
    sets.ps.clear();
    sets.ns.clear();
    if ps_temp.len() < 2 {
        return;
    }
    if m > 2 && rng.random::<f64>() < pr {
        let picked = rand::seq::index::sample(rng, ps_temp.len(), 2);
        sets.ps.push(ps_temp[picked.index(0)]);
        sets.ps.push(ps_temp[picked.index(1)]);
    } else if m > 2 {
        let (first, second) = top_two_by_activation(ps_temp, x);
        sets.ps.push(first);
        sets.ps.push(second);
    } else {
        sets.ps.extend_from_slice(ps_temp);
    }
    let m_neg = sets.ps.len();
    scratch.in_ps.fill(false);
    for &i in &sets.ps {
        scratch.in_ps[i] = true;
    }
    scratch.complement.clear();
    scratch.complement.extend((0..n).filter(|&i| !scratch.in_ps[i]));
    if scratch.complement.len() < m_neg {
        sets.ps.clear();
        return;
    }
    let picked = rand::seq::index::sample(rng, scratch.complement.len(), m_neg);
    sets.ns.extend(picked.iter().map(|j| scratch.complement[j]));
}

/// The two most recently activated candidates: decay makes activation a
/// strict recency order. Ties (identical values) fall back to index order.
fn top_two_by_activation(ps_temp: &[usize], x: &[f64]) -> (usize, usize) {
    debug_assert!(ps_temp.len() >= 2);
    let (mut first, mut second) = (ps_temp[0], ps_temp[1]);
    if x[second] > x[first] {
        std::mem::swap(&mut first, &mut second);
    }
    for &i in &ps_temp[2..] {
        if x[i] > x[first] {
            second = first;
            first = i;
        } else if x[i] > x[second] {
            second = i;
        }
    }
    (first, second)
}

/// Means of the positive and negative sets' positions.
pub fn centroids(w: &[f64], k: usize, sets: &ActivationSets) -> (Vec<f64>, Vec<f64>) {
    let mut cp = vec![0.0; k];
    let mut cn = vec![0.0; k];
    centroids_into(w, k, sets, &mut cp, &mut cn);
    (cp, cn)
}

fn centroids_into(w: &[f64], k: usize, sets: &ActivationSets, cp: &mut [f64], cn: &mut [f64]) {
    mean_into(w, k, &sets.ps, cp);
    mean_into(w, k, &sets.ns, cn);
}

fn mean_into(w: &[f64], k: usize, idx: &[usize], out: &mut [f64]) {
    out.fill(0.0);
    for &i in idx {
        for d in 0..k {
            out[d] += w[i * k + d];
        }
    }
    let inv = 1.0 / idx.len() as f64;
    for o in out.iter_mut() {
        *o *= inv;
    }
}

/// Apply one feedback update: positives step distance α toward `cp` along
/// the unit vector, negatives step α away from `cn`; everything else is
/// untouched. Nodes within [`SINGULARITY_EPS`] of their centroid skip.
pub fn update_step(
    w: &mut [f64],
    k: usize,
    sets: &ActivationSets,
    cp: &[f64],
    cn: &[f64],
    alpha: f64,
) {
    for &i in &sets.ps {
        feedback(&mut w[i * k..(i + 1) * k], cp, alpha, -1.0);
    }
    for &i in &sets.ns {
        feedback(&mut w[i * k..(i + 1) * k], cn, alpha, 1.0);
    }
}

/// `sign = -1` pulls toward the centroid, `+1` pushes away.
fn feedback(wi: &mut [f64], c: &[f64], alpha: f64, sign: f64) {
    let mut dist2 = 0.0;
    for d in 0..wi.len() {
        let diff = wi[d] - c[d];
        dist2 += diff * diff;
    }
    let dist = dist2.sqrt();
    if dist < SINGULARITY_EPS {
        return;
    }
    let scale = sign * alpha / dist;
    let mut moved2 = 0.0;
    for d in 0..wi.len() {
        let step = scale * (wi[d] - c[d]);
        wi[d] += step;
        moved2 += step * step;
    }
    debug_assert!(
        (moved2.sqrt() - alpha).abs() <= 1e-9,
        "updated node moved {} instead of alpha={alpha}",
        moved2.sqrt()
    );
}

/// Center the map on its mean, then bound it by the radius according to
/// the normalization mode.
pub fn normalize(w: &mut [f64], k: usize, radius: f64, mode: Normalization) {
    let n = w.len() / k;
    let mut mean = vec![0.0; k];
    for i in 0..n {
        for d in 0..k {
            mean[d] += w[i * k + d];
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut max2: f64 = 0.0;
    for i in 0..n {
        let mut norm2 = 0.0;
        for d in 0..k {
            let v = w[i * k + d] - mean[d];
            w[i * k + d] = v;
            norm2 += v * v;
        }
        max2 = max2.max(norm2);
        if mode == Normalization::Project && norm2 > radius * radius {
            let s = radius / norm2.sqrt();
            for d in 0..k {
                w[i * k + d] *= s;
            }
        }
    }
    if mode == Normalization::Rescale && max2 > radius * radius {
        let s = radius / max2.sqrt();
        for v in w.iter_mut() {
            *v *= s;
        }
    }
}

/// What one encoded step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub step: usize,
    /// Whether the cardinality guard let the update run.
    pub fired: bool,
    pub ps_len: usize,
    pub ns_len: usize,
}

/// Sequential trainer owning the map, the selection RNG and scratch space.
pub struct Trainer {
    cfg: DynamicsConfig,
    enc: EncoderConfig,
    n: usize,
    alpha: f64,
    state: MapState,
    rng: ChaCha8Rng,
    sets: ActivationSets,
    ps_temp: Vec<usize>,
    ns_temp: Vec<usize>,
    scratch: SelectScratch,
    cp: Vec<f64>,
    cn: Vec<f64>,
}

impl Trainer {
    pub fn new(n: usize, enc: EncoderConfig, cfg: DynamicsConfig) -> Result<Self> {
        let state = init_map(n, &cfg)?;
        Self::from_state(state, enc, cfg)
    }

    /// Resume (or start) from explicit positions; used when a caller wants
    /// control over initialization.
    pub fn from_state(state: MapState, enc: EncoderConfig, cfg: DynamicsConfig) -> Result<Self> {
        cfg.validate()?;
        enc.validate()?;
        if enc.m != cfg.m {
            return Err(Error::Config(format!(
                "encoder m={} disagrees with dynamics m={}",
                enc.m, cfg.m
            )));
        }
        if state.k != cfg.k {
            return Err(Error::Config(format!(
                "map dimension {} disagrees with config k={}",
                state.k, cfg.k
            )));
        }
        let n = state.n();
        Ok(Self {
            alpha: cfg.alpha(n),
            rng: stream_rng(cfg.seed, STREAM_SELECT),
            sets: ActivationSets::default(),
            ps_temp: Vec::with_capacity(n),
            ns_temp: Vec::with_capacity(n),
            scratch: SelectScratch::new(n),
            cp: vec![0.0; cfg.k],
            cn: vec![0.0; cfg.k],
            cfg,
            enc,
            n,
            state,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn config(&self) -> &DynamicsConfig {
        &self.cfg
    }

    pub fn encoder_config(&self) -> &EncoderConfig {
        &self.enc
    }

    pub fn state(&self) -> &MapState {
        &self.state
    }

    pub fn into_state(self) -> MapState {
        self.state
    }

    /// The positions the clusterer should see: moving average for the
    /// symmetrical family, the raw snapshot otherwise.
    pub fn readout_positions(&self) -> Vec<f64> {
        if self.cfg.variant.symmetrical_family() {
            self.state.ma_positions()
        } else {
            self.state.w.clone()
        }
    }

    /// Process one encoded input vector.
    pub fn step(&mut self, x: &[f64]) -> StepOutcome {
        debug_assert_eq!(x.len(), self.n);
        let step = self.state.t;
        partition_into(x, self.enc.a, &mut self.ps_temp, &mut self.ns_temp);
        if self.cfg.variant.symmetrical_family() {
            select_into(
                &self.ps_temp,
                x,
                self.n,
                self.cfg.m,
                self.cfg.pr,
                &mut self.rng,
                &mut self.sets,
                &mut self.scratch,
            );
        } else {
            self.sets.ps.clear();
            self.sets.ps.extend_from_slice(&self.ps_temp);
            self.sets.ns.clear();
            self.sets.ns.extend_from_slice(&self.ns_temp);
        }
        let fired = self.sets.ps.len() > 1 && self.sets.ns.len() > 1;
        if fired {
            debug_assert!(
                !self.cfg.variant.symmetrical_family()
                    || self.sets.ps.len() == self.sets.ns.len(),
                "symmetry broken: |ps|={} |ns|={}",
                self.sets.ps.len(),
                self.sets.ns.len()
            );
            centroids_into(&self.state.w, self.cfg.k, &self.sets, &mut self.cp, &mut self.cn);
            update_step(&mut self.state.w, self.cfg.k, &self.sets, &self.cp, &self.cn, self.alpha);
            normalize(&mut self.state.w, self.cfg.k, self.cfg.radius, self.cfg.normalization);
        }
        let fold = match self.cfg.ma_fold {
            MaFold::EveryStep => true,
            MaFold::EveryTransition => step % self.enc.tstep == 0,
        };
        if fold {
            self.state.ma.fold(&self.state.w);
        }
        self.state.t += 1;
        StepOutcome { step, fired, ps_len: self.sets.ps.len(), ns_len: self.sets.ns.len() }
    }
}

/// Periodic capture of the map during training.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// Encoded steps completed when the snapshot was taken.
    pub step: usize,
    /// Raw positions.
    pub raw: Vec<f64>,
    /// Variant-appropriate readout positions (see
    /// [`Trainer::readout_positions`]).
    pub readout: Vec<f64>,
}

/// A finished training run.
#[derive(Debug, Clone)]
pub struct Trained {
    pub state: MapState,
    /// Final readout positions.
    pub readout: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// How many encoded steps actually fired an update.
    pub fired_steps: usize,
}

/// Train a fresh map over the encoded sequence. `snapshot_every` (encoded
/// steps) captures the map for NMI-over-time traces.
pub fn train(
    seq: &StateSequence,
    n: usize,
    enc: EncoderConfig,
    cfg: DynamicsConfig,
    snapshot_every: Option<usize>,
) -> Result<Trained> {
    let trainer = Trainer::new(n, enc, cfg)?;
    train_with(trainer, seq, snapshot_every)
}

/// Drive an existing trainer over a sequence.
pub fn train_with(
    mut trainer: Trainer,
    seq: &StateSequence,
    snapshot_every: Option<usize>,
) -> Result<Trained> {
    let enc_cfg = *trainer.encoder_config();
    let mut encoder = Encoder::new(seq, trainer.n(), enc_cfg)?;
    let mut x = vec![0.0; trainer.n()];
    let mut snapshots = Vec::new();
    let mut fired_steps = 0;
    while encoder.step_into(&mut x).is_some() {
        let out = trainer.step(&x);
        if out.fired {
            fired_steps += 1;
        }
        if let Some(every) = snapshot_every {
            if (out.step + 1) % every == 0 {
                snapshots.push(Snapshot {
                    step: out.step + 1,
                    raw: trainer.state().w.clone(),
                    readout: trainer.readout_positions(),
                });
            }
        }
    }
    Ok(Trained {
        readout: trainer.readout_positions(),
        state: trainer.into_state(),
        snapshots,
        fired_steps,
    })
}
