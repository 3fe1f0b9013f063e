//! Seeded multi-trial experiment execution: problem generation, training,
//! readout clustering, NMI scoring and aggregation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde_json::json;

use crate::clustering::{ward_cluster, Clusterer, Dendrogram};
use crate::dynamics::{train, Snapshot, Variant};
use crate::harness::config::{ExperimentConfig, ProblemSource};
use crate::metrics::nmi;
use crate::problem::{
    builtin, make_preset, random_walk, relabel_shuffled, ContinualProblem, StateSequence,
    TransitionMatrix,
};
use crate::{Error, Result};

/// One trial's complete output.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub seed: u64,
    pub final_nmi: f64,
    pub runtime_s: f64,
    /// `(encoded step, nmi)` per snapshot; empty when `snapshot_every` is 0.
    pub trace: Vec<(usize, f64)>,
    pub snapshots: Vec<Snapshot>,
    /// Final raw node positions, flat `n x k`.
    pub final_raw: Vec<f64>,
    /// Final readout positions (snapshot or moving average per variant).
    pub final_readout: Vec<f64>,
    /// Final cluster labels, one per node.
    pub assignment: Vec<usize>,
    /// Truth labels the final map was scored against.
    pub truth: Vec<usize>,
    /// Merge history when the clusterer is Ward.
    pub dendrogram: Option<Dendrogram>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    /// Population standard deviation of the trial NMIs.
    pub std: f64,
}

pub fn aggregate(values: &[f64]) -> Aggregate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Aggregate { mean, std: var.sqrt() }
}

/// A full experiment: per-trial outcomes plus the aggregate over final
/// NMIs.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialOutcome>,
    pub aggregate: Aggregate,
}

impl RunOutcome {
    /// `{config, trials: [{seed, final_nmi, runtime_s}], aggregate}` as
    /// pretty JSON.
    pub fn results_json(&self) -> String {
        let trials: Vec<_> = self
            .trials
            .iter()
            .map(|t| {
                json!({
                    "seed": t.seed,
                    "final_nmi": t.final_nmi,
                    "runtime_s": t.runtime_s,
                })
            })
            .collect();
        let value = json!({
            "config": self.config.to_json(),
            "trials": trials,
            "aggregate": { "mean": self.aggregate.mean, "std": self.aggregate.std },
        });
        let mut text = serde_json::to_string_pretty(&value).expect("json serialization");
        text.push('\n');
        text
    }

    /// All trials' traces as `(step, trial, nmi)` rows.
    pub fn trace_rows(&self) -> Vec<(usize, u32, f64)> {
        let mut rows = Vec::new();
        for (i, t) in self.trials.iter().enumerate() {
            for &(step, score) in &t.trace {
                rows.push((step, i as u32, score));
            }
        }
        rows
    }
}

/// A generated problem instance for one trial.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub seq: StateSequence,
    pub truth_a: Vec<usize>,
    /// Post-switch truth (continual problems only).
    pub truth_b: Option<Vec<usize>>,
    /// Encoded step at which phase B starts driving the input.
    pub switch_encoded: Option<usize>,
}

impl ProblemInstance {
    /// Truth for a snapshot taken after `step` encoded steps.
    pub fn truth_at(&self, step: usize) -> &[usize] {
        match (&self.truth_b, self.switch_encoded) {
            (Some(b), Some(at)) if step > at => b,
            _ => &self.truth_a,
        }
    }

    pub fn final_truth(&self) -> &[usize] {
        self.truth_b.as_deref().unwrap_or(&self.truth_a)
    }
}

/// Generate the training sequence and truth labels for one trial's seed.
pub fn build_problem(cfg: &ExperimentConfig, seed: u64) -> Result<ProblemInstance> {
    match &cfg.problem {
        ProblemSource::Preset(id) => {
            let structure = make_preset(*id)?;
            let p = TransitionMatrix::from_adjacency(&structure.build_adjacency()?)?;
            Ok(ProblemInstance {
                seq: random_walk(&p, cfg.tau, seed, None)?,
                truth_a: structure.truth_labels(),
                truth_b: None,
                switch_encoded: None,
            })
        }
        ProblemSource::Graph(name) => {
            let graph = builtin(name)?;
            let p = TransitionMatrix::from_adjacency(&graph.adjacency)?;
            Ok(ProblemInstance {
                seq: random_walk(&p, cfg.tau, seed, None)?,
                truth_a: graph.truth,
                truth_b: None,
                switch_encoded: None,
            })
        }
        ProblemSource::Continual { a, b, switch } => {
            let phase_a = make_preset(*a)?;
            // Identical presets switch to a per-trial relabeling, so the
            // structure genuinely changes while the state set stays put.
            let phase_b =
                if a == b { relabel_shuffled(&phase_a, seed)? } else { make_preset(*b)? };
            let problem = ContinualProblem::new(phase_a, phase_b, *switch)?;
            let seq = problem.generate(cfg.tau, seed, None)?;
            Ok(ProblemInstance {
                seq,
                truth_a: problem.phase_a.truth_labels(),
                truth_b: Some(problem.phase_b.truth_labels()),
                switch_encoded: Some(switch * cfg.encoder.tstep),
            })
        }
    }
}

/// Run trial `trial` of `cfg` (seed `base_seed + trial`).
pub fn run_trial(cfg: &ExperimentConfig, trial: u32) -> Result<TrialOutcome> {
    let start = Instant::now();
    let seed = cfg.base_seed + u64::from(trial);
    let problem = build_problem(cfg, seed)?;
    let n = problem.truth_a.len();
    let mut dyn_cfg = cfg.dynamics;
    dyn_cfg.seed = seed;
    let snapshot_every = (cfg.snapshot_every > 0).then_some(cfg.snapshot_every);
    let trained = train(&problem.seq, n, cfg.encoder, dyn_cfg, snapshot_every)?;

    let k = cfg.dynamics.k;
    let mut trace = Vec::with_capacity(trained.snapshots.len());
    for snap in &trained.snapshots {
        let assignment = cfg.clusterer.assign(&snap.readout, k)?;
        trace.push((snap.step, nmi(&assignment.labels, problem.truth_at(snap.step))?));
    }

    let (assignment, dendrogram) = match cfg.clusterer {
        Clusterer::Ward { num_clusters } => {
            let (a, d) = ward_cluster(&trained.readout, k, num_clusters)?;
            (a, Some(d))
        }
        ref c => (c.assign(&trained.readout, k)?, None),
    };
    let truth = problem.final_truth().to_vec();
    let final_nmi = nmi(&assignment.labels, &truth)?;

    Ok(TrialOutcome {
        seed,
        final_nmi,
        runtime_s: start.elapsed().as_secs_f64(),
        trace,
        snapshots: trained.snapshots,
        final_raw: trained.state.w.clone(),
        final_readout: trained.readout,
        assignment: assignment.labels,
        truth,
        dendrogram,
    })
}

/// Run all trials of `cfg` on up to `jobs` threads. Trial results do not
/// depend on `jobs` or on scheduling order.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<RunOutcome> {
    cfg.validate()?;
    let total = cfg.trials as usize;
    let mut slots: Vec<Option<Result<TrialOutcome>>> = Vec::new();
    slots.resize_with(total, || None);

    let jobs = jobs.max(1).min(total);
    if jobs == 1 {
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Some(run_trial(cfg, i as u32));
        }
    } else {
        let next = AtomicUsize::new(0);
        let shared = Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= total {
                        break;
                    }
                    let result = run_trial(cfg, i as u32);
                    shared.lock().unwrap()[i] = Some(result);
                });
            }
        });
    }

    let mut trials = Vec::with_capacity(total);
    for (i, slot) in slots.into_iter().enumerate() {
        let outcome = slot
            .expect("every trial slot filled")
            .map_err(|e| Error::Trial { trial: i as u32, source: Box::new(e) })?;
        trials.push(outcome);
    }
    let finals: Vec<f64> = trials.iter().map(|t| t.final_nmi).collect();
    Ok(RunOutcome { config: cfg.clone(), trials, aggregate: aggregate(&finals) })
}

/// The four rule-set variants compared by the ablation study, in table
/// order.
pub const ABLATION_VARIANTS: [Variant; 4] = [
    Variant::Original,
    Variant::AblationWindowOnly,
    Variant::AblationSymmetricalOnly,
    Variant::Symmetrical,
];

/// The ablation suite: every variant on the mixed 20-10-5 environment
/// with shared seeds. `tau` overrides the standard 200000-transition
/// sequence length (shorter runs make useful smoke tests).
pub fn ablation_suite(
    trials: u32,
    base_seed: u64,
    jobs: usize,
    tau: Option<usize>,
) -> Result<Vec<RunOutcome>> {
    ABLATION_VARIANTS
        .iter()
        .map(|variant| {
            let name =
                format!("ablation_{}_mixed_20_10_5", variant.to_string().replace('-', "_"));
            let mut cfg = crate::harness::config::named(&name)?;
            cfg.trials = trials;
            cfg.base_seed = base_seed;
            if let Some(tau) = tau {
                cfg.tau = tau;
            }
            run_experiment(&cfg, jobs)
        })
        .collect()
}

/// `variant,mean,std` rows over the suite's outcomes.
pub fn ablation_csv(outcomes: &[RunOutcome]) -> String {
    let mut out = String::from("variant,mean,std\n");
    for o in outcomes {
        out.push_str(&format!(
            "{},{},{}\n",
            o.config.dynamics.variant, o.aggregate.mean, o.aggregate.std
        ));
    }
    out
}
