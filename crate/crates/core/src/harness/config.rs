//! Experiment configuration: a flat key-value text format, plus the
//! built-in named configs covering every benchmark table cell, the
//! long-term study, the real-network runs, the ablation suite and the
//! parameter-robustness sweep.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::clustering::Clusterer;
use crate::dynamics::{DynamicsConfig, Variant};
use crate::encoder::{threshold_from_memory, EncoderConfig};
use crate::problem::{PresetId, BUILTIN_GRAPHS};
use crate::{Error, Result};

/// Where the training sequence comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    /// A built-in chunking environment.
    Preset(PresetId),
    /// A bundled benchmark graph (random walk over its edges).
    Graph(String),
    /// Structure switch mid-sequence: phase A for the first `switch`
    /// transitions, phase B afterwards, no reset in between. When both
    /// phases name the same preset, phase B is a per-trial random
    /// relabeling of it (otherwise the switch would be a no-op).
    Continual { a: PresetId, b: PresetId, switch: usize },
}

/// A fully resolved experiment: problem, sequence length, encoder,
/// dynamics, readout clusterer and trial plan.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: ProblemSource,
    /// Sequence length in state transitions; encoded length is
    /// `tau * tstep` steps.
    pub tau: usize,
    pub encoder: EncoderConfig,
    /// `dynamics.seed` is ignored here; trial `i` runs with seed
    /// `base_seed + i` on every stream.
    pub dynamics: DynamicsConfig,
    pub clusterer: Clusterer,
    pub trials: u32,
    pub base_seed: u64,
    /// Snapshot cadence in encoded steps; 0 = no intermediate snapshots.
    pub snapshot_every: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(char::is_whitespace) {
            return Err(Error::Config(format!("bad config name {:?}", self.name)));
        }
        if self.tau < 1 {
            return Err(Error::Config("tau must be >= 1".into()));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        self.encoder.validate()?;
        self.dynamics.validate()?;
        if self.encoder.m != self.dynamics.m {
            return Err(Error::Config(format!(
                "encoder m {} != dynamics m {}",
                self.encoder.m, self.dynamics.m
            )));
        }
        match &self.problem {
            ProblemSource::Preset(_) => {}
            ProblemSource::Graph(name) => {
                if !BUILTIN_GRAPHS.contains(&name.as_str()) {
                    return Err(Error::Config(format!(
                        "unknown graph {name:?}; available: {}",
                        BUILTIN_GRAPHS.join(", ")
                    )));
                }
            }
            ProblemSource::Continual { switch, .. } => {
                if *switch < 1 || *switch >= self.tau {
                    return Err(Error::Config(format!(
                        "switch {switch} must lie in [1, tau)"
                    )));
                }
            }
        }
        match self.clusterer {
            Clusterer::Dbscan { eps, mc } => {
                if !(eps > 0.0) {
                    return Err(Error::Config(format!("eps {eps} must be > 0")));
                }
                if mc < 1 {
                    return Err(Error::Config("mc must be >= 1".into()));
                }
            }
            Clusterer::Ward { num_clusters } => {
                if num_clusters < 1 {
                    return Err(Error::Config("num_clusters must be >= 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Canonical flat `(key, value)` entries, every value resolved.
    fn entries(&self) -> Vec<(&'static str, Value)> {
        let mut e: Vec<(&'static str, Value)> = vec![
            ("name", json!(self.name)),
        ];
        match &self.problem {
            ProblemSource::Preset(id) => {
                e.push(("problem", json!("preset")));
                e.push(("preset", json!(id.to_string())));
            }
            ProblemSource::Graph(name) => {
                e.push(("problem", json!("graph")));
                e.push(("graph", json!(name)));
            }
            ProblemSource::Continual { a, b, switch } => {
                e.push(("problem", json!("continual")));
                e.push(("preset_a", json!(a.to_string())));
                e.push(("preset_b", json!(b.to_string())));
                e.push(("switch", json!(switch)));
            }
        }
        e.extend([
            ("tau", json!(self.tau)),
            ("variant", json!(self.dynamics.variant.to_string())),
            ("k", json!(self.dynamics.k)),
            ("m", json!(self.dynamics.m)),
            ("threshold", json!(self.encoder.a)),
            ("tstep", json!(self.encoder.tstep)),
            ("pr", json!(self.dynamics.pr)),
            ("alpha_base", json!(self.dynamics.alpha_base)),
            ("radius", json!(self.dynamics.radius)),
            ("ma_window", json!(self.dynamics.ma_window)),
            ("normalization", json!(self.dynamics.normalization.to_string())),
            ("ma_fold", json!(self.dynamics.ma_fold.to_string())),
        ]);
        match self.clusterer {
            Clusterer::Dbscan { eps, mc } => {
                e.push(("clusterer", json!("dbscan")));
                e.push(("eps", json!(eps)));
                e.push(("mc", json!(mc)));
            }
            Clusterer::Ward { num_clusters } => {
                e.push(("clusterer", json!("ward")));
                e.push(("num_clusters", json!(num_clusters)));
            }
        }
        e.extend([
            ("trials", json!(self.trials)),
            ("base_seed", json!(self.base_seed)),
            ("snapshot_every", json!(self.snapshot_every)),
        ]);
        e
    }

    /// The config as a JSON object (used inside results files).
    pub fn to_json(&self) -> Value {
        Value::Object(
            self.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        )
    }
}

/// Canonical text form: one `key = value` line per resolved setting.
/// [`parse_config`] of the output reproduces the config exactly.
pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    let mut out = String::from("# experiment config\n");
    for (key, value) in cfg.entries() {
        let text = match value {
            Value::String(s) => s,
            other => other.to_string(),
        };
        let _ = writeln!(out, "{key} = {text}");
    }
    out
}

/// Raw key-value view of a config file: `key = value` lines, `#` starts a
/// comment, later keys must not repeat.
fn raw_pairs(text: &str) -> Result<HashMap<String, String>> {
    let mut pairs = HashMap::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got {line:?}", line_no + 1))
        })?;
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if value.is_empty() {
            return Err(Error::Config(format!("line {}: empty value for {key:?}", line_no + 1)));
        }
        if pairs.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key:?}", line_no + 1)));
        }
    }
    Ok(pairs)
}

struct Fields {
    pairs: HashMap<String, String>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<String> {
        self.pairs.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.take(key).ok_or_else(|| Error::Config(format!("missing key {key:?}")))
    }

    fn parse<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("bad value for {key:?}: {v:?}"))),
        }
    }

    fn parse_req<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.require(key)?;
        v.parse().map_err(|_| Error::Config(format!("bad value for {key:?}: {v:?}")))
    }
}

/// Parse a flat config file. Missing optional keys fall back to the
/// published defaults: tstep=10, variant=symmetrical, k=3, m per variant,
/// threshold `exp(-0.1*m*tstep)` (the baseline's literal 0.1 for the
/// original variant), Pr=0.3, alpha_base=0.001, radius=10,
/// ma_window=10000, dbscan(4.5, 2), trials=10, base_seed=1,
/// snapshot_every=0.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut f = Fields { pairs: raw_pairs(text)? };

    let name = f.parse("name", "custom".to_string())?;
    let problem = match f.require("problem")?.as_str() {
        "preset" => ProblemSource::Preset(f.parse_req("preset")?),
        "graph" => ProblemSource::Graph(f.require("graph")?),
        "continual" => ProblemSource::Continual {
            a: f.parse_req("preset_a")?,
            b: f.parse_req("preset_b")?,
            switch: f.parse_req("switch")?,
        },
        other => {
            return Err(Error::Config(format!(
                "problem must be preset|graph|continual, got {other:?}"
            )))
        }
    };
    let tau: usize = f.parse_req("tau")?;

    let variant: Variant = f.parse("variant", Variant::Symmetrical)?;
    let tstep: usize = f.parse("tstep", 10)?;
    let m: usize = f.parse("m", variant.default_m())?;
    let threshold = match f.take("threshold") {
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("bad value for \"threshold\": {v:?}")))?,
        None if variant == Variant::Original => 0.1,
        None => threshold_from_memory(m, tstep)?,
    };
    let encoder = EncoderConfig::with_threshold(m, tstep, threshold)?;

    let mut dynamics = DynamicsConfig::benchmark_default(variant);
    dynamics.m = m;
    dynamics.k = f.parse("k", dynamics.k)?;
    dynamics.pr = f.parse("pr", dynamics.pr)?;
    dynamics.alpha_base = f.parse("alpha_base", dynamics.alpha_base)?;
    dynamics.radius = f.parse("radius", dynamics.radius)?;
    dynamics.ma_window = f.parse("ma_window", dynamics.ma_window)?;
    dynamics.normalization = f.parse("normalization", dynamics.normalization)?;
    dynamics.ma_fold = f.parse("ma_fold", dynamics.ma_fold)?;
    dynamics.seed = 0;

    let clusterer = match f.parse("clusterer", "dbscan".to_string())?.as_str() {
        "dbscan" => Clusterer::Dbscan { eps: f.parse("eps", 4.5)?, mc: f.parse("mc", 2)? },
        "ward" => Clusterer::Ward { num_clusters: f.parse("num_clusters", 2)? },
        other => {
            return Err(Error::Config(format!(
                "clusterer must be dbscan|ward, got {other:?}"
            )))
        }
    };

    let cfg = ExperimentConfig {
        name,
        problem,
        tau,
        encoder,
        dynamics,
        clusterer,
        trials: f.parse("trials", 10)?,
        base_seed: f.parse("base_seed", 1)?,
        snapshot_every: f.parse("snapshot_every", 0)?,
    };
    if let Some(key) = f.pairs.keys().next() {
        return Err(Error::Config(format!("unknown key {key:?}")));
    }
    cfg.validate()?;
    Ok(cfg)
}

const TABLE_TAU: usize = 200_000;

fn base(name: &str, problem: ProblemSource, variant: Variant) -> ExperimentConfig {
    let mut dynamics = DynamicsConfig::benchmark_default(variant);
    dynamics.seed = 0;
    let a = if variant == Variant::Original {
        0.1
    } else {
        threshold_from_memory(dynamics.m, 10).unwrap()
    };
    ExperimentConfig {
        name: name.to_string(),
        problem,
        tau: TABLE_TAU,
        encoder: EncoderConfig::with_threshold(dynamics.m, 10, a).unwrap(),
        dynamics,
        clusterer: Clusterer::Dbscan { eps: 4.5, mc: 2 },
        trials: 10,
        base_seed: 1,
        snapshot_every: 0,
    }
}

fn preset_id(family: &str, sizes: [usize; 3]) -> PresetId {
    format!("{family}-{}-{}-{}", sizes[0], sizes[1], sizes[2]).parse().unwrap()
}

/// Every built-in named experiment.
pub fn named_configs() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    let families = ["fixed", "probabilistic", "mixed"];

    // Benchmark table cells: imbalanced chunking environments.
    for family in families {
        for sizes in [[20, 20, 5], [20, 10, 5], [20, 5, 5]] {
            let name = format!("table1_{family}_{}_{}_{}", sizes[0], sizes[1], sizes[2]);
            out.push(base(
                &name,
                ProblemSource::Preset(preset_id(family, sizes)),
                Variant::Symmetrical,
            ));
        }
    }
    // Baseline sanity cell.
    out.push(base(
        "table1_original_fixed_20_5_5",
        ProblemSource::Preset(preset_id("fixed", [20, 5, 5])),
        Variant::Original,
    ));

    // Continual switch: 15-15-5 into 20-10-5, length 2*tau.
    for family in families {
        let mut cfg = base(
            &format!("continual_{family}"),
            ProblemSource::Continual {
                a: preset_id(family, [15, 15, 5]),
                b: preset_id(family, [20, 10, 5]),
                switch: TABLE_TAU,
            },
            Variant::Symmetrical,
        );
        cfg.tau = 2 * TABLE_TAU;
        out.push(cfg);
    }

    // Long-term stability study: ten 6-state chunks, relabeled mid-run.
    for variant in [Variant::Symmetrical, Variant::Original] {
        let mut cfg = base(
            &format!("longterm_{variant}"),
            ProblemSource::Continual {
                a: PresetId::LongTerm,
                b: PresetId::LongTerm,
                switch: 300_000,
            },
            variant,
        );
        cfg.tau = 600_000;
        cfg.dynamics.k = 2;
        cfg.clusterer = Clusterer::Dbscan { eps: 1.0, mc: 2 };
        cfg.snapshot_every = 10_000;
        out.push(cfg);
    }

    // Real networks: random walks over bundled graphs.
    for variant in [Variant::Symmetrical, Variant::Original] {
        out.push(base(
            &format!("sbm_{variant}"),
            ProblemSource::Graph("sbm".into()),
            variant,
        ));
        for (graph, nc) in [("karate-2", 2), ("karate-4", 4)] {
            let mut cfg = base(
                &format!("karate_ward{nc}_{variant}"),
                ProblemSource::Graph(graph.into()),
                variant,
            );
            cfg.dynamics.k = 2;
            cfg.clusterer = Clusterer::Ward { num_clusters: nc };
            out.push(cfg);
        }
    }
    let mut dolphins = base(
        "dolphins_ward2",
        ProblemSource::Graph("dolphins".into()),
        Variant::Symmetrical,
    );
    dolphins.dynamics.k = 2;
    dolphins.clusterer = Clusterer::Ward { num_clusters: 2 };
    out.push(dolphins);
    out.push(base(
        "whales_dbscan",
        ProblemSource::Graph("whales".into()),
        Variant::Symmetrical,
    ));

    // Ablation: every variant on the mixed 20-10-5 environment.
    for variant in [
        Variant::Original,
        Variant::AblationWindowOnly,
        Variant::AblationSymmetricalOnly,
        Variant::Symmetrical,
    ] {
        out.push(base(
            &format!("ablation_{}_mixed_20_10_5", variant.to_string().replace('-', "_")),
            ProblemSource::Preset(preset_id("mixed", [20, 10, 5])),
            variant,
        ));
    }

    // Parameter-robustness sweep over (k, m, Pr) on the 20-10-5 cells;
    // the default row (3, 3, 0.3) is already table1_*_20_10_5.
    for (k, m, pr) in [(3, 2, 1.0), (3, 3, 1.0), (3, 4, 0.3), (2, 2, 1.0), (2, 3, 0.3), (2, 4, 0.3)]
    {
        for family in families {
            let pct = (pr * 100.0) as usize;
            let mut cfg = base(
                &format!("sweep_{family}_20_10_5_k{k}_m{m}_pr{pct}"),
                ProblemSource::Preset(preset_id(family, [20, 10, 5])),
                Variant::Symmetrical,
            );
            cfg.dynamics.k = k;
            cfg.dynamics.m = m;
            cfg.dynamics.pr = pr;
            cfg.encoder = EncoderConfig::from_memory(m, 10).unwrap();
            out.push(cfg);
        }
    }

    out
}

/// Look up a named config.
pub fn named(name: &str) -> Result<ExperimentConfig> {
    named_configs()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::Config(format!("no built-in config named {name:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn minimal() -> ExperimentConfig {
        parse_config("problem = preset\npreset = fixed-20-20-5\ntau = 1000\n").unwrap()
    }

    #[test]
    fn defaults_follow_published_settings() {
        let cfg = minimal();
        assert_eq!(cfg.dynamics.variant, Variant::Symmetrical);
        assert_eq!(cfg.dynamics.k, 3);
        assert_eq!(cfg.dynamics.m, 3);
        assert_eq!(cfg.dynamics.pr, 0.3);
        assert_eq!(cfg.encoder.tstep, 10);
        assert!((cfg.encoder.a - (-3.0f64).exp()).abs() < 1e-15);
        assert_eq!(cfg.clusterer, Clusterer::Dbscan { eps: 4.5, mc: 2 });
        assert_eq!(cfg.trials, 10);
        assert_eq!(cfg.base_seed, 1);
    }

    #[test]
    fn original_defaults_to_literal_threshold() {
        let cfg =
            parse_config("problem = preset\npreset = fixed-20-20-5\ntau = 10\nvariant = original\n")
                .unwrap();
        assert_eq!(cfg.dynamics.m, 2);
        assert_eq!(cfg.encoder.a, 0.1);
    }

    #[test]
    fn round_trips_through_text() {
        for cfg in named_configs() {
            let text = serialize_config(&cfg);
            let back = parse_config(&text).unwrap();
            assert_eq!(back, cfg, "round trip failed for {}", cfg.name);
        }
    }

    #[test]
    fn named_configs_are_valid_and_unique() {
        let configs = named_configs();
        let mut names: Vec<&str> = configs.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        let before = names.len();
        names.dedup();
        assert_eq!(before, names.len());
        for cfg in &configs {
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", cfg.name));
        }
        for expected in [
            "table1_fixed_20_20_5",
            "table1_mixed_20_5_5",
            "table1_original_fixed_20_5_5",
            "continual_mixed",
            "longterm_symmetrical",
            "longterm_original",
            "sbm_original",
            "karate_ward2_symmetrical",
            "karate_ward4_original",
            "dolphins_ward2",
            "whales_dbscan",
            "ablation_symmetrical_only_mixed_20_10_5",
            "sweep_mixed_20_10_5_k2_m4_pr30",
        ] {
            assert!(named(expected).is_ok(), "missing {expected}");
        }
    }

    #[test]
    fn longterm_config_matches_protocol() {
        let cfg = named("longterm_symmetrical").unwrap();
        assert_eq!(cfg.tau, 600_000);
        assert_eq!(cfg.dynamics.k, 2);
        assert_eq!(cfg.clusterer, Clusterer::Dbscan { eps: 1.0, mc: 2 });
        match cfg.problem {
            ProblemSource::Continual { a, b, switch } => {
                assert_eq!(a, PresetId::LongTerm);
                assert_eq!(b, PresetId::LongTerm);
                assert_eq!(switch, 300_000);
            }
            ref other => panic!("unexpected problem {other:?}"),
        }
    }

    #[test]
    fn comments_and_spacing_are_ignored() {
        let cfg = parse_config(
            "# full line\n  problem = preset  # trailing\n\npreset =  fixed-20-20-5\ntau=50\n",
        )
        .unwrap();
        assert_eq!(cfg.tau, 50);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let ok = "problem = preset\npreset = fixed-20-20-5\ntau = 10\n";
        assert!(parse_config("tau = 10\n").is_err());
        assert!(parse_config(&format!("{ok}tau = 20\n")).is_err());
        assert!(parse_config(&format!("{ok}mystery = 1\n")).is_err());
        assert!(parse_config(&format!("{ok}trials = none\n")).is_err());
        assert!(parse_config("problem = preset\npreset = fixed-1-2-3\ntau = 10\n").is_err());
        assert!(parse_config("problem = graph\ngraph = unknown\ntau = 10\n").is_err());
        assert!(parse_config("problem = preset\npreset = fixed-20-20-5\ntau = 0\n").is_err());
        assert!(parse_config(&format!("{ok}variant = original\nm = 3\n")).is_err());
        assert!(parse_config(&format!("{ok}clusterer = ward\nnum_clusters = 0\n")).is_err());
        assert!(parse_config(
            "problem = continual\npreset_a = fixed-15-15-5\npreset_b = fixed-20-10-5\n\
             switch = 10\ntau = 10\n",
        )
        .is_err());
        assert!(parse_config(&format!("{ok}problem2\n")).is_err());
    }

    #[test]
    fn json_mirrors_flat_keys() {
        let cfg = named("table1_fixed_20_20_5").unwrap();
        let v = cfg.to_json();
        assert_eq!(v["name"], "table1_fixed_20_20_5");
        assert_eq!(v["preset"], "fixed-20-20-5");
        assert_eq!(v["eps"], 4.5);
        assert_eq!(v["tau"], 200_000);
    }

    prop_compose! {
        fn arb_config()(
            problem_pick in 0usize..3,
            preset_pick in 0usize..13,
            graph_pick in 0usize..BUILTIN_GRAPHS.len(),
            tau in 2usize..5000,
            switch_frac in 0.1f64..0.9,
            variant_pick in 0usize..4,
            k in 1usize..4,
            extra_m in 0usize..3,
            pr in 0.0f64..1.0,
            ward in proptest::bool::ANY,
            eps in 0.5f64..6.0,
            nc in 1usize..5,
            trials in 1u32..5,
            base_seed in 0u64..1000,
            snapshot_every in 0usize..3000,
        ) -> ExperimentConfig {
            let variant = [
                Variant::Original,
                Variant::Symmetrical,
                Variant::AblationWindowOnly,
                Variant::AblationSymmetricalOnly,
            ][variant_pick];
            let m = match variant {
                Variant::Original | Variant::AblationSymmetricalOnly => 2,
                _ => 2 + extra_m,
            };
            let presets = crate::problem::all_presets();
            let problem = match problem_pick {
                0 => ProblemSource::Preset(presets[preset_pick]),
                1 => ProblemSource::Graph(BUILTIN_GRAPHS[graph_pick].to_string()),
                _ => ProblemSource::Continual {
                    a: presets[preset_pick],
                    b: presets[preset_pick],
                    switch: ((tau as f64 * switch_frac) as usize).max(1),
                },
            };
            let mut dynamics = DynamicsConfig::benchmark_default(variant);
            dynamics.k = k;
            dynamics.m = m;
            dynamics.pr = pr;
            dynamics.seed = 0;
            ExperimentConfig {
                name: "prop".into(),
                problem,
                tau,
                encoder: EncoderConfig::from_memory(m, 10).unwrap(),
                dynamics,
                clusterer: if ward {
                    Clusterer::Ward { num_clusters: nc }
                } else {
                    Clusterer::Dbscan { eps, mc: 2 }
                },
                trials,
                base_seed,
                snapshot_every,
            }
        }
    }

    proptest! {
        #[test]
        fn any_valid_config_round_trips(cfg in arb_config()) {
            prop_assume!(cfg.validate().is_ok());
            let back = parse_config(&serialize_config(&cfg)).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
