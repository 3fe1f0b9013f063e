//! `syncmap`: workbench for SyncMap / Symmetrical SyncMap chunking
//! experiments — problem generation, training, evaluation, full
//! benchmark runs and SVG plots.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use syncmap_core::clustering::Clusterer;
use syncmap_core::encoder::Encoder;
use syncmap_core::harness::{
    ablation_csv, ablation_suite, build_problem, named, named_configs, parse_config,
    run_experiment, run_trial, serialize_config, ExperimentConfig, TrialOutcome,
};
use syncmap_core::io::{self, MapDump, MapFrame};
use syncmap_core::metrics::nmi;
use syncmap_core::plot::{dendrogram_svg, scatter_svg};
use syncmap_core::problem::{
    all_presets, builtin, make_preset, random_walk, PresetId, TransitionMatrix, BUILTIN_GRAPHS,
};
use syncmap_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "syncmap",
    version,
    about = "Self-organizing chunking experiments: generate, train, evaluate, plot"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List built-in problem presets, graph fixtures and named configs.
    Presets,
    /// Emit a preset's random-walk sequence and its matrices.
    Generate {
        /// Preset id, e.g. mixed-20-10-5.
        #[arg(long)]
        preset: String,
        /// Sequence length in state transitions.
        #[arg(long)]
        tau: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run one trial and dump its map snapshots and final readout.
    Train {
        /// Named config or path to a config file.
        #[arg(long)]
        config: String,
        /// Trial index (the trial's seed is base_seed + trial).
        #[arg(long, default_value_t = 0)]
        trial: u32,
        /// Override the config's base_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's snapshot cadence (encoded steps).
        #[arg(long)]
        snapshot_every: Option<usize>,
        /// Also dump the encoded input vectors as step,state,value rows.
        #[arg(long)]
        dump_encoding: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Cluster a dumped map and print its NMI against truth labels.
    Eval {
        /// Map CSV (the final frame is scored).
        #[arg(long)]
        map: PathBuf,
        /// Truth labels, one per line.
        #[arg(long)]
        truth: PathBuf,
        /// dbscan or ward.
        #[arg(long, default_value = "dbscan")]
        clusterer: String,
        #[arg(long, default_value_t = 4.5)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        mc: usize,
        #[arg(long, default_value_t = 2)]
        num_clusters: usize,
        /// Optionally write the assignment CSV here.
        #[arg(long)]
        assignment: Option<PathBuf>,
    },
    /// Run a full multi-trial experiment.
    Run {
        /// Named config or path to a config file.
        #[arg(long)]
        config: String,
        /// Override the config's trial count.
        #[arg(long)]
        trials: Option<u32>,
        /// Override the config's base_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for trial-level parallelism.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Also write each trial's final map CSV.
        #[arg(long)]
        save_maps: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Render an SVG from a map dump or a dendrogram file.
    Plot {
        /// Map CSV to scatter-plot (requires --truth).
        #[arg(long, conflicts_with = "dendrogram")]
        map: Option<PathBuf>,
        /// Truth labels used to color the scatter.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Dendrogram merge file to render.
        #[arg(long)]
        dendrogram: Option<PathBuf>,
        /// Output SVG path (default map.svg / dendrogram.svg).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        title: Option<String>,
    },
    /// Run the four-variant ablation suite on mixed-20-10-5.
    Ablation {
        #[arg(long, default_value_t = 10)]
        trials: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Override the suite's sequence length (transitions).
        #[arg(long)]
        tau: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::UnknownPreset(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Presets => presets(),
        Command::Generate { preset, tau, seed, out } => generate(&preset, tau, seed, &out),
        Command::Train { config, trial, seed, snapshot_every, dump_encoding, out } => {
            train(&config, trial, seed, snapshot_every, dump_encoding.as_deref(), &out)
        }
        Command::Eval { map, truth, clusterer, eps, mc, num_clusters, assignment } => {
            eval(&map, &truth, &clusterer, eps, mc, num_clusters, assignment.as_deref())
        }
        Command::Run { config, trials, seed, jobs, save_maps, out } => {
            run(&config, trials, seed, jobs, save_maps, &out)
        }
        Command::Plot { map, truth, dendrogram, out, title } => {
            plot(map.as_deref(), truth.as_deref(), dendrogram.as_deref(), out, title.as_deref())
        }
        Command::Ablation { trials, seed, jobs, tau, out } => {
            ablation(trials, seed, jobs, tau, &out)
        }
    }
}

/// Load a config by built-in name or from a file path.
fn load_config(spec: &str) -> Result<ExperimentConfig> {
    if Path::new(spec).exists() {
        parse_config(&fs::read_to_string(spec)?)
    } else {
        named(spec)
    }
}

fn presets() -> Result<()> {
    println!("presets:");
    for id in all_presets() {
        let n = make_preset(id)?.n_states;
        println!("  {id} ({n} states)");
    }
    println!("graphs:");
    for name in BUILTIN_GRAPHS {
        let g = builtin(name)?;
        println!("  {name} ({} nodes, {} communities)", g.n(), g.num_communities());
    }
    println!("configs:");
    for cfg in named_configs() {
        println!("  {}", cfg.name);
    }
    Ok(())
}

fn generate(preset: &str, tau: usize, seed: u64, out: &Path) -> Result<()> {
    let id: PresetId = preset.parse()?;
    let structure = make_preset(id)?;
    let adjacency = structure.build_adjacency()?;
    let transition = TransitionMatrix::from_adjacency(&adjacency)?;
    let seq = random_walk(&transition, tau, seed, None)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("sequence.txt"), io::sequence_file(&seq.states))?;
    fs::write(out.join("adjacency.csv"), io::adjacency_csv(&adjacency))?;
    fs::write(out.join("transition.csv"), io::transition_csv(&transition))?;
    fs::write(out.join("truth.labels"), io::labels_file(&structure.truth_labels()))?;
    println!(
        "{preset}: {tau} transitions over {} states -> {}",
        structure.n_states,
        out.display()
    );
    Ok(())
}

fn write_map(path: &Path, k: usize, frames: Vec<MapFrame>) -> Result<()> {
    fs::write(path, io::map_csv(&MapDump { k, frames }))?;
    Ok(())
}

fn final_frame(cfg: &ExperimentConfig, outcome: &TrialOutcome) -> MapFrame {
    MapFrame {
        step: cfg.tau * cfg.encoder.tstep,
        positions: outcome.final_readout.clone(),
    }
}

fn train(
    config: &str,
    trial: u32,
    seed: Option<u64>,
    snapshot_every: Option<usize>,
    dump_encoding: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    if let Some(every) = snapshot_every {
        cfg.snapshot_every = every;
    }
    let outcome = run_trial(&cfg, trial)?;
    let k = cfg.dynamics.k;
    fs::create_dir_all(out)?;
    fs::write(out.join("config.txt"), serialize_config(&cfg))?;
    write_map(&out.join("final_map.csv"), k, vec![final_frame(&cfg, &outcome)])?;
    if !outcome.snapshots.is_empty() {
        let frames = outcome
            .snapshots
            .iter()
            .map(|s| MapFrame { step: s.step, positions: s.readout.clone() })
            .collect();
        write_map(&out.join("map_snapshots.csv"), k, frames)?;
        let rows: Vec<(usize, u32, f64)> =
            outcome.trace.iter().map(|&(step, score)| (step, trial, score)).collect();
        fs::write(out.join("trace.csv"), io::trace_csv(&rows))?;
    }
    fs::write(out.join("assignment.csv"), io::assignment_csv(&outcome.assignment))?;
    fs::write(out.join("truth.labels"), io::labels_file(&outcome.truth))?;
    if let Some(d) = &outcome.dendrogram {
        fs::write(out.join("dendrogram.txt"), syncmap_core::clustering::export_dendrogram(d))?;
    }
    if let Some(path) = dump_encoding {
        dump_encoded(&cfg, outcome.seed, path)?;
    }
    println!(
        "trial {trial} (seed {}): final NMI {} in {:.2}s -> {}",
        outcome.seed,
        outcome.final_nmi,
        outcome.runtime_s,
        out.display()
    );
    Ok(())
}

/// Re-generate the trial's sequence and dump every nonzero encoded input
/// as a step,state,value row.
fn dump_encoded(cfg: &ExperimentConfig, seed: u64, path: &Path) -> Result<()> {
    let problem = build_problem(cfg, seed)?;
    let n = problem.truth_a.len();
    let mut encoder = Encoder::new(&problem.seq, n, cfg.encoder)?;
    let mut x = vec![0.0; n];
    let mut out = String::from("step,state,value\n");
    while let Some(step) = encoder.step_into(&mut x) {
        for (state, &value) in x.iter().enumerate() {
            if value > 0.0 {
                out.push_str(&format!("{step},{state},{value}\n"));
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn eval(
    map: &Path,
    truth: &Path,
    clusterer: &str,
    eps: f64,
    mc: usize,
    num_clusters: usize,
    assignment_out: Option<&Path>,
) -> Result<()> {
    let dump = io::parse_map_csv(&fs::read_to_string(map)?)?;
    let truth = io::parse_labels(&fs::read_to_string(truth)?)?;
    if truth.len() != dump.n() {
        return Err(Error::LabelLength { predicted: dump.n(), truth: truth.len() });
    }
    let clusterer = match clusterer {
        "dbscan" => Clusterer::Dbscan { eps, mc },
        "ward" => Clusterer::Ward { num_clusters },
        other => {
            return Err(Error::Config(format!("clusterer must be dbscan|ward, got {other:?}")))
        }
    };
    let frame = dump.final_frame().expect("parser guarantees at least one frame");
    let assignment = clusterer.assign(&frame.positions, dump.k)?;
    if let Some(path) = assignment_out {
        fs::write(path, io::assignment_csv(&assignment.labels))?;
    }
    println!("{}", nmi(&assignment.labels, &truth)?);
    Ok(())
}

fn run(
    config: &str,
    trials: Option<u32>,
    seed: Option<u64>,
    jobs: usize,
    save_maps: bool,
    out: &Path,
) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    cfg.validate()?;
    let outcome = run_experiment(&cfg, jobs)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("results.json"), outcome.results_json())?;
    fs::write(
        out.join("aggregate.csv"),
        format!(
            "config,trials,mean,std\n{},{},{},{}\n",
            cfg.name, cfg.trials, outcome.aggregate.mean, outcome.aggregate.std
        ),
    )?;
    let rows = outcome.trace_rows();
    if !rows.is_empty() {
        fs::write(out.join("trace.csv"), io::trace_csv(&rows))?;
    }
    if save_maps {
        for (i, trial) in outcome.trials.iter().enumerate() {
            write_map(
                &out.join(format!("final_map_trial{i}.csv")),
                cfg.dynamics.k,
                vec![final_frame(&cfg, trial)],
            )?;
        }
    }
    println!(
        "{}: NMI {:.4} +- {:.4} over {} trials -> {}",
        cfg.name,
        outcome.aggregate.mean,
        outcome.aggregate.std,
        cfg.trials,
        out.display()
    );
    Ok(())
}

fn plot(
    map: Option<&Path>,
    truth: Option<&Path>,
    dendrogram: Option<&Path>,
    out: Option<PathBuf>,
    title: Option<&str>,
) -> Result<()> {
    let (svg, out) = match (map, dendrogram) {
        (Some(map), None) => {
            let truth = truth.ok_or_else(|| {
                Error::Config("plot --map requires --truth labels".into())
            })?;
            let dump = io::parse_map_csv(&fs::read_to_string(map)?)?;
            let labels = io::parse_labels(&fs::read_to_string(truth)?)?;
            if labels.len() != dump.n() {
                return Err(Error::LabelLength { predicted: dump.n(), truth: labels.len() });
            }
            let frame = dump.final_frame().expect("parser guarantees at least one frame");
            let title = title.map(str::to_string).unwrap_or_else(|| {
                format!("map at step {} ({} nodes)", frame.step, labels.len())
            });
            let svg = scatter_svg(&frame.positions, dump.k, &labels, &title)?;
            (svg, out.unwrap_or_else(|| PathBuf::from("map.svg")))
        }
        (None, Some(dendro)) => {
            let d = io::parse_dendrogram(&fs::read_to_string(dendro)?)?;
            let title = title.unwrap_or("ward dendrogram");
            (dendrogram_svg(&d, title)?, out.unwrap_or_else(|| PathBuf::from("dendrogram.svg")))
        }
        _ => {
            return Err(Error::Config(
                "plot needs exactly one of --map or --dendrogram".into(),
            ))
        }
    };
    fs::write(&out, svg)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn ablation(trials: u32, seed: u64, jobs: usize, tau: Option<usize>, out: &Path) -> Result<()> {
    let outcomes = ablation_suite(trials, seed, jobs, tau)?;
    let csv = ablation_csv(&outcomes);
    fs::create_dir_all(out)?;
    fs::write(out.join("ablation.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}
