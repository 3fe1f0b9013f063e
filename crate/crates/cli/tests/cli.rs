//! End-to-end tests of the `syncmap` binary: every subcommand, exit-code
//! contract, artifact shapes and rerun determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_syncmap"))
}

fn tmpdir(tag: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!(
        "syncmap-cli-{}-{tag}-{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        out.status,
        stdout(out),
        stderr(out)
    );
}

/// A fast experiment config used across tests.
fn tiny_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("tiny.cfg");
    fs::write(
        &path,
        format!(
            "name = tiny\nproblem = preset\npreset = fixed-20-20-5\ntau = 300\n\
             trials = 2\nsnapshot_every = 1000\n{extra}"
        ),
    )
    .unwrap();
    path
}

#[test]
fn presets_lists_everything() {
    let out = bin().arg("presets").output().unwrap();
    ok(&out);
    let text = stdout(&out);
    for needle in [
        "fixed-20-20-5",
        "mixed-20-10-5",
        "longterm-10x6",
        "karate-2 (34 nodes, 2 communities)",
        "sbm (90 nodes, 3 communities)",
        "table1_fixed_20_20_5",
        "longterm_symmetrical",
    ] {
        assert!(text.contains(needle), "missing {needle:?} in:\n{text}");
    }
}

#[test]
fn generate_emits_sequence_and_matrices() {
    let dir = tmpdir("generate");
    let out = bin()
        .args(["generate", "--preset", "mixed-20-10-5", "--tau", "100", "--seed", "1"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    ok(&out);

    let sequence = fs::read_to_string(dir.join("sequence.txt")).unwrap();
    assert_eq!(sequence.lines().count(), 100);
    let states: Vec<usize> =
        sequence.lines().map(|l| l.parse().unwrap()).collect();
    assert!(states.iter().all(|&s| s < 35));

    let adjacency = fs::read_to_string(dir.join("adjacency.csv")).unwrap();
    assert_eq!(adjacency.lines().count(), 35);
    let transition = fs::read_to_string(dir.join("transition.csv")).unwrap();
    for line in transition.lines() {
        let sum: f64 = line.split(',').map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
    let truth = fs::read_to_string(dir.join("truth.labels")).unwrap();
    assert_eq!(truth.lines().count(), 35);

    // Same seed reproduces bytes; another seed changes the walk.
    let rerun_dir = tmpdir("generate-rerun");
    let rerun = bin()
        .args(["generate", "--preset", "mixed-20-10-5", "--tau", "100", "--seed", "1"])
        .arg("--out")
        .arg(&rerun_dir)
        .output()
        .unwrap();
    ok(&rerun);
    assert_eq!(sequence, fs::read_to_string(rerun_dir.join("sequence.txt")).unwrap());
    let other_dir = tmpdir("generate-seed2");
    let other = bin()
        .args(["generate", "--preset", "mixed-20-10-5", "--tau", "100", "--seed", "2"])
        .arg("--out")
        .arg(&other_dir)
        .output()
        .unwrap();
    ok(&other);
    assert_ne!(sequence, fs::read_to_string(other_dir.join("sequence.txt")).unwrap());

    for dir in [dir, rerun_dir, other_dir] {
        let _ = fs::remove_dir_all(dir);
    }
}

#[test]
fn generate_rejects_unknown_preset_with_exit_2() {
    let out = bin()
        .args(["generate", "--preset", "nonsense", "--tau", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "diagnostic not one line: {err}");
    assert!(err.contains("nonsense"));
}

#[test]
fn unknown_flag_exits_2() {
    let out = bin().args(["presets", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_eval_plot_pipeline() {
    let dir = tmpdir("pipeline");
    let cfg = tiny_config(&dir, "");
    let out = bin()
        .args(["train", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    ok(&out);
    assert!(stdout(&out).contains("final NMI"));

    let map = fs::read_to_string(dir.join("final_map.csv")).unwrap();
    assert!(map.starts_with("step,node_id,coord_0,coord_1,coord_2\n"));
    assert_eq!(map.lines().count(), 1 + 45);
    let snapshots = fs::read_to_string(dir.join("map_snapshots.csv")).unwrap();
    assert_eq!(snapshots.lines().count(), 1 + 3 * 45);
    let trace = fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("step,trial,nmi\n"));
    assert_eq!(trace.lines().count(), 4);
    assert!(dir.join("config.txt").exists());
    assert_eq!(
        fs::read_to_string(dir.join("assignment.csv")).unwrap().lines().count(),
        1 + 45
    );

    // Score the dumped map against the dumped truth.
    let eval_out = bin()
        .args(["eval", "--map"])
        .arg(dir.join("final_map.csv"))
        .arg("--truth")
        .arg(dir.join("truth.labels"))
        .arg("--assignment")
        .arg(dir.join("eval_assignment.csv"))
        .output()
        .unwrap();
    ok(&eval_out);
    let score: f64 = stdout(&eval_out).trim().parse().unwrap();
    assert!((0.0..=1.0).contains(&score));
    assert!(dir.join("eval_assignment.csv").exists());

    // Ward evaluation works on the same dump.
    let ward_out = bin()
        .args(["eval", "--clusterer", "ward", "--num-clusters", "3", "--map"])
        .arg(dir.join("final_map.csv"))
        .arg("--truth")
        .arg(dir.join("truth.labels"))
        .output()
        .unwrap();
    ok(&ward_out);

    // Scatter plot from the dump (k=3 goes through the PCA view).
    let svg_path = dir.join("map.svg");
    let plot_out = bin()
        .args(["plot", "--map"])
        .arg(dir.join("final_map.csv"))
        .arg("--truth")
        .arg(dir.join("truth.labels"))
        .arg("--out")
        .arg(&svg_path)
        .output()
        .unwrap();
    ok(&plot_out);
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<circle").count(), 45);
    assert!(svg.contains("principal-variance"));

    let _ = fs::remove_dir_all(dir);
}

#[test]
fn train_dumps_encoding_on_request() {
    let dir = tmpdir("encoding");
    let cfg = dir.join("enc.cfg");
    fs::write(
        &cfg,
        "problem = preset\npreset = fixed-20-20-5\ntau = 20\ntrials = 1\n",
    )
    .unwrap();
    let dump = dir.join("encoded.csv");
    let out = bin()
        .args(["train", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .arg("--dump-encoding")
        .arg(&dump)
        .output()
        .unwrap();
    ok(&out);
    let text = fs::read_to_string(&dump).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,state,value"));
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3);
        let step: usize = fields[0].parse().unwrap();
        let state: usize = fields[1].parse().unwrap();
        let value: f64 = fields[2].parse().unwrap();
        assert!(step < 200 && state < 45);
        assert!(value > 0.0 && value <= 1.0);
        rows += 1;
    }
    assert!(rows > 0);
    let _ = fs::remove_dir_all(dir);
}

#[test]
fn run_writes_results_and_is_deterministic() {
    let dir = tmpdir("run");
    let cfg = tiny_config(&dir, "");
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .arg("--save-maps")
        .output()
        .unwrap();
    ok(&out);
    assert!(stdout(&out).contains("tiny: NMI"));

    let results: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("results.json")).unwrap()).unwrap();
    assert_eq!(results["config"]["name"], "tiny");
    assert_eq!(results["trials"].as_array().unwrap().len(), 2);
    assert!(results["aggregate"]["mean"].is_f64());

    let aggregate = fs::read_to_string(dir.join("aggregate.csv")).unwrap();
    assert!(aggregate.starts_with("config,trials,mean,std\ntiny,2,"));
    assert!(dir.join("trace.csv").exists());
    assert!(dir.join("final_map_trial0.csv").exists());
    assert!(dir.join("final_map_trial1.csv").exists());

    // Re-run into a fresh directory: all value-bearing artifacts match
    // byte for byte (results.json differs only in wall-clock runtimes).
    let rerun_dir = tmpdir("run-rerun");
    let rerun = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&rerun_dir)
        .arg("--save-maps")
        .output()
        .unwrap();
    ok(&rerun);
    for file in ["aggregate.csv", "trace.csv", "final_map_trial0.csv", "final_map_trial1.csv"] {
        assert_eq!(
            fs::read_to_string(dir.join(file)).unwrap(),
            fs::read_to_string(rerun_dir.join(file)).unwrap(),
            "{file} differs between reruns"
        );
    }

    let _ = fs::remove_dir_all(dir);
    let _ = fs::remove_dir_all(rerun_dir);
}

#[test]
fn run_applies_trial_and_seed_overrides() {
    let dir = tmpdir("overrides");
    let trimmed = dir.join("trimmed.cfg");
    fs::write(
        &trimmed,
        "name = trimmed\nproblem = preset\npreset = fixed-20-20-5\ntau = 100\ntrials = 1\n",
    )
    .unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&trimmed)
        .args(["--trials", "2", "--seed", "5", "--jobs", "2"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    ok(&out);
    let results: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("results.json")).unwrap()).unwrap();
    assert_eq!(results["config"]["trials"], 2);
    assert_eq!(results["config"]["base_seed"], 5);
    assert_eq!(results["trials"][0]["seed"], 5);
    assert_eq!(results["trials"][1]["seed"], 6);
    let _ = fs::remove_dir_all(dir);
}

#[test]
fn run_unknown_config_exits_2() {
    let out = bin().args(["run", "--config", "no_such_config"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no_such_config"));
}

#[test]
fn run_malformed_config_file_exits_2() {
    let dir = tmpdir("malformed");
    let cfg = dir.join("bad.cfg");
    fs::write(&cfg, "problem = preset\npreset = fixed-20-20-5\ntau = ten\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr(&out).lines().count(), 1);
    let _ = fs::remove_dir_all(dir);
}

#[test]
fn eval_missing_map_file_exits_1() {
    let out = bin()
        .args(["eval", "--map", "/nonexistent/map.csv", "--truth", "/nonexistent/t.labels"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr(&out).lines().count(), 1);
}

#[test]
fn ward_train_produces_plots_for_both_artifacts() {
    let dir = tmpdir("ward");
    let cfg = tiny_config(&dir, "clusterer = ward\nnum_clusters = 3\n");
    let out = bin()
        .args(["train", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    ok(&out);
    let dendro = dir.join("dendrogram.txt");
    assert!(dendro.exists());
    assert_eq!(fs::read_to_string(&dendro).unwrap().lines().count(), 44);

    let svg_path = dir.join("dendro.svg");
    let plot_out = bin()
        .args(["plot", "--dendrogram"])
        .arg(&dendro)
        .arg("--out")
        .arg(&svg_path)
        .arg("--title")
        .arg("tiny ward")
        .output()
        .unwrap();
    ok(&plot_out);
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("tiny ward"));
    let _ = fs::remove_dir_all(dir);
}

#[test]
fn plot_requires_exactly_one_input() {
    let out = bin().arg("plot").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let dir = tmpdir("plot-both");
    let out = bin()
        .args(["plot", "--map", "a.csv", "--dendrogram", "b.txt"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let _ = fs::remove_dir_all(dir);
}

#[test]
fn ablation_emits_table_shaped_csv() {
    let dir = tmpdir("ablation");
    // One short trial per variant keeps this a smoke test; the
    // full-length suite runs in the acceptance criteria.
    let out = bin()
        .args(["ablation", "--trials", "1", "--seed", "3", "--tau", "200"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    ok(&out);
    let csv = fs::read_to_string(dir.join("ablation.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "variant,mean,std");
    assert!(lines[1].starts_with("original,"));
    assert!(lines[2].starts_with("window-only,"));
    assert!(lines[3].starts_with("symmetrical-only,"));
    assert!(lines[4].starts_with("symmetrical,"));
    assert_eq!(stdout(&out), csv);
    let _ = fs::remove_dir_all(dir);
}
