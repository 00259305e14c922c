//! Running strategies and writing their artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ued_core::maze::{MazeLevel, FAMILY_ID};
use ued_core::strategies::{evaluate, run_strategy, EvalMode, RunConfig, RunReport, StrategyKind};

use crate::config::ExperimentConfig;
use crate::error::{write, LabError, Result};
use crate::manifest::{sha256_hex, RunManifest};
use crate::metrics::to_csv;
use crate::snapshot::{BufferSnapshot, PolicySnapshot};

pub const METRICS_FILE: &str = "metrics.csv";
pub const POLICY_FILE: &str = "policy.json";
pub const BUFFER_FILE: &str = "buffer.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Runs one configured strategy with its own seeded generator.
pub fn run(cfg: &RunConfig, suite: &[MazeLevel]) -> Result<RunReport> {
    Ok(run_strategy(cfg, suite, &mut ued_core::seeded_rng(cfg.seed))?)
}

/// Writes metrics, final policy, final buffer and the manifest into `out`.
pub fn write_artifacts(
    out: &Path,
    experiment: &ExperimentConfig,
    cfg: &RunConfig,
    report: &RunReport,
) -> Result<RunManifest> {
    std::fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    let metrics = to_csv(&report.rows);
    let policy = PolicySnapshot::new(&report.student, FAMILY_ID).to_json() + "\n";
    let buffer = match &report.buffer {
        Some(b) => BufferSnapshot::new(b, cfg.maze),
        None => BufferSnapshot::empty(cfg.maze, cfg.replay, cfg.diversity.zero_norm_epsilon),
    }
    .to_json()
        + "\n";
    let mut artifacts = BTreeMap::new();
    for (name, body) in [(METRICS_FILE, &metrics), (POLICY_FILE, &policy), (BUFFER_FILE, &buffer)] {
        write(&out.join(name), body)?;
        artifacts.insert(name.to_string(), sha256_hex(body.as_bytes()));
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        seed: cfg.seed,
        strategy: cfg.strategy.kind.tag().into(),
        env_steps: report.env_steps,
        iterations: report.rows.len() as u64,
        config: experiment.to_toml(),
        artifacts,
    };
    manifest.save(&out.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Outcome of one (strategy, seed) run of a comparison.
#[derive(Debug, Clone)]
pub struct ComparisonRun {
    pub strategy: StrategyKind,
    pub seed: u64,
    pub env_steps: u64,
    pub iterations: usize,
    pub solved_rate: f64,
    pub mean_return: f64,
    pub report: RunReport,
}

/// Trains every strategy on every seed and evaluates the final student
/// greedily on `suite`. Runs are independent and are spread over `jobs`
/// worker threads; results come back in (strategy, seed) order.
pub fn compare(
    base: &RunConfig,
    strategies: &[StrategyKind],
    seeds: &[u64],
    suite: &[MazeLevel],
    jobs: usize,
) -> Result<Vec<ComparisonRun>> {
    let tasks: Vec<(StrategyKind, u64)> = strategies
        .iter()
        .flat_map(|&k| seeds.iter().map(move |&s| (k, s)))
        .collect();
    let run_one = |&(kind, seed): &(StrategyKind, u64)| -> Result<ComparisonRun> {
        let mut cfg = base.clone();
        cfg.strategy.kind = kind;
        cfg.seed = seed;
        let report = run(&cfg, suite).map_err(|e| match e {
            LabError::Core(c) => LabError::Core(c.with_context(&format!("{kind} seed {seed}"))),
            other => other,
        })?;
        let eval = evaluate(
            &report.student,
            suite,
            &cfg.maze,
            cfg.eval_episodes.max(1),
            EvalMode::Greedy,
        )?;
        Ok(ComparisonRun {
            strategy: kind,
            seed,
            env_steps: report.env_steps,
            iterations: report.rows.len(),
            solved_rate: eval.solved_rate,
            mean_return: eval.mean_return,
            report,
        })
    };
    let jobs = jobs.clamp(1, tasks.len().max(1));
    let mut results: Vec<Option<Result<ComparisonRun>>> = (0..tasks.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<usize>> = (0..jobs).map(|j| (j..tasks.len()).step_by(jobs).collect()).collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|idx| {
                let tasks = &tasks;
                let run_one = &run_one;
                scope.spawn(move || idx.into_iter().map(|i| (i, run_one(&tasks[i]))).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker thread panicked") {
                results[i] = Some(r);
            }
        }
    });
    results.into_iter().map(|r| r.expect("every task ran")).collect()
}

/// Mean solved rate per strategy over its seeds, in `strategies` order.
pub fn mean_solved_rates(runs: &[ComparisonRun], strategies: &[StrategyKind]) -> Vec<(StrategyKind, f64)> {
    strategies
        .iter()
        .map(|&k| {
            let rates: Vec<f64> = runs.iter().filter(|r| r.strategy == k).map(|r| r.solved_rate).collect();
            (k, rates.iter().sum::<f64>() / rates.len().max(1) as f64)
        })
        .collect()
}

/// CSV summary of a comparison, one line per run.
pub fn comparison_csv(runs: &[ComparisonRun]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "strategy",
        "seed",
        "env_steps",
        "iterations",
        "solved_rate",
        "mean_return",
    ])
    .expect("in-memory write");
    for r in runs {
        w.write_record([
            r.strategy.tag().to_string(),
            r.seed.to_string(),
            r.env_steps.to_string(),
            r.iterations.to_string(),
            r.solved_rate.to_string(),
            r.mean_return.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

/// Per-run output directory of a comparison.
pub fn run_dir(out: &Path, kind: StrategyKind, seed: u64) -> PathBuf {
    out.join(format!("{}_seed{seed}", kind.tag()))
}
