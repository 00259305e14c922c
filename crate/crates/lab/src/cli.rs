//! The `ued` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ued_core::maze::{MazeConfig, CHANNELS};
use ued_core::strategies::{evaluate, EvalMode, StrategyKind};

use crate::config::{resolve, ExperimentConfig};
use crate::error::{write, LabError, Result};
use crate::experiment::{self, run_dir};
use crate::inspect::inspect;
use crate::metrics::parse_csv;
use crate::plot::{aggregate, check_metric, render_svg, Aggregation};
use crate::snapshot::{BufferSnapshot, PolicySnapshot};
use crate::suite::{load_suite, Suite};

#[derive(Debug, Parser)]
#[command(
    name = "ued",
    version,
    about = "Curriculum laboratory for unsupervised environment design"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one strategy and write metrics, policy, buffer and manifest.
    Train(TrainArgs),
    /// Evaluate a saved policy on a directory of .maze levels.
    Eval(EvalArgs),
    /// Print a buffer snapshot and check its cached diversity scores.
    InspectBuffer(InspectArgs),
    /// Plot metrics across seeds as an SVG line chart.
    Plot(PlotArgs),
    /// Train several strategies over several seeds and compare transfer.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed of the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run directory. Defaults to `<output_dir>/<strategy>_seed<seed>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub policy: PathBuf,
    /// Directory of .maze files.
    #[arg(long)]
    pub levels: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub episodes: usize,
    /// Sample actions from this seed instead of acting greedily.
    #[arg(long)]
    pub sample_seed: Option<u64>,
    #[arg(long, default_value_t = MazeConfig::default().horizon)]
    pub horizon: usize,
    /// Also write per-level results to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// One or more metrics.csv files.
    #[arg(long, num_args = 1.., required = true)]
    pub metrics: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Column to plot; repeat for stacked panels.
    #[arg(long = "metric", default_values_t = ["regret".to_string()])]
    pub metrics_to_plot: Vec<String>,
    #[arg(long, default_value = "mean")]
    pub agg: Aggregation,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated strategy tags.
    #[arg(long, value_delimiter = ',', default_values_t = ["divsp".to_string(), "dr".to_string(), "plr".to_string()])]
    pub strategies: Vec<String>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2, 3, 4])]
    pub seeds: Vec<u64>,
    /// Held-out levels. Defaults to the config's eval_suite_path.
    #[arg(long)]
    pub levels: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Write each run's artifacts and a summary.csv here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Train(a) => train(a, out),
        Command::Eval(a) => eval(a, out),
        Command::InspectBuffer(a) => inspect_buffer(a, out),
        Command::Plot(a) => plot(a, out),
        Command::Compare(a) => compare(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| LabError::io("<stdout>", e))
}

fn warn_all(suite: &Suite) {
    for w in &suite.warnings {
        eprintln!("{w}");
    }
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn train(a: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let mut experiment = ExperimentConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        experiment.seed = seed;
    }
    let cfg = experiment.run_config()?;
    let base = config_dir(&a.config);
    let suite = if experiment.eval_suite_path.is_empty() {
        Vec::new()
    } else {
        let suite = load_suite(&resolve(&base, &experiment.eval_suite_path))?;
        warn_all(&suite);
        suite.mazes()
    };
    let dir = a
        .out
        .unwrap_or_else(|| run_dir(&resolve(&base, &experiment.output_dir), cfg.strategy.kind, cfg.seed));
    let report = experiment::run(&cfg, &suite)?;
    let manifest = experiment::write_artifacts(&dir, &experiment, &cfg, &report)?;
    emit(
        out,
        &format!(
            "{} seed {}: {} iterations, {} env steps, artifacts in {}\n",
            manifest.strategy,
            manifest.seed,
            manifest.iterations,
            manifest.env_steps,
            dir.display()
        ),
    )
}

/// View side `k` recovered from an observation length `4k^2 + 4`.
fn view_size_for(d: usize) -> Option<usize> {
    let cells = d.checked_sub(4)? / CHANNELS;
    let k = (cells as f64).sqrt().round() as usize;
    (CHANNELS * k * k + 4 == d && k % 2 == 1).then_some(k)
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<()> {
    if a.episodes == 0 {
        return Err(LabError::Config("--episodes must be positive".into()));
    }
    if a.horizon == 0 {
        return Err(LabError::Config("--horizon must be positive".into()));
    }
    let snap = PolicySnapshot::load(&a.policy)?;
    let view_size = view_size_for(snap.d).ok_or_else(|| {
        LabError::Config(format!(
            "{}: policy dimension d = {} matches no maze view size",
            a.policy.display(),
            snap.d
        ))
    })?;
    let params = snap.params()?;
    let suite = load_suite(&a.levels)?;
    warn_all(&suite);
    let maze = MazeConfig {
        horizon: a.horizon,
        view_size,
        ..MazeConfig::default()
    };
    let mode = match a.sample_seed {
        Some(seed) => EvalMode::Sampled { seed },
        None => EvalMode::Greedy,
    };
    let result = evaluate(&params, &suite.mazes(), &maze, a.episodes, mode)?;

    let mut table = csv::Writer::from_writer(Vec::new());
    table
        .write_record(["level", "episodes", "solved_episodes", "mean_return", "mean_steps"])
        .expect("in-memory write");
    let mut text = String::new();
    for (named, r) in suite.levels.iter().zip(&result.levels) {
        text += &format!(
            "{:<24} solved {}/{}  mean_return {:.4}  mean_steps {:.1}\n",
            named.name, r.solved_episodes, r.episodes, r.mean_return, r.mean_steps
        );
        table
            .write_record([
                named.name.clone(),
                r.episodes.to_string(),
                r.solved_episodes.to_string(),
                r.mean_return.to_string(),
                r.mean_steps.to_string(),
            ])
            .expect("in-memory write");
    }
    text += &format!(
        "levels {}  solved_rate {}  mean_return {} (std error {})\n",
        result.levels.len(),
        result.solved_rate,
        result.mean_return,
        result.return_std_error
    );
    if let Some(path) = &a.csv {
        write(path, table.into_inner().expect("in-memory flush"))?;
    }
    emit(out, &text)
}

fn inspect_buffer(a: InspectArgs, out: &mut dyn Write) -> Result<()> {
    let snap = BufferSnapshot::load(&a.snapshot)?;
    let report = inspect(&snap)?;
    emit(out, &report.text)?;
    report.check()
}

fn plot(a: PlotArgs, out: &mut dyn Write) -> Result<()> {
    for m in &a.metrics_to_plot {
        check_metric(m)?;
    }
    let tables = a
        .metrics
        .iter()
        .map(|p| parse_csv(&std::fs::read_to_string(p).map_err(|e| LabError::io(p, e))?, p))
        .collect::<Result<Vec<_>>>()?;
    let panels = a
        .metrics_to_plot
        .iter()
        .map(|m| Ok((m.clone(), aggregate(&tables, m, a.agg)?)))
        .collect::<Result<Vec<_>>>()?;
    write(&a.out, render_svg(&panels, a.agg))?;
    emit(out, &format!("wrote {}\n", a.out.display()))
}

fn compare(a: CompareArgs, out: &mut dyn Write) -> Result<()> {
    let experiment = ExperimentConfig::load(&a.config)?;
    let cfg = experiment.run_config()?;
    let kinds = a
        .strategies
        .iter()
        .map(|s| {
            StrategyKind::from_tag(s).ok_or_else(|| LabError::Config(format!("--strategies: unknown strategy `{s}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if a.seeds.is_empty() {
        return Err(LabError::Config("--seeds: at least one seed is required".into()));
    }
    let levels = match &a.levels {
        Some(p) => p.clone(),
        None if !experiment.eval_suite_path.is_empty() => resolve(&config_dir(&a.config), &experiment.eval_suite_path),
        None => return Err(LabError::Config("--levels or eval_suite_path is required".into())),
    };
    let suite = load_suite(&levels)?;
    warn_all(&suite);
    let runs = experiment::compare(&cfg, &kinds, &a.seeds, &suite.mazes(), a.jobs)?;
    if let Some(dir) = &a.out {
        for r in &runs {
            let mut run_cfg = cfg.clone();
            run_cfg.strategy.kind = r.strategy;
            run_cfg.seed = r.seed;
            let mut echo = experiment.clone();
            echo.strategy.kind = r.strategy.tag().into();
            echo.seed = r.seed;
            experiment::write_artifacts(&run_dir(dir, r.strategy, r.seed), &echo, &run_cfg, &r.report)?;
        }
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        write(&dir.join("summary.csv"), experiment::comparison_csv(&runs))?;
    }
    let mut text = String::new();
    for r in &runs {
        text += &format!(
            "{:<8} seed {:<4} solved_rate {:.4}  mean_return {:.4}\n",
            r.strategy.tag(),
            r.seed,
            r.solved_rate,
            r.mean_return
        );
    }
    for (k, mean) in experiment::mean_solved_rates(&runs, &kinds) {
        text += &format!(
            "{:<8} mean solved_rate {:.4} over {} seeds\n",
            k.tag(),
            mean,
            a.seeds.len()
        );
    }
    emit(out, &text)
}
