//! End-to-end checks of the `ued` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ued_core::curriculum::{BufferEntry, LevelBuffer, ReplacementRule, ReplayConfig};
use ued_core::diversity::{CosineKernel, RepresentativeSet};
use ued_core::learner::PolicyParams;
use ued_core::maze::{encode_design, DesignAction, MazeAction, MazeConfig, CHANNELS, FAMILY_ID};
use ued_lab::metrics::COLUMNS;
use ued_lab::plot::mean_and_std_error;
use ued_lab::snapshot::{BufferSnapshot, PolicySnapshot};

fn ued(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ued"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("exp.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"
seed = 3
[env]
width = 7
height = 7
max_blocks = 6
horizon = 30
[strategy]
kind = "divsp"
total_env_steps = 4000
"#;

#[test]
fn zero_budget_writes_a_header_only_metrics_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[strategy]\ntotal_env_steps = 0\n");
    let out = dir.path().join("run");
    let o = ued(&["train", "--config", p(&cfg), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(metrics, format!("{}\n", COLUMNS.join(",")));
    for name in ["policy.json", "buffer.json", "manifest.json"] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    let manifest = ued_lab::manifest::RunManifest::load(&out.join("manifest.json")).unwrap();
    manifest.verify(&out).unwrap();
    assert!(manifest.config.contains("total_env_steps = 0"));
    assert!(manifest.config.contains("[curriculum]"));
}

#[test]
fn same_config_and_seed_give_identical_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = ued(&["train", "--config", p(&cfg), "--out", p(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let ma = std::fs::read(a.join("metrics.csv")).unwrap();
    let mb = std::fs::read(b.join("metrics.csv")).unwrap();
    assert!(ma.len() > COLUMNS.join(",").len() + 1, "run produced no rows");
    assert_eq!(ma, mb);
    for name in ["policy.json", "buffer.json"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }

    let c = dir.path().join("c");
    let o = ued(&["train", "--config", p(&cfg), "--seed", "4", "--out", p(&c)]);
    assert!(o.status.success());
    assert_ne!(std::fs::read(c.join("metrics.csv")).unwrap(), ma);
}

#[test]
fn default_output_dir_is_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "output_dir = \"results\"\n[strategy]\nkind = \"dr\"\ntotal_env_steps = 0\n",
    );
    let o = ued(&["train", "--config", p(&cfg), "--seed", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("results/dr_seed9/metrics.csv").is_file());
}

#[test]
fn unknown_strategy_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[strategy]\nkind = \"bogus\"\n");
    let o = ued(&["train", "--config", p(&cfg), "--out", p(&dir.path().join("r"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("strategy.kind"), "{}", stderr(&o));
}

#[test]
fn out_of_range_field_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[curriculum]\nrho = 1.5\n");
    let o = ued(&["train", "--config", p(&cfg), "--out", p(&dir.path().join("r"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("curriculum.rho"), "{}", stderr(&o));
}

#[test]
fn numerical_failure_exits_4_with_iteration_context() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{SMALL}\n[learner]\nlearning_rate = 1e308\ncritic_learning_rate = 1e308\n");
    let cfg = write_config(dir.path(), &body);
    let o = ued(&["train", "--config", p(&cfg), "--out", p(&dir.path().join("r"))]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("iteration"), "{}", stderr(&o));
}

fn save_policy(dir: &Path, params: &PolicyParams) -> PathBuf {
    let path = dir.join("policy.json");
    PolicySnapshot::new(params, FAMILY_ID).save(&path).unwrap();
    path
}

fn levels_dir(dir: &Path, files: &[(&str, &str)]) -> PathBuf {
    let levels = dir.join("levels");
    std::fs::create_dir_all(&levels).unwrap();
    for (name, body) in files {
        std::fs::write(levels.join(name), body).unwrap();
    }
    levels
}

fn solved_rate(text: &str) -> f64 {
    let tail = text.split("solved_rate ").nth(1).expect("summary line");
    tail.split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn random_policy_sometimes_solves_an_empty_room() {
    let dir = tempfile::tempdir().unwrap();
    let d = MazeConfig::default().obs_dim();
    let policy = save_policy(dir.path(), &PolicyParams::zeros(MazeAction::COUNT, d));
    let levels = levels_dir(dir.path(), &[("room.maze", "A....\n.....\n.....\n.....\n....G\n")]);
    let o = ued(&[
        "eval",
        "--policy",
        p(&policy),
        "--levels",
        p(&levels),
        "--episodes",
        "100",
        "--sample-seed",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rate = solved_rate(&stdout(&o));
    assert!(rate > 0.0 && rate <= 1.0, "rate {rate}");
}

#[test]
fn forward_policy_solves_a_corridor_and_eval_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = MazeConfig::default();
    let d = cfg.obs_dim();
    let mut params = PolicyParams::zeros(MazeAction::COUNT, d);
    // The facing one-hot is always present, so weighting it on the forward
    // row makes forward the argmax in every state.
    let facing = CHANNELS * cfg.view_size * cfg.view_size;
    for dir_index in 0..4 {
        params.actor_weights[MazeAction::Forward as usize * d + facing + dir_index] = 1.0;
    }
    let policy = save_policy(dir.path(), &params);
    let levels = levels_dir(dir.path(), &[("corridor.maze", "#########\nA.......G\n#########\n")]);
    let csv = dir.path().join("eval.csv");
    let args = [
        "eval",
        "--policy",
        p(&policy),
        "--levels",
        p(&levels),
        "--episodes",
        "3",
        "--csv",
        p(&csv),
    ];
    let first = ued(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    assert_eq!(solved_rate(&stdout(&first)), 1.0);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.lines().nth(1).unwrap().starts_with("corridor,3,3,"), "{table}");
    let second = ued(&args);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn unsolvable_level_is_excluded_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let d = MazeConfig::default().obs_dim();
    let policy = save_policy(dir.path(), &PolicyParams::zeros(MazeAction::COUNT, d));
    let levels = levels_dir(
        dir.path(),
        &[("open.maze", "A..\n...\n..G\n"), ("walled.maze", "A#.\n##.\n..G\n")],
    );
    let o = ued(&["eval", "--policy", p(&policy), "--levels", p(&levels)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("walled.maze is unsolvable"), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("open") && !out.contains("walled"));
    assert!(out.contains("levels 1 "));
}

#[test]
fn policy_of_foreign_dimension_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let policy = save_policy(dir.path(), &PolicyParams::zeros(MazeAction::COUNT, 50));
    let levels = levels_dir(dir.path(), &[("open.maze", "A.G\n")]);
    let o = ued(&["eval", "--policy", p(&policy), "--levels", p(&levels)]);
    assert_eq!(o.status.code(), Some(2));
}

fn two_level_buffer(a: Vec<f64>, b: Vec<f64>) -> LevelBuffer {
    let maze = MazeConfig::default();
    let mut buffer = LevelBuffer::new(
        ReplayConfig::default(),
        ReplacementRule::Diversity,
        CosineKernel::default(),
    )
    .unwrap();
    for (id, v) in [(0u64, a), (1, b)] {
        let level = encode_design(
            &[
                DesignAction::start(id as usize),
                DesignAction::goal(maze.num_cells() - 1),
            ],
            id,
        );
        let reps = RepresentativeSet {
            level_ref: id,
            capacity: 8,
            vectors: vec![v],
        };
        buffer.try_insert(BufferEntry::new(id, level, reps, 0.5, id)).unwrap();
    }
    buffer
}

#[test]
fn orthogonal_levels_report_zero_diversity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("buffer.json");
    BufferSnapshot::new(&two_level_buffer(vec![1.0, 0.0], vec![0.0, 1.0]), MazeConfig::default())
        .save(&path)
        .unwrap();
    let o = ued(&["inspect-buffer", "--snapshot", p(&path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("2 entries"), "{out}");
    assert!(out.contains("buffer diversity (recomputed): 0\n"), "{out}");
    assert!(out.contains("A"), "level render missing:\n{out}");
}

#[test]
fn tampered_score_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("buffer.json");
    let mut snap = BufferSnapshot::new(&two_level_buffer(vec![1.0, 0.0], vec![1.0, 1.0]), MazeConfig::default());
    snap.save(&path).unwrap();
    assert!(ued(&["inspect-buffer", "--snapshot", p(&path)]).status.success());
    snap.entries[1].div_score += 1e-6;
    snap.save(&path).unwrap();
    let o = ued(&["inspect-buffer", "--snapshot", p(&path)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("MISMATCH"));
}

#[test]
fn empty_buffer_reports_zero_entries() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("buffer.json");
    BufferSnapshot::empty(MazeConfig::default(), ReplayConfig::default(), 1e-8)
        .save(&path)
        .unwrap();
    let o = ued(&["inspect-buffer", "--snapshot", p(&path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("0 entries"));
}

#[test]
fn corrupt_snapshot_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("buffer.json");
    std::fs::write(&path, "{ not json").unwrap();
    let o = ued(&["inspect-buffer", "--snapshot", p(&path)]);
    assert_eq!(o.status.code(), Some(2));
}

fn metrics_file(dir: &Path, name: &str, seed: u64, values: &[f64]) -> PathBuf {
    let mut text = format!("{}\n", COLUMNS.join(","));
    for (i, v) in values.iter().enumerate() {
        text += &format!("{i},{},dr,gen,{i},{v},0.1,0,,,,{seed}\n", 100 * (i + 1));
    }
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn attr<'a>(svg: &'a str, element: &str, class: &str) -> Vec<&'a str> {
    svg.lines()
        .filter(|l| l.starts_with(&format!("<{element} class=\"{class}\"")))
        .map(|l| l.split("points=\"").nth(1).unwrap().split('"').next().unwrap())
        .collect()
}

fn ys(points: &str) -> Vec<f64> {
    points
        .split_whitespace()
        .map(|pt| pt.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn single_run_plots_one_line_without_band() {
    let dir = tempfile::tempdir().unwrap();
    let m = metrics_file(dir.path(), "m.csv", 0, &[0.1, 0.4, 0.2]);
    let svg_path = dir.path().join("plot.svg");
    let o = ued(&["plot", "--metrics", p(&m), "--out", p(&svg_path), "--metric", "regret"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(attr(&svg, "polyline", "line").len(), 1);
    assert!(attr(&svg, "polygon", "band").is_empty());
}

#[test]
fn five_seed_band_half_width_is_the_std_error() {
    let dir = tempfile::tempdir().unwrap();
    let per_seed: Vec<Vec<f64>> = (0..5)
        .map(|s| {
            (0..6)
                .map(|i| ((s * 7 + i * 3) % 11) as f64 / 10.0 + i as f64 * 0.2)
                .collect()
        })
        .collect();
    let files: Vec<PathBuf> = per_seed
        .iter()
        .enumerate()
        .map(|(s, v)| metrics_file(dir.path(), &format!("s{s}.csv"), s as u64, v))
        .collect();
    let svg_path = dir.path().join("plot.svg");
    let mut args = vec!["plot", "--metrics"];
    args.extend(files.iter().map(|f| p(f)));
    args.extend(["--out", p(&svg_path), "--metric", "regret", "--agg", "mean"]);
    let o = ued(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    let line = ys(attr(&svg, "polyline", "line")[0]);
    let band = ys(attr(&svg, "polygon", "band")[0]);
    assert_eq!(band.len(), 2 * line.len());

    let stats: Vec<(f64, f64)> = (0..6)
        .map(|i| mean_and_std_error(&per_seed.iter().map(|v| v[i]).collect::<Vec<_>>()))
        .collect();
    // Recover the pixel scale of the y axis from the two most distant means.
    let (lo, hi) = (0..6).fold((0, 0), |(lo, hi), i| {
        (
            if stats[i].0 < stats[lo].0 { i } else { lo },
            if stats[i].0 > stats[hi].0 { i } else { hi },
        )
    });
    let scale = (line[lo] - line[hi]) / (stats[hi].0 - stats[lo].0);
    for i in 0..6 {
        let upper = band[i];
        let lower = band[2 * line.len() - 1 - i];
        let half_width = (lower - upper) / 2.0 / scale;
        assert!(
            (half_width - stats[i].1).abs() < 0.02 / scale + 1e-9,
            "step {i}: band half-width {half_width} vs std error {}",
            stats[i].1
        );
        assert!(((upper + lower) / 2.0 - line[i]).abs() < 0.011);
    }
}

#[test]
fn zero_row_csv_plots_empty_axes() {
    let dir = tempfile::tempdir().unwrap();
    let m = metrics_file(dir.path(), "m.csv", 0, &[]);
    let svg_path = dir.path().join("plot.svg");
    let o = ued(&["plot", "--metrics", p(&m), "--out", p(&svg_path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.contains("class=\"axes\""));
    assert!(attr(&svg, "polyline", "line").is_empty());
}

#[test]
fn schema_mismatch_names_the_column() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("bad.csv");
    std::fs::write(&m, COLUMNS.join(",").replace("f_gae", "fgae") + "\n").unwrap();
    let o = ued(&["plot", "--metrics", p(&m), "--out", p(&dir.path().join("x.svg"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("f_gae"), "{}", stderr(&o));
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|x| x == "toml") {
            let cfg = ued_lab::config::ExperimentConfig::load(&path).unwrap();
            cfg.run_config().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 3);
    // The desk-scale configs spell out the library defaults.
    let divsp = ued_lab::config::ExperimentConfig::load(&dir.join("divsp.toml")).unwrap();
    let mut expected = ued_core::strategies::RunConfig::default();
    expected.eval_interval = 200;
    assert_eq!(divsp.run_config().unwrap(), expected);
}
