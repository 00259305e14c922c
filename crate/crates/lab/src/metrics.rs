//! The per-iteration metrics CSV.

use std::path::Path;

use ued_core::strategies::{Branch, MetricsRow, StrategyKind};

use crate::error::{LabError, Result};

pub const COLUMNS: [&str; 12] = [
    "iteration",
    "env_steps",
    "strategy",
    "branch",
    "level_id",
    "regret",
    "f_gae",
    "buffer_size",
    "buffer_diversity",
    "eval_solved_rate",
    "eval_mean_return",
    "seed",
];

/// Columns that hold a (possibly empty) real value and can be plotted.
pub const NUMERIC_COLUMNS: [&str; 9] = [
    "iteration",
    "env_steps",
    "regret",
    "f_gae",
    "buffer_size",
    "buffer_diversity",
    "eval_solved_rate",
    "eval_mean_return",
    "level_id",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders rows as CSV text, header included.
pub fn to_csv(rows: &[MetricsRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.iteration.to_string(),
            r.env_steps.to_string(),
            r.strategy.tag().to_string(),
            r.branch.tag().to_string(),
            r.level_id.to_string(),
            opt(r.regret),
            opt(r.f_gae),
            r.buffer_size.to_string(),
            opt(r.buffer_diversity),
            opt(r.eval_solved_rate),
            opt(r.eval_mean_return),
            r.seed.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

/// A metrics file as read back: the strategy tag and seed of every row plus
/// the numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub strategy: StrategyKind,
    pub branch: Branch,
    pub seed: u64,
    /// Values of [`NUMERIC_COLUMNS`], by name.
    values: Vec<(&'static str, Option<f64>)>,
}

impl MetricsRecord {
    pub fn get(&self, column: &str) -> Option<f64> {
        self.values.iter().find(|(c, _)| *c == column).and_then(|(_, v)| *v)
    }
}

fn parse_opt(path: &Path, line: u64, column: &str, text: &str) -> Result<Option<f64>> {
    if text.is_empty() {
        return Ok(None);
    }
    text.parse::<f64>().map(Some).map_err(|_| {
        LabError::parse(
            path,
            format!("line {line}: column `{column}` holds `{text}`, not a number"),
        )
    })
}

/// Parses a metrics CSV, checking the exact column layout.
pub fn parse_csv(text: &str, path: &Path) -> Result<MetricsTable> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| LabError::parse(path, format!("unreadable header: {e}")))?
        .clone();
    for (i, expected) in COLUMNS.iter().enumerate() {
        match header.get(i) {
            Some(h) if h == *expected => {}
            Some(h) => {
                return Err(LabError::parse(
                    path,
                    format!("column {} is `{h}`, expected `{expected}`", i + 1),
                ))
            }
            None => return Err(LabError::parse(path, format!("missing column `{expected}`"))),
        }
    }
    if header.len() > COLUMNS.len() {
        return Err(LabError::parse(
            path,
            format!("unexpected extra column `{}`", &header[COLUMNS.len()]),
        ));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| LabError::parse(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |name: &str| {
            let i = COLUMNS.iter().position(|c| *c == name).expect("known column");
            rec.get(i).unwrap_or("")
        };
        let strategy = StrategyKind::from_tag(field("strategy")).ok_or_else(|| {
            LabError::parse(
                path,
                format!("line {line}: column `strategy` holds `{}`", field("strategy")),
            )
        })?;
        let branch = match field("branch") {
            "gen" => Branch::Generate,
            "replay" => Branch::Replay,
            other => {
                return Err(LabError::parse(
                    path,
                    format!("line {line}: column `branch` holds `{other}`"),
                ));
            }
        };
        let seed = field("seed")
            .parse::<u64>()
            .map_err(|_| LabError::parse(path, format!("line {line}: column `seed` holds `{}`", field("seed"))))?;
        let mut values = Vec::with_capacity(NUMERIC_COLUMNS.len());
        for c in NUMERIC_COLUMNS {
            values.push((c, parse_opt(path, line, c, field(c))?));
        }
        for required in ["iteration", "env_steps", "level_id", "buffer_size"] {
            if values.iter().any(|(c, v)| *c == required && v.is_none()) {
                return Err(LabError::parse(
                    path,
                    format!("line {line}: column `{required}` is empty"),
                ));
            }
        }
        rows.push(MetricsRecord {
            strategy,
            branch,
            seed,
            values,
        });
    }
    Ok(MetricsTable { rows })
}
