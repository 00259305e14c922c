//! Loading a directory of `.maze` evaluation levels.

use std::path::Path;

use ued_core::maze::{is_solvable, parse_ascii, MazeLevel};

use crate::error::{read_to_string, LabError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NamedLevel {
    /// File stem, e.g. `four_rooms`.
    pub name: String,
    pub level: MazeLevel,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Suite {
    /// Solvable levels in file-name order.
    pub levels: Vec<NamedLevel>,
    /// One message per file left out because its goal is unreachable.
    pub warnings: Vec<String>,
}

impl Suite {
    pub fn mazes(&self) -> Vec<MazeLevel> {
        self.levels.iter().map(|l| l.level.clone()).collect()
    }
}

/// Reads every `*.maze` file of `dir`, sorted by name. Unsolvable levels are
/// dropped with a warning; a directory without any usable level is an error.
pub fn load_suite(dir: &Path) -> Result<Suite> {
    let read = std::fs::read_dir(dir).map_err(|e| LabError::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in read {
        let path = entry.map_err(|e| LabError::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == "maze") {
            paths.push(path);
        }
    }
    paths.sort();
    let mut suite = Suite::default();
    for path in paths {
        let text = read_to_string(&path)?;
        let level = parse_ascii(&text).map_err(|e| LabError::parse(&path, e.to_string()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if is_solvable(&level) {
            suite.levels.push(NamedLevel { name, level });
        } else {
            suite
                .warnings
                .push(format!("warning: {} is unsolvable and was excluded", path.display()));
        }
    }
    if suite.levels.is_empty() {
        return Err(LabError::Config(format!("{}: no solvable .maze levels", dir.display())));
    }
    Ok(suite)
}
