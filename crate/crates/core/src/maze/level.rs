use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{MazeConfig, FAMILY_ID};
use crate::env::LevelParams;
use crate::error::{Error, Result};

/// Grid coordinate. Ordered row-major so wall sets iterate by flattened index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub y: usize,
    pub x: usize,
}

impl Cell {
    pub fn new(x: usize, y: usize) -> Self {
        Self { y, x }
    }

    pub fn from_index(index: usize, width: usize) -> Self {
        Self::new(index % width, index / width)
    }

    pub fn index(&self, width: usize) -> usize {
        self.y * width + self.x
    }
}

/// Facing direction, clockwise from east.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Direction {
    #[default]
    East,
    South,
    West,
    North,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::East, Direction::South, Direction::West, Direction::North];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i % 4]
    }

    pub fn turn_right(self) -> Self {
        Self::from_index(self.index() + 1)
    }

    pub fn turn_left(self) -> Self {
        Self::from_index(self.index() + 3)
    }

    /// Unit step `(dx, dy)` with `y` growing downwards.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
            Direction::North => (0, -1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MazeLevel {
    pub width: usize,
    pub height: usize,
    pub start: Cell,
    pub facing: Direction,
    pub goal: Cell,
    pub walls: BTreeSet<Cell>,
}

impl MazeLevel {
    /// A wall-free level.
    pub fn empty(width: usize, height: usize, start: Cell, goal: Cell) -> Result<Self> {
        let level = Self {
            width,
            height,
            start,
            facing: Direction::East,
            goal,
            walls: BTreeSet::new(),
        };
        level.check()?;
        Ok(level)
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        self.walls.contains(&c)
    }

    /// Neighbour of `c` one step along `dir`, if inside the grid.
    pub fn neighbor(&self, c: Cell, dir: Direction) -> Option<Cell> {
        let (dx, dy) = dir.delta();
        let x = c.x.checked_add_signed(dx)?;
        let y = c.y.checked_add_signed(dy)?;
        let n = Cell::new(x, y);
        self.contains(n).then_some(n)
    }

    /// Structural invariants; the wall budget is a generator constraint and is
    /// not checked here.
    pub fn check(&self) -> Result<()> {
        if !self.contains(self.start) || !self.contains(self.goal) {
            return Err(Error::InvalidDesign("start or goal outside the grid".into()));
        }
        if self.start == self.goal {
            return Err(Error::InvalidDesign("start and goal coincide".into()));
        }
        if self.is_wall(self.start) || self.is_wall(self.goal) {
            return Err(Error::InvalidDesign("start or goal covered by a wall".into()));
        }
        if let Some(w) = self.walls.iter().find(|w| !self.contains(**w)) {
            return Err(Error::InvalidDesign(format!("wall {w:?} outside the grid")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DesignKind {
    PlaceStart,
    PlaceGoal,
    PlaceBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignAction {
    pub kind: DesignKind,
    /// Flattened cell index, row-major.
    pub cell: usize,
}

impl DesignAction {
    pub fn start(cell: usize) -> Self {
        Self {
            kind: DesignKind::PlaceStart,
            cell,
        }
    }

    pub fn goal(cell: usize) -> Self {
        Self {
            kind: DesignKind::PlaceGoal,
            cell,
        }
    }

    pub fn block(cell: usize) -> Self {
        Self {
            kind: DesignKind::PlaceBlock,
            cell,
        }
    }
}

/// Builds a level from a design sequence: `place_start`, `place_goal`, then
/// block placements. Blocks landing on the start, the goal or an existing wall
/// are skipped, as is every block after the wall budget is spent. The start
/// facing is `seed mod 4`.
pub fn build_level(actions: &[DesignAction], seed: u64, cfg: &MazeConfig) -> Result<MazeLevel> {
    let n = cfg.num_cells();
    if let Some(bad) = actions.iter().find(|a| a.cell >= n) {
        return Err(Error::InvalidDesign(format!(
            "cell index {} outside a {}x{} grid",
            bad.cell, cfg.width, cfg.height
        )));
    }
    let (start, goal) = match actions {
        [s, g, ..] if s.kind == DesignKind::PlaceStart && g.kind == DesignKind::PlaceGoal => (s.cell, g.cell),
        _ => {
            return Err(Error::InvalidDesign(
                "design must open with place_start then place_goal".into(),
            ))
        }
    };
    if start == goal {
        return Err(Error::InvalidDesign("start and goal coincide".into()));
    }
    let mut walls = BTreeSet::new();
    for a in &actions[2..] {
        if a.kind != DesignKind::PlaceBlock {
            return Err(Error::InvalidDesign("start and goal may only be placed once".into()));
        }
        if walls.len() == cfg.max_blocks {
            continue;
        }
        if a.cell != start && a.cell != goal {
            walls.insert(Cell::from_index(a.cell, cfg.width));
        }
    }
    Ok(MazeLevel {
        width: cfg.width,
        height: cfg.height,
        start: Cell::from_index(start, cfg.width),
        facing: Direction::from_index((seed % 4) as usize),
        goal: Cell::from_index(goal, cfg.width),
        walls,
    })
}

/// Packs a design sequence into family parameters: `[start, goal, blocks..]`.
pub fn encode_design(actions: &[DesignAction], seed: u64) -> LevelParams {
    LevelParams {
        family_id: FAMILY_ID.into(),
        encoding: actions.iter().map(|a| a.cell as u32).collect(),
        seed,
    }
}

/// Rebuilds the level described by maze family parameters.
pub fn decode_level(params: &LevelParams, cfg: &MazeConfig) -> Result<MazeLevel> {
    if params.family_id != FAMILY_ID {
        return Err(Error::config(format!(
            "unknown environment family '{}'",
            params.family_id
        )));
    }
    if params.encoding.len() > cfg.design_steps() {
        return Err(Error::InvalidDesign(format!(
            "encoding has {} design steps, at most {} allowed",
            params.encoding.len(),
            cfg.design_steps()
        )));
    }
    let actions: Vec<DesignAction> = params
        .encoding
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let kind = match i {
                0 => DesignKind::PlaceStart,
                1 => DesignKind::PlaceGoal,
                _ => DesignKind::PlaceBlock,
            };
            DesignAction { kind, cell: c as usize }
        })
        .collect();
    build_level(&actions, params.seed, cfg)
}

/// Whether a 4-connected wall-free path joins start and goal (breadth-first).
pub fn is_solvable(level: &MazeLevel) -> bool {
    let mut seen = vec![false; level.width * level.height];
    let mut queue = VecDeque::new();
    seen[level.start.index(level.width)] = true;
    queue.push_back(level.start);
    while let Some(c) = queue.pop_front() {
        if c == level.goal {
            return true;
        }
        for dir in Direction::ALL {
            if let Some(n) = level.neighbor(c, dir) {
                let i = n.index(level.width);
                if !seen[i] && !level.is_wall(n) {
                    seen[i] = true;
                    queue.push_back(n);
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> MazeConfig {
        MazeConfig {
            width: 5,
            height: 5,
            ..MazeConfig::default()
        }
    }

    #[test]
    fn start_and_goal_only_gives_empty_maze() {
        let level = build_level(&[DesignAction::start(0), DesignAction::goal(1)], 0, &small()).unwrap();
        assert!(level.walls.is_empty());
        assert_eq!(level.start, Cell::new(0, 0));
        assert_eq!(level.goal, Cell::new(1, 0));
    }

    #[test]
    fn block_on_goal_is_skipped() {
        let cfg = small();
        let actions = [
            DesignAction::start(0),
            DesignAction::goal(7),
            DesignAction::block(3),
            DesignAction::block(7),
            DesignAction::block(0),
            DesignAction::block(3),
        ];
        let level = build_level(&actions, 0, &cfg).unwrap();
        assert_eq!(level.walls.len(), 1);
        assert!(level.is_wall(Cell::from_index(3, 5)));
    }

    #[test]
    fn wall_budget_caps_placements() {
        let cfg = MazeConfig::default();
        let mut actions = vec![DesignAction::start(0), DesignAction::goal(1)];
        actions.extend((10..40).map(DesignAction::block));
        let level = build_level(&actions, 0, &cfg).unwrap();
        assert_eq!(level.walls.len(), 25);
    }

    #[test]
    fn missing_goal_is_invalid() {
        let err = build_level(&[DesignAction::start(0), DesignAction::block(1)], 0, &small());
        assert!(matches!(err, Err(Error::InvalidDesign(_))));
        let err = build_level(&[DesignAction::start(0)], 0, &small());
        assert!(matches!(err, Err(Error::InvalidDesign(_))));
    }

    #[test]
    fn coinciding_start_and_goal_is_invalid() {
        let err = build_level(&[DesignAction::start(4), DesignAction::goal(4)], 0, &small());
        assert!(matches!(err, Err(Error::InvalidDesign(_))));
    }

    #[test]
    fn seed_sets_facing() {
        let a = [DesignAction::start(0), DesignAction::goal(1)];
        assert_eq!(build_level(&a, 6, &small()).unwrap().facing, Direction::West);
    }

    #[test]
    fn encoding_round_trip() {
        let cfg = small();
        let actions = [DesignAction::start(3), DesignAction::goal(9), DesignAction::block(12)];
        let params = encode_design(&actions, 5);
        assert_eq!(
            decode_level(&params, &cfg).unwrap(),
            build_level(&actions, 5, &cfg).unwrap()
        );
    }

    #[test]
    fn unknown_family_is_a_config_error() {
        let params = LevelParams {
            family_id: "walker".into(),
            encoding: vec![0, 1],
            seed: 0,
        };
        assert!(matches!(decode_level(&params, &small()), Err(Error::Config(_))));
    }

    #[test]
    fn empty_grid_is_solvable() {
        let level = MazeLevel::empty(5, 5, Cell::new(0, 0), Cell::new(4, 4)).unwrap();
        assert!(is_solvable(&level));
    }

    #[test]
    fn enclosed_goal_is_unsolvable() {
        let mut level = MazeLevel::empty(5, 5, Cell::new(0, 0), Cell::new(2, 2)).unwrap();
        for c in [Cell::new(1, 2), Cell::new(3, 2), Cell::new(2, 1), Cell::new(2, 3)] {
            level.walls.insert(c);
        }
        assert!(!is_solvable(&level));
    }
}
