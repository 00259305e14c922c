use alloc::format;
use alloc::vec;

use super::level::{decode_level, Cell, Direction, MazeLevel};
use super::{MazeConfig, FAMILY_ID};
use crate::env::{Environment, LevelParams, Observation, StepOutcome};
use crate::error::{Error, Result};

/// One-hot channels per view cell: empty, wall, goal, out-of-bounds.
pub const CHANNELS: usize = 4;

const EMPTY: usize = 0;
const WALL: usize = 1;
const GOAL: usize = 2;
const OUT_OF_BOUNDS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MazeAction {
    Forward = 0,
    TurnLeft = 1,
    TurnRight = 2,
}

impl MazeAction {
    pub const COUNT: usize = 3;

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(MazeAction::Forward),
            1 => Some(MazeAction::TurnLeft),
            2 => Some(MazeAction::TurnRight),
            _ => None,
        }
    }
}

/// Student-side maze environment.
///
/// Reward is zero except on reaching the goal at step `t` (counted from 1),
/// which pays `1 - 0.9 t / T` and terminates. Episodes truncate at `T`.
#[derive(Debug, Clone)]
pub struct MazeEnv {
    cfg: MazeConfig,
    level: Option<MazeLevel>,
    pos: Cell,
    dir: Direction,
    t: usize,
    done: bool,
}

impl MazeEnv {
    pub fn new(cfg: MazeConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            level: None,
            pos: Cell::new(0, 0),
            dir: Direction::East,
            t: 0,
            done: true,
        })
    }

    pub fn config(&self) -> &MazeConfig {
        &self.cfg
    }

    /// Starts an episode on an explicit level, e.g. one parsed from a file.
    /// The grid may differ in size from the configured one.
    pub fn reset_level(&mut self, level: MazeLevel) -> Result<Observation> {
        level.check()?;
        self.pos = level.start;
        self.dir = level.facing;
        self.t = 0;
        self.done = false;
        self.level = Some(level);
        Ok(self.observe())
    }

    pub fn level(&self) -> Option<&MazeLevel> {
        self.level.as_ref()
    }

    pub fn position(&self) -> (Cell, Direction) {
        (self.pos, self.dir)
    }

    pub fn steps_taken(&self) -> usize {
        self.t
    }

    fn observe(&self) -> Observation {
        let level = self.level.as_ref().expect("observe before reset");
        let k = self.cfg.view_size;
        let half = (k / 2) as isize;
        let mut features = vec![0.0; self.cfg.obs_dim()];
        let (fx, fy) = self.dir.delta();
        let (rx, ry) = self.dir.turn_right().delta();
        for ahead in 0..k as isize {
            for lateral in -half..=half {
                let x = self.pos.x as isize + ahead * fx + lateral * rx;
                let y = self.pos.y as isize + ahead * fy + lateral * ry;
                let channel = if x < 0 || y < 0 || x as usize >= level.width || y as usize >= level.height {
                    OUT_OF_BOUNDS
                } else {
                    let c = Cell::new(x as usize, y as usize);
                    if level.is_wall(c) {
                        WALL
                    } else if c == level.goal {
                        GOAL
                    } else {
                        EMPTY
                    }
                };
                let slot = ahead as usize * k + (lateral + half) as usize;
                features[slot * CHANNELS + channel] = 1.0;
            }
        }
        features[CHANNELS * k * k + self.dir.index()] = 1.0;
        Observation::new(features)
    }
}

impl Environment for MazeEnv {
    fn family_id(&self) -> &str {
        FAMILY_ID
    }

    fn obs_dim(&self) -> usize {
        self.cfg.obs_dim()
    }

    fn num_actions(&self) -> usize {
        MazeAction::COUNT
    }

    fn horizon(&self) -> usize {
        self.cfg.horizon
    }

    fn reset(&mut self, level: &LevelParams) -> Result<Observation> {
        let level = decode_level(level, &self.cfg)?;
        self.reset_level(level)
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::Usage(
                "step called before reset or after the episode ended".into(),
            ));
        }
        let action =
            MazeAction::from_index(action).ok_or_else(|| Error::Usage(format!("unknown maze action {action}")))?;
        let level = self.level.as_ref().expect("reset sets the level");
        self.t += 1;
        let mut reward = 0.0;
        let mut terminal = false;
        match action {
            MazeAction::TurnLeft => self.dir = self.dir.turn_left(),
            MazeAction::TurnRight => self.dir = self.dir.turn_right(),
            MazeAction::Forward => {
                if let Some(next) = level.neighbor(self.pos, self.dir) {
                    if !level.is_wall(next) {
                        self.pos = next;
                        if next == level.goal {
                            reward = 1.0 - 0.9 * (self.t as f64 / self.cfg.horizon as f64);
                            terminal = true;
                        }
                    }
                }
            }
        }
        let truncated = !terminal && self.t >= self.cfg.horizon;
        self.done = terminal || truncated;
        Ok(StepOutcome {
            obs: self.observe(),
            reward,
            terminal,
            truncated,
        })
    }
}
