//! Partially observable maze family.
//!
//! A designer places the start, the goal and up to `max_blocks` wall blocks on
//! a rectangular grid; the student navigates with `forward`, `turn_left` and
//! `turn_right` while seeing only an egocentric window in front of it.

mod ascii;
mod env;
mod level;

pub use ascii::{parse_ascii, render_ascii};
pub use env::{MazeAction, MazeEnv, CHANNELS};
pub use level::{
    build_level, decode_level, encode_design, is_solvable, Cell, DesignAction, DesignKind, Direction, MazeLevel,
};

/// Family tag carried by every maze `LevelParams`.
pub const FAMILY_ID: &str = "maze";

/// Grid and episode settings for the maze family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MazeConfig {
    pub width: usize,
    pub height: usize,
    pub max_blocks: usize,
    /// Episode horizon `T`.
    pub horizon: usize,
    /// Side `k` of the egocentric view window; must be odd.
    pub view_size: usize,
}

impl Default for MazeConfig {
    fn default() -> Self {
        Self {
            width: 13,
            height: 13,
            max_blocks: 25,
            horizon: 100,
            view_size: 5,
        }
    }
}

impl MazeConfig {
    pub fn num_cells(&self) -> usize {
        self.width * self.height
    }

    /// Observation length `4k^2 + 4`.
    pub fn obs_dim(&self) -> usize {
        CHANNELS * self.view_size * self.view_size + 4
    }

    /// Design steps of a full generator rollout: start, goal, then blocks.
    pub fn design_steps(&self) -> usize {
        2 + self.max_blocks
    }

    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error;
        if self.width == 0 || self.height == 0 || self.num_cells() < 2 {
            return Err(Error::config("maze needs at least two cells"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon must be positive"));
        }
        if self.view_size == 0 || self.view_size.is_multiple_of(2) {
            return Err(Error::config("view_size must be odd"));
        }
        if self.num_cells() > u32::MAX as usize {
            return Err(Error::config("grid too large"));
        }
        Ok(())
    }
}
