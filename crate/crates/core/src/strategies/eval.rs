//! Zero-shot transfer evaluation on fixed levels.

use alloc::vec::Vec;

use crate::error::Result;
use crate::learner::{run_episode_from, ActionMode, PolicyParams};
use crate::math;
use crate::maze::{MazeConfig, MazeEnv, MazeLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Argmax actions; every episode of a level is identical.
    Greedy,
    /// Sampled actions from a dedicated seed.
    Sampled { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelEval {
    pub episodes: usize,
    pub solved_episodes: usize,
    pub mean_return: f64,
    pub mean_steps: f64,
}

impl LevelEval {
    pub fn solved(&self) -> bool {
        self.solved_episodes > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub levels: Vec<LevelEval>,
    /// Fraction of all episodes that reached the goal.
    pub solved_rate: f64,
    pub mean_return: f64,
    /// Standard error of the mean return over all episodes.
    pub return_std_error: f64,
}

/// Plays `episodes` episodes per level with `params` and summarizes them.
/// Returns are undiscounted. `cfg` supplies the horizon and view size; each
/// level keeps its own grid size.
pub fn evaluate(
    params: &PolicyParams,
    levels: &[MazeLevel],
    cfg: &MazeConfig,
    episodes: usize,
    mode: EvalMode,
) -> Result<EvalResult> {
    let mut env = MazeEnv::new(*cfg)?;
    let mut rng = crate::seeded_rng(match mode {
        EvalMode::Greedy => 0,
        EvalMode::Sampled { seed } => seed,
    });
    let action_mode = match mode {
        EvalMode::Greedy => ActionMode::Greedy,
        EvalMode::Sampled { .. } => ActionMode::Sample,
    };
    let mut all_returns = Vec::with_capacity(levels.len() * episodes);
    let mut solved_total = 0;
    let mut per_level = Vec::with_capacity(levels.len());
    for level in levels {
        let mut solved = 0;
        let mut returns = 0.0;
        let mut steps = 0usize;
        for _ in 0..episodes {
            let obs = env.reset_level(level.clone())?;
            let traj = run_episode_from(&mut env, obs, params, action_mode, &mut rng)?;
            let ret: f64 = traj.rewards().sum();
            if traj.steps.last().is_some_and(|s| s.terminal) {
                solved += 1;
            }
            returns += ret;
            steps += traj.len();
            all_returns.push(ret);
        }
        solved_total += solved;
        per_level.push(LevelEval {
            episodes,
            solved_episodes: solved,
            mean_return: returns / episodes.max(1) as f64,
            mean_steps: steps as f64 / episodes.max(1) as f64,
        });
    }
    let n = all_returns.len();
    let (solved_rate, mean_return, return_std_error) = if n == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let mean = all_returns.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = all_returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1) as f64;
            math::sqrt(var / n as f64)
        } else {
            0.0
        };
        (solved_total as f64 / n as f64, mean, se)
    };
    Ok(EvalResult {
        levels: per_level,
        solved_rate,
        mean_return,
        return_std_error,
    })
}
