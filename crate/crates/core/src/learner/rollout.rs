use alloc::vec::Vec;

use rand::Rng;

use super::PolicyParams;
use crate::env::{Environment, LevelParams, Observation, Trajectory, TrajectoryStep};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    /// Draw from the softmax policy (training).
    Sample,
    /// Argmax action (evaluation).
    Greedy,
}

/// Resets `env` on `level` and plays one episode with `params`.
pub fn run_episode<E: Environment, R: Rng + ?Sized>(
    env: &mut E,
    level: &LevelParams,
    params: &PolicyParams,
    mode: ActionMode,
    rng: &mut R,
) -> Result<Trajectory> {
    let obs = env.reset(level)?;
    run_episode_from(env, obs, params, mode, rng)
}

/// Plays one episode from an environment that was just reset to `obs`.
pub fn run_episode_from<E: Environment, R: Rng + ?Sized>(
    env: &mut E,
    mut obs: Observation,
    params: &PolicyParams,
    mode: ActionMode,
    rng: &mut R,
) -> Result<Trajectory> {
    params.check_obs(&obs)?;
    let mut steps = Vec::new();
    loop {
        let action = match mode {
            ActionMode::Sample => params.sample_action_masked(&obs, None, rng).0,
            ActionMode::Greedy => params.greedy_action(&obs),
        };
        let value_estimate = params.value(&obs);
        let out = env.step(action)?;
        let done = out.done();
        steps.push(TrajectoryStep {
            obs: core::mem::replace(&mut obs, out.obs),
            action,
            reward: out.reward,
            value_estimate,
            terminal: out.terminal,
        });
        if done {
            let bootstrap_value = if out.terminal { 0.0 } else { params.value(&obs) };
            return Ok(Trajectory { steps, bootstrap_value });
        }
    }
}
