//! Level-parameterized environment interface shared by every strategy.
//!
//! A level is a fixed point `LevelParams` of an environment family's free
//! parameters; resetting an environment with it yields a fully specified
//! partially observable episode.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Free parameters of one level plus its construction seed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelParams {
    pub family_id: String,
    /// Design actions, in the family's action space.
    pub encoding: Vec<u32>,
    pub seed: u64,
}

/// Real-valued observation features of fixed dimension per family.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Observation {
    pub features: Vec<f64>,
}

impl Observation {
    pub fn new(features: Vec<f64>) -> Self {
        Self { features }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub obs: Observation,
    pub action: usize,
    pub reward: f64,
    /// Critic output at `obs` when the step was taken.
    pub value_estimate: f64,
    pub terminal: bool,
}

/// One episode. `bootstrap_value` is the critic value of the observation
/// after the final step, or 0 when the episode ended in a terminal state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub bootstrap_value: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.reward)
    }

    pub fn observations(&self) -> impl Iterator<Item = &Observation> + '_ {
        self.steps.iter().map(|s| &s.obs)
    }
}

/// Monte-Carlo discounted return `sum_t gamma^t r_t`, without any bootstrap.
pub fn discounted_return(traj: &Trajectory, gamma: f64) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::precondition("discounted_return of an empty trajectory"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::config("gamma must lie in (0, 1]"));
    }
    let mut discount = 1.0;
    let mut total = 0.0;
    for r in traj.rewards() {
        total += discount * r;
        discount *= gamma;
    }
    Ok(total)
}

/// Result of one environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub obs: Observation,
    pub reward: f64,
    pub terminal: bool,
    /// Horizon reached without a terminal state.
    pub truncated: bool,
}

impl StepOutcome {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

/// A level-parameterized partially observable environment with discrete
/// actions. Implementations are deterministic given the level and the action
/// sequence.
pub trait Environment {
    fn family_id(&self) -> &str;
    fn obs_dim(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn horizon(&self) -> usize;
    fn reset(&mut self, level: &LevelParams) -> Result<Observation>;
    fn step(&mut self, action: usize) -> Result<StepOutcome>;
}
