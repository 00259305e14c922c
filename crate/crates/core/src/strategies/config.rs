use alloc::string::String;

use crate::curriculum::ReplayConfig;
use crate::diversity::DiversityConfig;
use crate::error::{Error, Result};
use crate::learner::LearnerConfig;
use crate::maze::MazeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StrategyKind {
    /// Self-play regret with a diversity-curated buffer.
    Divsp,
    /// Domain randomization.
    Dr,
    /// Prioritized level replay.
    Plr,
    /// Generator trained against the student's return.
    Minimax,
    /// Generator trained on antagonist-minus-protagonist regret.
    Paired,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Divsp,
        StrategyKind::Dr,
        StrategyKind::Plr,
        StrategyKind::Minimax,
        StrategyKind::Paired,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            StrategyKind::Divsp => "divsp",
            StrategyKind::Dr => "dr",
            StrategyKind::Plr => "plr",
            StrategyKind::Minimax => "minimax",
            StrategyKind::Paired => "paired",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }
}

impl core::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Episodes each student plays per level visit.
    pub episodes_per_eval: usize,
    pub generator_learning_rate: f64,
    /// Budget of student environment steps.
    pub total_env_steps: u64,
    /// Optional cap on loop iterations, reached or not before the budget.
    pub max_iterations: Option<u64>,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            kind: StrategyKind::Divsp,
            episodes_per_eval: 2,
            generator_learning_rate: 0.01,
            total_env_steps: 300_000,
            max_iterations: None,
        }
    }
}

/// Everything that determines a run, seed included.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunConfig {
    pub maze: MazeConfig,
    pub learner: LearnerConfig,
    pub diversity: DiversityConfig,
    pub replay: ReplayConfig,
    pub strategy: StrategyConfig,
    pub seed: u64,
    /// Evaluate on the held-out suite every this many iterations; 0 disables.
    pub eval_interval: u64,
    pub eval_episodes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            maze: MazeConfig::default(),
            learner: LearnerConfig::default(),
            diversity: DiversityConfig::default(),
            replay: ReplayConfig::default(),
            strategy: StrategyConfig::default(),
            seed: 0,
            eval_interval: 0,
            eval_episodes: 1,
        }
    }
}

impl RunConfig {
    /// Validates every section, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        fn prefixed(section: &str, r: Result<()>) -> Result<()> {
            r.map_err(|e| match e {
                Error::Config(m) => Error::Config(alloc::format!("{section}: {m}")),
                other => other,
            })
        }
        prefixed("env", self.maze.validate())?;
        prefixed("learner", self.learner.validate())?;
        prefixed("curriculum", self.diversity.validate())?;
        prefixed("curriculum", self.replay.validate())?;
        if self.strategy.episodes_per_eval == 0 {
            return Err(Error::config("strategy.episodes_per_eval must be positive"));
        }
        if !(self.strategy.generator_learning_rate.is_finite() && self.strategy.generator_learning_rate >= 0.0) {
            return Err(Error::config(
                "strategy.generator_learning_rate must be finite and non-negative",
            ));
        }
        if self.eval_interval > 0 && self.eval_episodes == 0 {
            return Err(Error::config("eval_episodes must be positive when evaluating"));
        }
        Ok(())
    }

    pub fn strategy_tag(&self) -> String {
        self.strategy.kind.tag().into()
    }
}
