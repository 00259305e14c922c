//! Curriculum strategies: the self-play diversity loop, the trainable level
//! generator, and the domain randomization, prioritized replay, minimax and
//! PAIRED baselines.

mod config;
mod driver;
mod eval;
mod generator;

pub use config::{RunConfig, StrategyConfig, StrategyKind};
pub use driver::{
    minimax_reward, run_divsp, run_dr, run_minimax, run_paired, run_plr, run_self_play, run_strategy, Branch,
    LevelSource, MetricsRow, RunReport, SelfPlayOptions, TraceEvent,
};
pub use eval::{evaluate, EvalMode, EvalResult, LevelEval};
pub use generator::{random_design, DesignStep, DesignTrajectory, GeneratorPolicy, BASELINE_DECAY};
