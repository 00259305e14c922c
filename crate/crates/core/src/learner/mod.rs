//! Softmax-linear actor-critic student, generalized advantage estimation,
//! the Alice/Bob self-play pair and both regret estimators.

mod gae;
mod policy;
mod regret;
mod rollout;
mod train;

pub use gae::{gae_advantages, gae_magnitude, gae_score, GaeConfig};
pub use policy::{act, PolicyParams};
pub use regret::{paired_regret, self_play_regret, AgentPair, RegretEstimator};
pub use rollout::{run_episode, run_episode_from, ActionMode};
pub use train::{train_step, LearnerConfig, UpdateRule};
