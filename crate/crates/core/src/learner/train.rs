use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{gae_advantages, GaeConfig, PolicyParams, RegretEstimator};
use crate::env::Trajectory;
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum UpdateRule {
    /// One advantage actor-critic gradient step per batch.
    #[default]
    ActorCritic,
    /// `ratio_epochs` full-batch steps on the clipped probability-ratio
    /// surrogate.
    ClippedRatio,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LearnerConfig {
    pub gamma: f64,
    pub lambda: f64,
    pub learning_rate: f64,
    pub critic_learning_rate: f64,
    pub entropy_weight: f64,
    pub update: UpdateRule,
    pub clip_epsilon: f64,
    pub ratio_epochs: usize,
    pub regret_estimator: RegretEstimator,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lambda: 0.95,
            learning_rate: 0.5,
            critic_learning_rate: 0.01,
            entropy_weight: 0.01,
            update: UpdateRule::ActorCritic,
            clip_epsilon: 0.2,
            ratio_epochs: 4,
            regret_estimator: RegretEstimator::ReturnDifference,
        }
    }
}

impl LearnerConfig {
    pub fn gae(&self) -> GaeConfig {
        GaeConfig {
            gamma: self.gamma,
            lambda: self.lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gae().validate()?;
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("critic_learning_rate", self.critic_learning_rate),
            ("entropy_weight", self.entropy_weight),
            ("clip_epsilon", self.clip_epsilon),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("{name} must be finite and non-negative")));
            }
        }
        if self.update == UpdateRule::ClippedRatio && self.ratio_epochs == 0 {
            return Err(Error::config("ratio_epochs must be positive"));
        }
        Ok(())
    }
}

struct Sample {
    traj: usize,
    step: usize,
    advantage: f64,
    target: f64,
    old_log_prob: f64,
}

/// One policy update on a batch of on-policy trajectories collected with
/// `params`.
///
/// The actor ascends `mean_t A_t grad log pi(a_t|o_t)` plus the entropy bonus,
/// with `A_t` the signed λ-advantage computed from the stored value
/// estimates. The critic takes a gradient step on the squared error to the
/// λ-return `A_t + V(o_t)`. The version is incremented once per call.
pub fn train_step(params: &PolicyParams, trajs: &[Trajectory], cfg: &LearnerConfig) -> Result<PolicyParams> {
    if trajs.iter().all(|t| t.is_empty()) {
        return Err(Error::precondition("train_step needs a non-empty batch"));
    }
    let gae = cfg.gae();
    let mut samples = Vec::new();
    for (ti, traj) in trajs.iter().enumerate() {
        if traj.is_empty() {
            continue;
        }
        let adv = gae_advantages(traj, &gae)?;
        for (si, (step, a)) in traj.steps.iter().zip(adv).enumerate() {
            params.check_obs(&step.obs)?;
            samples.push(Sample {
                traj: ti,
                step: si,
                advantage: a,
                target: a + step.value_estimate,
                old_log_prob: params.log_prob(&step.obs, step.action),
            });
        }
    }
    let n = samples.len() as f64;
    let epochs = match cfg.update {
        UpdateRule::ActorCritic => 1,
        UpdateRule::ClippedRatio => cfg.ratio_epochs,
    };

    let mut next = params.clone();
    let mut actor_grad = vec![0.0; params.actor_weights.len()];
    let mut critic_grad = vec![0.0; params.dim];
    for epoch in 0..epochs {
        actor_grad.iter_mut().for_each(|g| *g = 0.0);
        critic_grad.iter_mut().for_each(|g| *g = 0.0);
        for s in &samples {
            let step = &trajs[s.traj].steps[s.step];
            let weight = match cfg.update {
                UpdateRule::ActorCritic => s.advantage,
                UpdateRule::ClippedRatio => {
                    let ratio = math::exp(next.log_prob(&step.obs, step.action) - s.old_log_prob);
                    let clipped = (s.advantage > 0.0 && ratio > 1.0 + cfg.clip_epsilon)
                        || (s.advantage < 0.0 && ratio < 1.0 - cfg.clip_epsilon);
                    if clipped {
                        0.0
                    } else {
                        s.advantage * ratio
                    }
                }
            };
            if weight != 0.0 {
                next.accumulate_grad_log_prob(&step.obs, step.action, None, weight / n, &mut actor_grad);
            }
            if cfg.entropy_weight > 0.0 {
                next.accumulate_grad_entropy(&step.obs, cfg.entropy_weight / n, &mut actor_grad);
            }
            let err = (s.target - next.value(&step.obs)) / n;
            for (g, x) in critic_grad.iter_mut().zip(&step.obs.features) {
                *g += err * x;
            }
        }
        if let Some(i) = actor_grad.iter().chain(&critic_grad).position(|g| !g.is_finite()) {
            return Err(Error::Numerical {
                context: format!("train_step (policy version {}, epoch {epoch})", params.version),
                detail: format!("non-finite gradient component {i} over {} samples", samples.len()),
            });
        }
        for (w, g) in next.actor_weights.iter_mut().zip(&actor_grad) {
            *w += cfg.learning_rate * g;
        }
        for (w, g) in next.critic_weights.iter_mut().zip(&critic_grad) {
            *w += cfg.critic_learning_rate * g;
        }
    }
    next.version += 1;
    Ok(next)
}
