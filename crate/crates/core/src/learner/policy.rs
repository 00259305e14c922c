use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::env::Observation;
use crate::error::{Error, Result};
use crate::math;

/// Linear actor (`num_actions x dim`, row-major) and linear critic (`dim`).
///
/// `version` counts gradient updates and is copied by snapshots, so two
/// parameter sets with equal versions and a common origin are identical.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolicyParams {
    pub num_actions: usize,
    pub dim: usize,
    pub actor_weights: Vec<f64>,
    pub critic_weights: Vec<f64>,
    pub version: u64,
}

impl PolicyParams {
    pub fn zeros(num_actions: usize, dim: usize) -> Self {
        Self {
            num_actions,
            dim,
            actor_weights: vec![0.0; num_actions * dim],
            critic_weights: vec![0.0; dim],
            version: 0,
        }
    }

    pub fn from_parts(
        num_actions: usize,
        dim: usize,
        actor_weights: Vec<f64>,
        critic_weights: Vec<f64>,
        version: u64,
    ) -> Result<Self> {
        let params = Self {
            num_actions,
            dim,
            actor_weights,
            critic_weights,
            version,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_actions == 0 {
            return Err(Error::config("policy needs at least one action"));
        }
        if self.actor_weights.len() != self.num_actions * self.dim || self.critic_weights.len() != self.dim {
            return Err(Error::config(format!(
                "weight arrays do not match {} actions x {} features",
                self.num_actions, self.dim
            )));
        }
        if !self.is_finite() {
            return Err(Error::Numerical {
                context: "policy parameters".into(),
                detail: "non-finite weight".into(),
            });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.actor_weights
            .iter()
            .chain(&self.critic_weights)
            .all(|w| w.is_finite())
    }

    pub fn actor_row(&self, action: usize) -> &[f64] {
        &self.actor_weights[action * self.dim..(action + 1) * self.dim]
    }

    pub fn check_obs(&self, obs: &Observation) -> Result<()> {
        if obs.dim() != self.dim {
            return Err(Error::config(format!(
                "observation has {} features, policy expects {}",
                obs.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn logits(&self, obs: &Observation) -> Vec<f64> {
        (0..self.num_actions)
            .map(|a| math::dot(self.actor_row(a), &obs.features))
            .collect()
    }

    /// Softmax over the allowed actions; disallowed actions get probability 0.
    pub fn action_probs_masked(&self, obs: &Observation, allowed: Option<&[bool]>) -> Vec<f64> {
        math::softmax_masked(&self.logits(obs), allowed)
    }

    pub fn action_probs(&self, obs: &Observation) -> Vec<f64> {
        self.action_probs_masked(obs, None)
    }

    pub fn value(&self, obs: &Observation) -> f64 {
        math::dot(&self.critic_weights, &obs.features)
    }

    pub fn log_prob_masked(&self, obs: &Observation, action: usize, allowed: Option<&[bool]>) -> f64 {
        let logits = self.logits(obs);
        logits[action] - math::log_sum_exp(&logits, allowed)
    }

    pub fn log_prob(&self, obs: &Observation, action: usize) -> f64 {
        self.log_prob_masked(obs, action, None)
    }

    /// Gradient of `log pi(action | obs)` with respect to the actor weights,
    /// laid out like `actor_weights`: `(1[j = a] - pi_j) x` in row `j`.
    pub fn grad_log_prob_masked(&self, obs: &Observation, action: usize, allowed: Option<&[bool]>) -> Vec<f64> {
        let mut grad = vec![0.0; self.actor_weights.len()];
        self.accumulate_grad_log_prob(obs, action, allowed, 1.0, &mut grad);
        grad
    }

    pub fn grad_log_prob(&self, obs: &Observation, action: usize) -> Vec<f64> {
        self.grad_log_prob_masked(obs, action, None)
    }

    /// Adds `scale * grad log pi(action | obs)` into `out`.
    pub(crate) fn accumulate_grad_log_prob(
        &self,
        obs: &Observation,
        action: usize,
        allowed: Option<&[bool]>,
        scale: f64,
        out: &mut [f64],
    ) {
        let probs = self.action_probs_masked(obs, allowed);
        for (j, p) in probs.iter().enumerate() {
            let coeff = scale * (if j == action { 1.0 } else { 0.0 } - p);
            if coeff == 0.0 {
                continue;
            }
            let row = &mut out[j * self.dim..(j + 1) * self.dim];
            for (g, x) in row.iter_mut().zip(&obs.features) {
                *g += coeff * x;
            }
        }
    }

    /// Adds `scale * grad H(pi(. | obs))` into `out`, using
    /// `dH/dz_j = -pi_j (log pi_j + H)`.
    pub(crate) fn accumulate_grad_entropy(&self, obs: &Observation, scale: f64, out: &mut [f64]) {
        let probs = self.action_probs(obs);
        let entropy: f64 = probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * math::ln(p)).sum();
        for (j, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let coeff = -scale * p * (math::ln(p) + entropy);
            let row = &mut out[j * self.dim..(j + 1) * self.dim];
            for (g, x) in row.iter_mut().zip(&obs.features) {
                *g += coeff * x;
            }
        }
    }

    /// Highest-probability allowed action, lowest index on ties.
    pub fn greedy_action_masked(&self, obs: &Observation, allowed: Option<&[bool]>) -> usize {
        let logits = self.logits(obs);
        let mut best = None;
        for (i, &z) in logits.iter().enumerate() {
            if allowed.is_none_or(|m| m[i]) && best.is_none_or(|(_, b)| z > b) {
                best = Some((i, z));
            }
        }
        best.map(|(i, _)| i).unwrap_or(0)
    }

    pub fn greedy_action(&self, obs: &Observation) -> usize {
        self.greedy_action_masked(obs, None)
    }

    pub fn sample_action_masked<R: Rng + ?Sized>(
        &self,
        obs: &Observation,
        allowed: Option<&[bool]>,
        rng: &mut R,
    ) -> (usize, f64) {
        let probs = self.action_probs_masked(obs, allowed);
        let action = math::sample_categorical(&probs, rng.gen::<f64>());
        (action, math::ln(probs[action]))
    }
}

/// Samples an action from `softmax(W x)` and returns it with its
/// log-probability.
pub fn act<R: Rng + ?Sized>(params: &PolicyParams, obs: &Observation, rng: &mut R) -> Result<(usize, f64)> {
    params.check_obs(obs)?;
    Ok(params.sample_action_masked(obs, None, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    #[test]
    fn zero_weights_are_uniform() {
        let params = PolicyParams::zeros(3, 4);
        let obs = Observation::new(vec![0.3, -1.0, 2.0, 0.5]);
        for p in params.action_probs(&obs) {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn saturated_logit_dominates() {
        let mut params = PolicyParams::zeros(3, 1);
        params.actor_weights[1] = 1000.0;
        let obs = Observation::new(vec![1.0]);
        let probs = params.action_probs(&obs);
        assert!((probs[1] - 1.0).abs() < 1e-9);
        let mut rng = seeded_rng(1);
        for _ in 0..50 {
            assert_eq!(act(&params, &obs, &mut rng).unwrap().0, 1);
        }
    }

    #[test]
    fn fixed_seed_reproduces_actions() {
        let params = PolicyParams::zeros(3, 2);
        let obs = Observation::new(vec![1.0, 0.0]);
        let draw = |seed| {
            let mut rng = seeded_rng(seed);
            (0..64)
                .map(|_| act(&params, &obs, &mut rng).unwrap().0)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let params = PolicyParams::zeros(3, 2);
        let obs = Observation::new(vec![1.0]);
        assert!(matches!(act(&params, &obs, &mut seeded_rng(0)), Err(Error::Config(_))));
    }

    #[test]
    fn masked_actions_are_never_sampled() {
        let params = PolicyParams::zeros(4, 1);
        let obs = Observation::new(vec![1.0]);
        let mask = [false, true, false, true];
        let probs = params.action_probs_masked(&obs, Some(&mask));
        assert_eq!(probs, vec![0.0, 0.5, 0.0, 0.5]);
        let mut rng = seeded_rng(3);
        for _ in 0..100 {
            let (a, lp) = params.sample_action_masked(&obs, Some(&mask), &mut rng);
            assert!(mask[a]);
            assert!((lp - 0.5f64.ln()).abs() < 1e-12);
        }
    }
}
