use alloc::vec;
use alloc::vec::Vec;

use crate::env::Trajectory;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaeConfig {
    pub gamma: f64,
    pub lambda: f64,
}

impl Default for GaeConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lambda: 0.95,
        }
    }
}

impl GaeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("gamma must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::config("lambda must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Signed λ-advantages `A_t = sum_k (γλ)^(k-t) δ_k` computed backwards, with
/// `δ_t = r_t + γ V(o_{t+1}) - V(o_t)` and the trajectory's bootstrap value
/// standing in for `V` after the last step.
pub fn gae_advantages(traj: &Trajectory, cfg: &GaeConfig) -> Result<Vec<f64>> {
    if traj.is_empty() {
        return Err(Error::precondition("advantages of an empty trajectory"));
    }
    let n = traj.len();
    let mut adv = vec![0.0; n];
    let mut next_value = traj.bootstrap_value;
    let mut running = 0.0;
    for t in (0..n).rev() {
        let step = &traj.steps[t];
        let next = if step.terminal { 0.0 } else { next_value };
        let delta = step.reward + cfg.gamma * next - step.value_estimate;
        running = delta + cfg.gamma * cfg.lambda * running;
        adv[t] = running;
        next_value = step.value_estimate;
    }
    Ok(adv)
}

/// Positive value loss: mean over steps of the positively clipped λ-advantage.
pub fn gae_score(traj: &Trajectory, cfg: &GaeConfig) -> Result<f64> {
    let adv = gae_advantages(traj, cfg)?;
    Ok(adv.iter().map(|a| a.max(0.0)).sum::<f64>() / adv.len() as f64)
}

/// Mean absolute λ-advantage, used by the alternative regret estimator.
pub fn gae_magnitude(traj: &Trajectory, cfg: &GaeConfig) -> Result<f64> {
    let adv = gae_advantages(traj, cfg)?;
    Ok(adv.iter().map(|a| a.abs()).sum::<f64>() / adv.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Observation, TrajectoryStep};

    /// Zero critic and zero bootstrap make every TD error equal its reward.
    fn with_deltas(deltas: &[f64]) -> Trajectory {
        Trajectory {
            steps: deltas
                .iter()
                .map(|&d| TrajectoryStep {
                    obs: Observation::new(vec![1.0]),
                    action: 0,
                    reward: d,
                    value_estimate: 0.0,
                    terminal: false,
                })
                .collect(),
            bootstrap_value: 0.0,
        }
    }

    #[test]
    fn non_positive_deltas_score_zero() {
        let cfg = GaeConfig {
            gamma: 0.9,
            lambda: 0.95,
        };
        assert_eq!(gae_score(&with_deltas(&[-0.1, 0.0, -2.0]), &cfg).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_fixture() {
        // γλ = 0.855: A = (-0.2088, -0.829, 0.2)
        let cfg = GaeConfig {
            gamma: 0.9,
            lambda: 0.95,
        };
        let score = gae_score(&with_deltas(&[0.5, -1.0, 0.2]), &cfg).unwrap();
        assert!((score - 0.0667).abs() < 1e-4);
        let adv = gae_advantages(&with_deltas(&[0.5, -1.0, 0.2]), &cfg).unwrap();
        assert!((adv[1] + 0.829).abs() < 1e-12);
        assert!((adv[0] + 0.208795).abs() < 1e-12);
    }

    #[test]
    fn zero_lambda_is_one_step_td() {
        let cfg = GaeConfig {
            gamma: 0.7,
            lambda: 0.0,
        };
        let deltas = [0.4, -0.3, 0.9, 0.0];
        let expect = deltas.iter().map(|d: &f64| d.max(0.0)).sum::<f64>() / 4.0;
        assert!((gae_score(&with_deltas(&deltas), &cfg).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn bootstrap_enters_last_delta() {
        let cfg = GaeConfig {
            gamma: 0.5,
            lambda: 1.0,
        };
        let mut traj = with_deltas(&[0.0]);
        traj.bootstrap_value = 2.0;
        assert_eq!(gae_advantages(&traj, &cfg).unwrap(), vec![1.0]);
        traj.steps[0].terminal = true;
        assert_eq!(gae_advantages(&traj, &cfg).unwrap(), vec![0.0]);
    }

    #[test]
    fn empty_trajectory_is_rejected() {
        assert!(gae_score(&Trajectory::default(), &GaeConfig::default()).is_err());
    }
}
