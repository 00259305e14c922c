use crate::error::{Error, Result};

use super::PolicyParams;

fn mean(xs: &[f64], what: &str) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::precondition(alloc::format!("no {what} returns")));
    }
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Self-play regret: mean Alice return minus mean Bob return on one level.
/// Signed.
pub fn self_play_regret(alice_returns: &[f64], bob_returns: &[f64]) -> Result<f64> {
    Ok(mean(alice_returns, "alice")? - mean(bob_returns, "bob")?)
}

/// PAIRED regret: mean antagonist return minus mean protagonist return.
pub fn paired_regret(protagonist_returns: &[f64], antagonist_returns: &[f64]) -> Result<f64> {
    Ok(mean(antagonist_returns, "antagonist")? - mean(protagonist_returns, "protagonist")?)
}

/// How the self-play loop turns Alice's and Bob's episodes into regret.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RegretEstimator {
    /// Difference of mean discounted episode returns.
    #[default]
    ReturnDifference,
    /// Difference of mean absolute λ-advantages.
    GaeMagnitude,
}

/// One student with two minds: Alice learns, Bob is her lagged snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentPair {
    pub alice: PolicyParams,
    pub bob: PolicyParams,
}

impl AgentPair {
    pub fn new(initial: PolicyParams) -> Self {
        Self {
            bob: initial.clone(),
            alice: initial,
        }
    }

    /// Copies Alice's current parameters, version included, into Bob.
    pub fn sync_bob(&mut self) {
        self.bob.clone_from(&self.alice);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_play_regret_is_a_mean_difference() {
        assert!((self_play_regret(&[1.0, 0.6], &[0.2, 0.4]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(self_play_regret(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((self_play_regret(&[0.1], &[0.9]).unwrap() + 0.8).abs() < 1e-15);
    }

    #[test]
    fn paired_regret_is_antagonist_minus_protagonist() {
        assert!((paired_regret(&[0.3], &[0.9]).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(paired_regret(&[0.5, 0.1], &[0.3, 0.3]).unwrap(), 0.0);
        assert_eq!(paired_regret(&[0.5], &[0.0]).unwrap(), -0.5);
    }

    #[test]
    fn empty_returns_are_rejected() {
        assert!(self_play_regret(&[], &[1.0]).is_err());
        assert!(self_play_regret(&[1.0], &[]).is_err());
        assert!(paired_regret(&[], &[1.0]).is_err());
    }

    #[test]
    fn sync_copies_and_is_idempotent() {
        let mut pair = AgentPair::new(PolicyParams::zeros(2, 2));
        pair.alice.actor_weights[1] = 0.5;
        pair.alice.version = 4;
        pair.sync_bob();
        assert_eq!(pair.alice, pair.bob);
        let once = pair.clone();
        pair.sync_bob();
        assert_eq!(pair, once);
    }
}
