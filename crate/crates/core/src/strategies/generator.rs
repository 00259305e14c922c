//! Level generators: the trainable design policy and uniform random
//! construction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::env::{LevelParams, Observation};
use crate::error::{Error, Result};
use crate::learner::PolicyParams;
use crate::maze::{encode_design, DesignAction, MazeConfig};

/// Decay of the running regret baseline.
pub const BASELINE_DECAY: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct DesignStep {
    pub obs: Observation,
    pub action: usize,
    pub allowed: Vec<bool>,
}

/// The generator's own episode: one step per design decision.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DesignTrajectory {
    pub steps: Vec<DesignStep>,
}

/// Softmax-linear design policy over `width * height` cells plus a stop
/// action. Its observation is a one-hot of the design step followed by the
/// occupancy grid of everything placed so far.
///
/// Step 0 places the start and step 1 the goal (the start cell is masked);
/// stop becomes available from step 2, where each action places one block.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneratorPolicy {
    pub params: PolicyParams,
    pub maze: MazeConfig,
    /// Running mean of the rewards seen so far.
    pub baseline: f64,
}

impl GeneratorPolicy {
    pub fn new(maze: MazeConfig) -> Self {
        let params = PolicyParams::zeros(maze.num_cells() + 1, maze.design_steps() + maze.num_cells());
        Self {
            params,
            maze,
            baseline: 0.0,
        }
    }

    pub fn stop_action(&self) -> usize {
        self.maze.num_cells()
    }

    fn observe(&self, step: usize, occupied: &[bool]) -> Observation {
        let steps = self.maze.design_steps();
        let mut f = vec![0.0; steps + occupied.len()];
        f[step] = 1.0;
        for (slot, &o) in f[steps..].iter_mut().zip(occupied) {
            if o {
                *slot = 1.0;
            }
        }
        Observation::new(f)
    }

    fn mask(&self, step: usize, start: Option<usize>) -> Vec<bool> {
        let mut allowed = vec![true; self.params.num_actions];
        if step < 2 {
            allowed[self.stop_action()] = false;
        }
        if step == 1 {
            if let Some(s) = start {
                allowed[s] = false;
            }
        }
        allowed
    }

    /// Rolls out the design policy. The level seed is drawn from `rng`.
    pub fn generate_level<R: Rng + ?Sized>(&self, rng: &mut R) -> (LevelParams, DesignTrajectory) {
        let mut occupied = vec![false; self.maze.num_cells()];
        let mut actions = Vec::with_capacity(self.maze.design_steps());
        let mut traj = DesignTrajectory::default();
        let mut start = None;
        for step in 0..self.maze.design_steps() {
            let obs = self.observe(step, &occupied);
            let allowed = self.mask(step, start);
            let (action, _) = self.params.sample_action_masked(&obs, Some(&allowed), rng);
            traj.steps.push(DesignStep { obs, action, allowed });
            if action == self.stop_action() {
                break;
            }
            occupied[action] = true;
            actions.push(match step {
                0 => {
                    start = Some(action);
                    DesignAction::start(action)
                }
                1 => DesignAction::goal(action),
                _ => DesignAction::block(action),
            });
        }
        let seed = rng.gen::<u64>();
        (encode_design(&actions, seed), traj)
    }

    /// `sum_t log pi(a_t | s_t)` of a design trajectory.
    pub fn log_likelihood(&self, traj: &DesignTrajectory) -> f64 {
        traj.steps
            .iter()
            .map(|s| self.params.log_prob_masked(&s.obs, s.action, Some(&s.allowed)))
            .sum()
    }

    /// Gradient of [`Self::log_likelihood`] with respect to the weights.
    pub fn grad_log_likelihood(&self, traj: &DesignTrajectory) -> Vec<f64> {
        let mut grad = vec![0.0; self.params.actor_weights.len()];
        for s in &traj.steps {
            self.params
                .accumulate_grad_log_prob(&s.obs, s.action, Some(&s.allowed), 1.0, &mut grad);
        }
        grad
    }

    /// One REINFORCE step where every design action earns `reward` (the
    /// episode's only, terminal reward) less the running baseline, which is
    /// then moved towards `reward`.
    pub fn train(&self, traj: &DesignTrajectory, reward: f64, learning_rate: f64) -> Result<Self> {
        if !reward.is_finite() {
            return Err(Error::Numerical {
                context: "train_generator".into(),
                detail: format!("non-finite reward {reward}"),
            });
        }
        let mut next = self.clone();
        let advantage = reward - self.baseline;
        if advantage != 0.0 {
            let grad = self.grad_log_likelihood(traj);
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Numerical {
                    context: "train_generator".into(),
                    detail: "non-finite policy gradient".into(),
                });
            }
            for (w, g) in next.params.actor_weights.iter_mut().zip(&grad) {
                *w += learning_rate * advantage * g;
            }
        }
        next.baseline = BASELINE_DECAY * self.baseline + (1.0 - BASELINE_DECAY) * reward;
        next.params.version += 1;
        Ok(next)
    }
}

/// Uniform random construction: start and goal on distinct uniform cells,
/// a block count uniform in `[0, max_blocks]`, each block on a uniform cell.
pub fn random_design<R: Rng + ?Sized>(maze: &MazeConfig, rng: &mut R) -> LevelParams {
    let n = maze.num_cells();
    let start = rng.gen_range(0..n);
    let mut goal = rng.gen_range(0..n - 1);
    if goal >= start {
        goal += 1;
    }
    let blocks = rng.gen_range(0..=maze.max_blocks);
    let mut actions = vec![DesignAction::start(start), DesignAction::goal(goal)];
    actions.extend((0..blocks).map(|_| DesignAction::block(rng.gen_range(0..n))));
    let seed = rng.gen::<u64>();
    encode_design(&actions, seed)
}
