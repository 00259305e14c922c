//! The experiment configuration file (TOML).
//!
//! Every key has a default, and the run manifest echoes the fully resolved
//! document so nothing that shaped a run stays implicit. Unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ued_core::curriculum::ReplayConfig;
use ued_core::diversity::DiversityConfig;
use ued_core::learner::{LearnerConfig, RegretEstimator, UpdateRule};
use ued_core::maze::MazeConfig;
use ued_core::strategies::{RunConfig, StrategyConfig, StrategyKind};

use crate::error::{read_to_string, LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    pub width: usize,
    pub height: usize,
    pub max_blocks: usize,
    pub horizon: usize,
    pub view_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerSection {
    pub gamma: f64,
    pub lambda: f64,
    pub learning_rate: f64,
    pub critic_learning_rate: f64,
    pub entropy_weight: f64,
    /// `actor_critic` or `clipped_ratio`.
    pub update: String,
    pub clip_epsilon: f64,
    pub ratio_epochs: usize,
    /// `return_difference` or `gae_magnitude`.
    pub regret_estimator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurriculumSection {
    pub capacity: usize,
    pub p: f64,
    pub rho: f64,
    pub beta: f64,
    pub n: usize,
    pub m_prime: usize,
    pub zero_norm_epsilon: f64,
    pub episodes_per_eval: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySection {
    /// One of `divsp`, `dr`, `plr`, `minimax`, `paired`.
    pub kind: String,
    pub total_env_steps: u64,
    pub generator_learning_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Directory of `.maze` files for periodic evaluation. Relative paths are
    /// resolved against the config file's directory.
    pub eval_suite_path: String,
    /// Where `train` writes its artifacts, resolved like `eval_suite_path`.
    pub output_dir: String,
    /// Evaluate every this many iterations; 0 disables.
    pub eval_interval: u64,
    pub eval_episodes: usize,
    pub env: EnvSection,
    pub learner: LearnerSection,
    pub curriculum: CurriculumSection,
    pub strategy: StrategySection,
}

impl Default for EnvSection {
    fn default() -> Self {
        let m = MazeConfig::default();
        Self {
            width: m.width,
            height: m.height,
            max_blocks: m.max_blocks,
            horizon: m.horizon,
            view_size: m.view_size,
        }
    }
}

impl Default for LearnerSection {
    fn default() -> Self {
        let l = LearnerConfig::default();
        Self {
            gamma: l.gamma,
            lambda: l.lambda,
            learning_rate: l.learning_rate,
            critic_learning_rate: l.critic_learning_rate,
            entropy_weight: l.entropy_weight,
            update: update_tag(l.update).into(),
            clip_epsilon: l.clip_epsilon,
            ratio_epochs: l.ratio_epochs,
            regret_estimator: estimator_tag(l.regret_estimator).into(),
        }
    }
}

impl Default for CurriculumSection {
    fn default() -> Self {
        let r = ReplayConfig::default();
        let d = DiversityConfig::default();
        Self {
            capacity: r.capacity,
            p: r.p,
            rho: r.rho,
            beta: r.beta,
            n: d.n,
            m_prime: d.m_prime,
            zero_norm_epsilon: d.zero_norm_epsilon,
            episodes_per_eval: StrategyConfig::default().episodes_per_eval,
        }
    }
}

impl Default for StrategySection {
    fn default() -> Self {
        let s = StrategyConfig::default();
        Self {
            kind: s.kind.tag().into(),
            total_env_steps: s.total_env_steps,
            generator_learning_rate: s.generator_learning_rate,
            max_iterations: s.max_iterations,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            eval_suite_path: String::new(),
            output_dir: "runs".into(),
            eval_interval: 0,
            eval_episodes: 1,
            env: EnvSection::default(),
            learner: LearnerSection::default(),
            curriculum: CurriculumSection::default(),
            strategy: StrategySection::default(),
        }
    }
}

fn update_tag(u: UpdateRule) -> &'static str {
    match u {
        UpdateRule::ActorCritic => "actor_critic",
        UpdateRule::ClippedRatio => "clipped_ratio",
    }
}

fn estimator_tag(r: RegretEstimator) -> &'static str {
    match r {
        RegretEstimator::ReturnDifference => "return_difference",
        RegretEstimator::GaeMagnitude => "gae_magnitude",
    }
}

fn field_error(field: &str, message: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("{field}: {message}"))
}

fn require(ok: bool, field: &str, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(field_error(field, message))
    }
}

fn unit_interval(v: f64, field: &str) -> Result<()> {
    require((0.0..=1.0).contains(&v), field, &format!("must lie in [0, 1], got {v}"))
}

fn non_negative(v: f64, field: &str) -> Result<()> {
    require(
        v.is_finite() && v >= 0.0,
        field,
        &format!("must be finite and non-negative, got {v}"),
    )
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Config(format!("{}: {}", path.display(), e.to_string().trim_end())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_to_string(path)?, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn strategy_kind(&self) -> Result<StrategyKind> {
        StrategyKind::from_tag(&self.strategy.kind).ok_or_else(|| {
            let known: Vec<&str> = StrategyKind::ALL.iter().map(|k| k.tag()).collect();
            field_error(
                "strategy.kind",
                format!(
                    "unknown strategy `{}` (expected one of {})",
                    self.strategy.kind,
                    known.join(", ")
                ),
            )
        })
    }

    /// Checks every field and builds the run configuration. Error messages
    /// start with the dotted path of the offending key.
    pub fn run_config(&self) -> Result<RunConfig> {
        let kind = self.strategy_kind()?;
        let update = match self.learner.update.as_str() {
            "actor_critic" => UpdateRule::ActorCritic,
            "clipped_ratio" => UpdateRule::ClippedRatio,
            other => {
                return Err(field_error(
                    "learner.update",
                    format!("unknown update `{other}` (expected actor_critic or clipped_ratio)"),
                ))
            }
        };
        let regret_estimator = match self.learner.regret_estimator.as_str() {
            "return_difference" => RegretEstimator::ReturnDifference,
            "gae_magnitude" => RegretEstimator::GaeMagnitude,
            other => {
                return Err(field_error(
                    "learner.regret_estimator",
                    format!("unknown estimator `{other}` (expected return_difference or gae_magnitude)"),
                ))
            }
        };

        let e = &self.env;
        require(e.width >= 1, "env.width", "must be positive")?;
        require(e.height >= 1, "env.height", "must be positive")?;
        require(e.width * e.height >= 2, "env.width", "grid needs at least two cells")?;
        require(e.horizon >= 1, "env.horizon", "must be positive")?;
        require(e.view_size % 2 == 1, "env.view_size", "must be odd")?;

        let l = &self.learner;
        require(l.gamma > 0.0 && l.gamma <= 1.0, "learner.gamma", "must lie in (0, 1]")?;
        unit_interval(l.lambda, "learner.lambda")?;
        non_negative(l.learning_rate, "learner.learning_rate")?;
        non_negative(l.critic_learning_rate, "learner.critic_learning_rate")?;
        non_negative(l.entropy_weight, "learner.entropy_weight")?;
        non_negative(l.clip_epsilon, "learner.clip_epsilon")?;
        require(
            update != UpdateRule::ClippedRatio || l.ratio_epochs > 0,
            "learner.ratio_epochs",
            "must be positive for the clipped_ratio update",
        )?;

        let c = &self.curriculum;
        require(c.capacity > 0, "curriculum.capacity", "must be positive")?;
        unit_interval(c.p, "curriculum.p")?;
        unit_interval(c.rho, "curriculum.rho")?;
        require(
            c.beta > 0.0 && c.beta.is_finite(),
            "curriculum.beta",
            "must be positive",
        )?;
        require(c.n > 0, "curriculum.n", "must be positive")?;
        require(c.m_prime > c.n, "curriculum.m_prime", "must exceed curriculum.n")?;
        require(
            c.zero_norm_epsilon > 0.0 && c.zero_norm_epsilon.is_finite(),
            "curriculum.zero_norm_epsilon",
            "must be positive",
        )?;
        require(
            c.episodes_per_eval > 0,
            "curriculum.episodes_per_eval",
            "must be positive",
        )?;

        non_negative(
            self.strategy.generator_learning_rate,
            "strategy.generator_learning_rate",
        )?;
        require(
            self.eval_interval == 0 || self.eval_episodes > 0,
            "eval_episodes",
            "must be positive when eval_interval is set",
        )?;
        require(
            self.eval_interval == 0 || !self.eval_suite_path.is_empty(),
            "eval_suite_path",
            "is required when eval_interval is set",
        )?;

        let cfg = RunConfig {
            maze: MazeConfig {
                width: e.width,
                height: e.height,
                max_blocks: e.max_blocks,
                horizon: e.horizon,
                view_size: e.view_size,
            },
            learner: LearnerConfig {
                gamma: l.gamma,
                lambda: l.lambda,
                learning_rate: l.learning_rate,
                critic_learning_rate: l.critic_learning_rate,
                entropy_weight: l.entropy_weight,
                update,
                clip_epsilon: l.clip_epsilon,
                ratio_epochs: l.ratio_epochs,
                regret_estimator,
            },
            diversity: DiversityConfig {
                n: c.n,
                m_prime: c.m_prime,
                zero_norm_epsilon: c.zero_norm_epsilon,
            },
            replay: ReplayConfig {
                capacity: c.capacity,
                p: c.p,
                rho: c.rho,
                beta: c.beta,
            },
            strategy: StrategyConfig {
                kind,
                episodes_per_eval: c.episodes_per_eval,
                generator_learning_rate: self.strategy.generator_learning_rate,
                total_env_steps: self.strategy.total_env_steps,
                max_iterations: self.strategy.max_iterations,
            },
            seed: self.seed,
            eval_interval: self.eval_interval,
            eval_episodes: self.eval_episodes,
        };
        cfg.validate().map_err(|e| LabError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

/// Resolves `p` against `base` unless it is absolute.
pub fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
