//! Strategy drivers. Each run is strictly sequential and draws every random
//! decision from the single generator handed to it.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::config::{RunConfig, StrategyKind};
use super::eval::{evaluate, EvalMode, EvalResult};
use super::generator::{random_design, DesignTrajectory, GeneratorPolicy};
use crate::curriculum::{BufferEntry, InsertOutcome, LevelBuffer, ReplacementRule, ReplayConfig};
use crate::diversity::select_representatives;
use crate::env::{discounted_return, Environment, LevelParams, Trajectory};
use crate::error::{Error, Result};
use crate::learner::{
    gae_magnitude, gae_score, paired_regret, run_episode, self_play_regret, train_step, ActionMode, AgentPair,
    PolicyParams, RegretEstimator,
};
use crate::maze::{MazeAction, MazeEnv, MazeLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Generate,
    Replay,
}

impl Branch {
    pub fn tag(self) -> &'static str {
        match self {
            Branch::Generate => "gen",
            Branch::Replay => "replay",
        }
    }
}

/// One metrics record per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub iteration: u64,
    /// Cumulative student environment steps after this iteration.
    pub env_steps: u64,
    pub strategy: StrategyKind,
    pub branch: Branch,
    pub level_id: u64,
    /// The generator's training signal, or the self-play regret measured on a
    /// replayed level. Empty when the strategy has none.
    pub regret: Option<f64>,
    pub f_gae: Option<f64>,
    pub buffer_size: usize,
    pub buffer_diversity: Option<f64>,
    pub eval_solved_rate: Option<f64>,
    pub eval_mean_return: Option<f64>,
    pub seed: u64,
}

/// Instrumentation of the self-play loop, one event per executed step.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    ReplayDecision {
        iteration: u64,
        epsilon: f64,
        generate: bool,
    },
    GenerateLevel {
        level_id: u64,
    },
    SampleLevel {
        level_id: u64,
    },
    Collect {
        level_id: u64,
        alice_version: u64,
        bob_version: u64,
        alice_returns: Vec<f64>,
        bob_returns: Vec<f64>,
    },
    Regret {
        value: f64,
    },
    SyncBob {
        version: u64,
    },
    TrainAlice {
        version: u64,
    },
    TrainGenerator {
        reward: f64,
    },
    SelectRepresentatives {
        level_id: u64,
    },
    TryInsert {
        level_id: u64,
        outcome: InsertOutcome,
    },
    UpdateRepresentatives {
        level_id: u64,
    },
    UpdateReplayDistribution {
        entries: usize,
    },
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub strategy: StrategyKind,
    pub rows: Vec<MetricsRow>,
    /// The policy that is evaluated and exported: Alice, or the protagonist.
    pub student: PolicyParams,
    pub generator: Option<GeneratorPolicy>,
    pub buffer: Option<LevelBuffer>,
    pub trace: Vec<TraceEvent>,
    pub env_steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSource {
    /// Uniform random construction.
    Random,
    /// The trainable design policy.
    Learned,
}

/// Knobs of the self-play loop. The full method and domain randomization are
/// two settings of the same loop.
#[derive(Debug, Clone)]
pub struct SelfPlayOptions {
    pub tag: StrategyKind,
    /// Probability of generating rather than replaying.
    pub p: f64,
    pub source: LevelSource,
    pub train_generator: bool,
    pub use_buffer: bool,
    pub initial_buffer: Option<LevelBuffer>,
    pub record_trace: bool,
}

impl SelfPlayOptions {
    pub fn divsp(cfg: &RunConfig) -> Self {
        Self {
            tag: StrategyKind::Divsp,
            p: cfg.replay.p,
            source: LevelSource::Learned,
            train_generator: true,
            use_buffer: true,
            initial_buffer: None,
            record_trace: false,
        }
    }

    pub fn dr() -> Self {
        Self {
            tag: StrategyKind::Dr,
            p: 1.0,
            source: LevelSource::Random,
            train_generator: false,
            use_buffer: false,
            initial_buffer: None,
            record_trace: false,
        }
    }
}

struct Batch {
    trajs: Vec<Trajectory>,
    returns: Vec<f64>,
}

impl Batch {
    fn observations(&self) -> Vec<&[f64]> {
        self.trajs
            .iter()
            .flat_map(|t| t.observations().map(|o| o.features.as_slice()))
            .collect()
    }
}

struct Run<'a, R: ?Sized> {
    cfg: &'a RunConfig,
    suite: &'a [MazeLevel],
    rng: &'a mut R,
    env: MazeEnv,
    env_steps: u64,
    next_level_id: u64,
    rows: Vec<MetricsRow>,
    trace: Option<Vec<TraceEvent>>,
}

impl<'a, R: Rng + ?Sized> Run<'a, R> {
    fn new(cfg: &'a RunConfig, suite: &'a [MazeLevel], rng: &'a mut R, record_trace: bool) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            suite,
            rng,
            env: MazeEnv::new(cfg.maze)?,
            env_steps: 0,
            next_level_id: 0,
            rows: Vec::new(),
            trace: record_trace.then(Vec::new),
        })
    }

    fn budget_left(&self, iteration: u64) -> bool {
        self.env_steps < self.cfg.strategy.total_env_steps
            && self.cfg.strategy.max_iterations.is_none_or(|m| iteration < m)
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_level_id;
        self.next_level_id += 1;
        id
    }

    fn record(&mut self, event: impl FnOnce() -> TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(event());
        }
    }

    fn new_student(&self) -> PolicyParams {
        PolicyParams::zeros(MazeAction::COUNT, self.env.obs_dim())
    }

    fn collect(&mut self, level: &LevelParams, params: &PolicyParams) -> Result<Batch> {
        let episodes = self.cfg.strategy.episodes_per_eval;
        let mut trajs = Vec::with_capacity(episodes);
        let mut returns = Vec::with_capacity(episodes);
        for _ in 0..episodes {
            let traj = run_episode(&mut self.env, level, params, ActionMode::Sample, self.rng)?;
            self.env_steps += traj.len() as u64;
            returns.push(discounted_return(&traj, self.cfg.learner.gamma)?);
            trajs.push(traj);
        }
        Ok(Batch { trajs, returns })
    }

    fn f_gae(&self, batch: &Batch) -> Result<f64> {
        let gae = self.cfg.learner.gae();
        let mut total = 0.0;
        for t in &batch.trajs {
            total += gae_score(t, &gae)?;
        }
        Ok(total / batch.trajs.len() as f64)
    }

    fn self_play_regret(&self, alice: &Batch, bob: &Batch) -> Result<f64> {
        match self.cfg.learner.regret_estimator {
            RegretEstimator::ReturnDifference => self_play_regret(&alice.returns, &bob.returns),
            RegretEstimator::GaeMagnitude => {
                let gae = self.cfg.learner.gae();
                let mag = |b: &Batch| {
                    b.trajs
                        .iter()
                        .map(|t| gae_magnitude(t, &gae))
                        .collect::<Result<Vec<f64>>>()
                };
                self_play_regret(&mag(alice)?, &mag(bob)?)
            }
        }
    }

    fn maybe_eval(&self, iteration: u64, student: &PolicyParams) -> Result<Option<EvalResult>> {
        let every = self.cfg.eval_interval;
        if every == 0 || self.suite.is_empty() || !(iteration + 1).is_multiple_of(every) {
            return Ok(None);
        }
        evaluate(
            student,
            self.suite,
            &self.cfg.maze,
            self.cfg.eval_episodes,
            EvalMode::Greedy,
        )
        .map(Some)
    }

    #[allow(clippy::too_many_arguments)]
    fn push_row(
        &mut self,
        iteration: u64,
        branch: Branch,
        level_id: u64,
        regret: Option<f64>,
        f_gae: Option<f64>,
        buffer: Option<&LevelBuffer>,
        student: &PolicyParams,
    ) -> Result<()> {
        let eval = self.maybe_eval(iteration, student)?;
        self.rows.push(MetricsRow {
            iteration,
            env_steps: self.env_steps,
            strategy: self.cfg.strategy.kind,
            branch,
            level_id,
            regret,
            f_gae,
            buffer_size: buffer.map_or(0, LevelBuffer::len),
            buffer_diversity: buffer.and_then(LevelBuffer::buffer_diversity),
            eval_solved_rate: eval.as_ref().map(|e| e.solved_rate),
            eval_mean_return: eval.as_ref().map(|e| e.mean_return),
            seed: self.cfg.seed,
        });
        Ok(())
    }

    fn finish(
        self,
        student: PolicyParams,
        generator: Option<GeneratorPolicy>,
        buffer: Option<LevelBuffer>,
    ) -> RunReport {
        RunReport {
            strategy: self.cfg.strategy.kind,
            rows: self.rows,
            student,
            generator,
            buffer,
            trace: self.trace.unwrap_or_default(),
            env_steps: self.env_steps,
        }
    }
}

fn at_iteration<T>(iteration: u64, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.with_context(&format!("iteration {iteration}")))
}

/// Runs the configured strategy.
pub fn run_strategy<R: Rng + ?Sized>(cfg: &RunConfig, suite: &[MazeLevel], rng: &mut R) -> Result<RunReport> {
    match cfg.strategy.kind {
        StrategyKind::Divsp => run_divsp(cfg, suite, rng),
        StrategyKind::Dr => run_dr(cfg, suite, rng),
        StrategyKind::Plr => run_plr(cfg, suite, rng),
        StrategyKind::Minimax => run_minimax(cfg, suite, rng),
        StrategyKind::Paired => run_paired(cfg, suite, rng),
    }
}

pub fn run_divsp<R: Rng + ?Sized>(cfg: &RunConfig, suite: &[MazeLevel], rng: &mut R) -> Result<RunReport> {
    run_self_play(cfg, SelfPlayOptions::divsp(cfg), suite, rng)
}

pub fn run_dr<R: Rng + ?Sized>(cfg: &RunConfig, suite: &[MazeLevel], rng: &mut R) -> Result<RunReport> {
    run_self_play(cfg, SelfPlayOptions::dr(), suite, rng)
}

/// The self-play curriculum loop.
///
/// Each iteration draws `ε ~ U[0,1]`. With `ε <= p` (or an empty buffer) a
/// new level is generated, Alice and her snapshot Bob play it, regret is
/// measured, Bob is synced to Alice, Alice trains, the generator trains on
/// the regret, and the level's representatives compete for a buffer slot.
/// Otherwise a buffered level is replayed, the pair plays and syncs, Alice
/// trains, and the level's representatives and learning potential are
/// refreshed.
pub fn run_self_play<R: Rng + ?Sized>(
    cfg: &RunConfig,
    opts: SelfPlayOptions,
    suite: &[MazeLevel],
    rng: &mut R,
) -> Result<RunReport> {
    let mut run = Run::new(cfg, suite, rng, opts.record_trace)?;
    if opts.tag != cfg.strategy.kind {
        return Err(Error::config(format!(
            "strategy.kind is {} but the {} loop was requested",
            cfg.strategy.kind, opts.tag
        )));
    }
    let mut pair = AgentPair::new(run.new_student());
    let mut generator = GeneratorPolicy::new(cfg.maze);
    let mut buffer = match (opts.use_buffer, opts.initial_buffer) {
        (false, _) => None,
        (true, Some(b)) => Some(b),
        (true, None) => Some(LevelBuffer::new(
            cfg.replay,
            ReplacementRule::Diversity,
            cfg.diversity.kernel(),
        )?),
    };
    if let Some(b) = &buffer {
        run.next_level_id = b.entries().iter().map(|e| e.id + 1).max().unwrap_or(0);
    }

    let mut iteration = 0u64;
    while run.budget_left(iteration) {
        let step: Result<()> = (|| {
            let epsilon: f64 = run.rng.gen();
            let can_replay = buffer.as_ref().is_some_and(|b| !b.is_empty());
            let generate = epsilon <= opts.p || !can_replay;
            run.record(|| TraceEvent::ReplayDecision {
                iteration,
                epsilon,
                generate,
            });

            let (level_id, level, design): (u64, LevelParams, Option<DesignTrajectory>) = if generate {
                let (level, design) = match opts.source {
                    LevelSource::Random => (random_design(&cfg.maze, run.rng), None),
                    LevelSource::Learned => {
                        let (l, d) = generator.generate_level(run.rng);
                        (l, Some(d))
                    }
                };
                let id = run.fresh_id();
                run.record(|| TraceEvent::GenerateLevel { level_id: id });
                (id, level, design)
            } else {
                let buf = buffer.as_mut().expect("replay needs a buffer");
                let id = buf.sample_level(iteration, run.rng)?;
                run.record(|| TraceEvent::SampleLevel { level_id: id });
                let level = buf.get(id).expect("sampled id is buffered").level.clone();
                (id, level, None)
            };

            let alice = run.collect(&level, &pair.alice)?;
            let bob = run.collect(&level, &pair.bob)?;
            run.record(|| TraceEvent::Collect {
                level_id,
                alice_version: pair.alice.version,
                bob_version: pair.bob.version,
                alice_returns: alice.returns.clone(),
                bob_returns: bob.returns.clone(),
            });
            let regret = run.self_play_regret(&alice, &bob)?;
            run.record(|| TraceEvent::Regret { value: regret });

            pair.sync_bob();
            run.record(|| TraceEvent::SyncBob {
                version: pair.bob.version,
            });
            pair.alice = train_step(&pair.alice, &alice.trajs, &cfg.learner)?;
            run.record(|| TraceEvent::TrainAlice {
                version: pair.alice.version,
            });
            let f_gae = run.f_gae(&alice)?;

            if generate {
                if opts.train_generator {
                    if let Some(design) = &design {
                        generator = generator.train(design, regret, cfg.strategy.generator_learning_rate)?;
                        run.record(|| TraceEvent::TrainGenerator { reward: regret });
                    }
                }
                if let Some(buf) = buffer.as_mut() {
                    let reps = select_representatives(&alice.observations(), &cfg.diversity, level_id, run.rng)?;
                    run.record(|| TraceEvent::SelectRepresentatives { level_id });
                    let outcome = buf.try_insert(BufferEntry::new(level_id, level, reps, f_gae, iteration))?;
                    run.record(|| TraceEvent::TryInsert { level_id, outcome });
                    run.record(|| TraceEvent::UpdateReplayDistribution { entries: buf.len() });
                }
            } else {
                let buf = buffer.as_mut().expect("replay needs a buffer");
                buf.update_entry(level_id, &alice.observations(), f_gae, &cfg.diversity, run.rng)?;
                run.record(|| TraceEvent::UpdateRepresentatives { level_id });
                run.record(|| TraceEvent::UpdateReplayDistribution { entries: buf.len() });
            }

            let branch = if generate { Branch::Generate } else { Branch::Replay };
            run.push_row(
                iteration,
                branch,
                level_id,
                Some(regret),
                Some(f_gae),
                buffer.as_ref(),
                &pair.alice,
            )
        })();
        at_iteration(iteration, step)?;
        iteration += 1;
    }
    let generator = (opts.source == LevelSource::Learned).then_some(generator);
    Ok(run.finish(pair.alice, generator, buffer))
}

/// Prioritized level replay: random levels, a buffer curated and sampled by
/// learning potential alone.
pub fn run_plr<R: Rng + ?Sized>(cfg: &RunConfig, suite: &[MazeLevel], rng: &mut R) -> Result<RunReport> {
    let mut run = Run::new(cfg, suite, rng, false)?;
    let mut student = run.new_student();
    let replay = ReplayConfig { rho: 0.0, ..cfg.replay };
    let mut buffer = LevelBuffer::new(replay, ReplacementRule::LearningPotential, cfg.diversity.kernel())?;
    let mut iteration = 0u64;
    while run.budget_left(iteration) {
        let step: Result<()> = (|| {
            let epsilon: f64 = run.rng.gen();
            let generate = epsilon <= replay.p || buffer.is_empty();
            let (level_id, level) = if generate {
                let level = random_design(&cfg.maze, run.rng);
                (run.fresh_id(), level)
            } else {
                let id = buffer.sample_level(iteration, run.rng)?;
                (id, buffer.get(id).expect("sampled id is buffered").level.clone())
            };
            let batch = run.collect(&level, &student)?;
            student = train_step(&student, &batch.trajs, &cfg.learner)?;
            let f_gae = run.f_gae(&batch)?;
            if generate {
                let reps = select_representatives(&batch.observations(), &cfg.diversity, level_id, run.rng)?;
                buffer.try_insert(BufferEntry::new(level_id, level, reps, f_gae, iteration))?;
            } else {
                buffer.update_entry(level_id, &batch.observations(), f_gae, &cfg.diversity, run.rng)?;
            }
            let branch = if generate { Branch::Generate } else { Branch::Replay };
            run.push_row(iteration, branch, level_id, None, Some(f_gae), Some(&buffer), &student)
        })();
        at_iteration(iteration, step)?;
        iteration += 1;
    }
    Ok(run.finish(student, None, Some(buffer)))
}

/// Generator trained to minimize the student's return.
pub fn run_minimax<R: Rng + ?Sized>(cfg: &RunConfig, suite: &[MazeLevel], rng: &mut R) -> Result<RunReport> {
    let mut run = Run::new(cfg, suite, rng, false)?;
    let mut student = run.new_student();
    let mut generator = GeneratorPolicy::new(cfg.maze);
    let mut iteration = 0u64;
    while run.budget_left(iteration) {
        let step: Result<()> = (|| {
            let (level, design) = generator.generate_level(run.rng);
            let level_id = run.fresh_id();
            let batch = run.collect(&level, &student)?;
            let reward = minimax_reward(&batch.returns)?;
            student = train_step(&student, &batch.trajs, &cfg.learner)?;
            generator = generator.train(&design, reward, cfg.strategy.generator_learning_rate)?;
            let f_gae = run.f_gae(&batch)?;
            run.push_row(
                iteration,
                Branch::Generate,
                level_id,
                Some(reward),
                Some(f_gae),
                None,
                &student,
            )
        })();
        at_iteration(iteration, step)?;
        iteration += 1;
    }
    Ok(run.finish(student, Some(generator), None))
}

/// The minimax generator's reward: the negated mean student return.
pub fn minimax_reward(returns: &[f64]) -> Result<f64> {
    if returns.is_empty() {
        return Err(Error::precondition("no student returns"));
    }
    Ok(-(returns.iter().sum::<f64>() / returns.len() as f64))
}

/// PAIRED: protagonist and antagonist students, generator trained on
/// antagonist-minus-protagonist regret.
pub fn run_paired<R: Rng + ?Sized>(cfg: &RunConfig, suite: &[MazeLevel], rng: &mut R) -> Result<RunReport> {
    let mut run = Run::new(cfg, suite, rng, false)?;
    let mut protagonist = run.new_student();
    let mut antagonist = run.new_student();
    let mut generator = GeneratorPolicy::new(cfg.maze);
    let mut iteration = 0u64;
    while run.budget_left(iteration) {
        let step: Result<()> = (|| {
            let (level, design) = generator.generate_level(run.rng);
            let level_id = run.fresh_id();
            let pro = run.collect(&level, &protagonist)?;
            let ant = run.collect(&level, &antagonist)?;
            let regret = paired_regret(&pro.returns, &ant.returns)?;
            protagonist = train_step(&protagonist, &pro.trajs, &cfg.learner)?;
            antagonist = train_step(&antagonist, &ant.trajs, &cfg.learner)?;
            generator = generator.train(&design, regret, cfg.strategy.generator_learning_rate)?;
            let f_gae = run.f_gae(&pro)?;
            run.push_row(
                iteration,
                Branch::Generate,
                level_id,
                Some(regret),
                Some(f_gae),
                None,
                &protagonist,
            )
        })();
        at_iteration(iteration, step)?;
        iteration += 1;
    }
    Ok(run.finish(protagonist, Some(generator), None))
}
