//! The learner: one episode per call of [`Learner::step`].
//!
//! Each step selects a strategy, a task space and a goal from the interest
//! map, applies the strategy to produce and execute a controllable sequence,
//! records the episode in memory and feeds the competence back into the
//! interest map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::memory::Memory;
use crate::models::{ModelConfig, Models};
use crate::motivation::{self, InterestMap, MotivationConfig, SelectionMode};
use crate::teacher::Teacher;
use crate::types::{CompoundAction, Outcome, SpaceId, StrategyId, TaskHierarchy, TeacherId};

/// Something that executes a compound action from a fixed start state.
pub trait Environment {
    /// Snapshot of the start state.
    fn context(&self) -> Vec<f64>;
    /// Normalized reached outcome per space (`None` when not elicited).
    fn execute(&self, compound: &CompoundAction) -> Vec<Option<Outcome>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    AutonomousActions,
    AutonomousProcedures,
    Mimicry,
    Emulation,
    ProceduralImitation,
}

impl StrategyKind {
    pub fn is_imitation(self) -> bool {
        matches!(
            self,
            StrategyKind::Mimicry | StrategyKind::Emulation | StrategyKind::ProceduralImitation
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyDescriptor {
    pub name: String,
    pub kind: StrategyKind,
    pub teacher: Option<TeacherId>,
    /// Cost factor κ in (0, 1].
    pub cost: f64,
    /// When set, the strategy is not chosen by the selector but forced every
    /// `period` iterations on a uniformly random goal.
    pub forced_period: Option<usize>,
}

impl StrategyDescriptor {
    pub fn autonomous(name: &str, kind: StrategyKind) -> Self {
        Self {
            name: name.into(),
            kind,
            teacher: None,
            cost: 1.0,
            forced_period: None,
        }
    }

    pub fn imitation(name: &str, kind: StrategyKind, teacher: TeacherId, cost: f64) -> Self {
        Self {
            name: name.into(),
            kind,
            teacher: Some(teacher),
            cost,
            forced_period: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationConfig {
    /// Noise floor of autonomous action exploration.
    pub base_sd: f64,
    /// Extra noise when no data is near the goal.
    pub extra_sd: f64,
    /// Scale of the decay of the extra noise with local data count.
    pub decay: f64,
    /// Radius defining "near the goal" for the local data count.
    pub radius: f64,
    /// Probability of reusing the nearest stored procedure.
    pub procedure_reuse: f64,
    /// Noise on reused procedure subgoals.
    pub procedure_sd: f64,
    /// Number of subgoals of a fresh procedure.
    pub procedure_len: usize,
    /// Learner-side noise when repeating a demonstrated movement.
    pub mimic_sd: f64,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        Self {
            base_sd: 0.05,
            extra_sd: 0.25,
            decay: 10.0,
            radius: 0.1,
            procedure_reuse: 0.5,
            procedure_sd: 0.1,
            procedure_len: 2,
            mimic_sd: 0.02,
        }
    }
}

impl ExplorationConfig {
    /// Noise of autonomous action exploration given `n_near` stored outcomes
    /// near the goal.
    pub fn action_sd(&self, n_near: usize) -> f64 {
        self.base_sd + self.extra_sd * (-(n_near as f64) / self.decay).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LearnerConfig {
    pub models: ModelConfig,
    pub motivation: MotivationConfig,
    pub exploration: ExplorationConfig,
}

/// Which strategy, space and goal produced an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Choice {
    pub strategy: StrategyId,
    pub goal: Outcome,
    /// `None` for forced (scheduled) episodes.
    pub mode: Option<SelectionMode>,
}

pub struct Learner<E> {
    pub(crate) env: E,
    pub(crate) hierarchy: TaskHierarchy,
    pub(crate) memory: Memory,
    pub(crate) interest: InterestMap,
    pub(crate) teachers: Vec<Teacher>,
    pub(crate) strategies: Vec<StrategyDescriptor>,
    available: Vec<Vec<StrategyId>>,
    costs: Vec<f64>,
    pub(crate) config: LearnerConfig,
    pub(crate) rng: ChaCha8Rng,
    iteration: usize,
    counts: Vec<Vec<usize>>,
}

impl<E: Environment> Learner<E> {
    pub fn new(
        env: E,
        hierarchy: TaskHierarchy,
        teachers: Vec<Teacher>,
        strategies: Vec<StrategyDescriptor>,
        config: LearnerConfig,
        seed: u64,
    ) -> Result<Self> {
        config.motivation.validate()?;
        if strategies.is_empty() {
            return Err(Error::InvalidConfig("no strategies".into()));
        }
        for s in &strategies {
            if !(s.cost > 0.0 && s.cost <= 1.0) {
                return Err(Error::InvalidConfig(format!("{}: cost must be in (0, 1]", s.name)));
            }
            match (s.kind.is_imitation(), s.teacher) {
                (true, None) => {
                    return Err(Error::InvalidConfig(format!("{}: imitation needs a teacher", s.name)))
                }
                (true, Some(t)) if t.0 >= teachers.len() => {
                    return Err(Error::InvalidConfig(format!("{}: unknown teacher", s.name)))
                }
                (false, Some(_)) => {
                    return Err(Error::InvalidConfig(format!(
                        "{}: autonomous strategies take no teacher",
                        s.name
                    )))
                }
                _ => {}
            }
            if s.forced_period == Some(0) {
                return Err(Error::InvalidConfig(format!("{}: period must be positive", s.name)));
            }
        }
        let available = availability(&hierarchy, &teachers, &strategies, false);
        if available.iter().all(Vec::is_empty) && strategies.iter().all(|s| s.forced_period.is_none()) {
            return Err(Error::InvalidConfig("no strategy serves any space".into()));
        }
        let costs = strategies.iter().map(|s| s.cost).collect();
        let memory = Memory::new(&hierarchy);
        let interest = InterestMap::new(&hierarchy, strategies.len());
        let counts = vec![vec![0; hierarchy.num_spaces()]; strategies.len()];
        Ok(Self {
            env,
            hierarchy,
            memory,
            interest,
            teachers,
            strategies,
            available,
            costs,
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            iteration: 0,
            counts,
        })
    }

    pub fn env(&self) -> &E {
        &self.env
    }

    pub fn memory(&self) -> &Memory {
        &self.memory
    }

    pub fn hierarchy(&self) -> &TaskHierarchy {
        &self.hierarchy
    }

    pub fn interest_map(&self) -> &InterestMap {
        &self.interest
    }

    pub fn teachers(&self) -> &[Teacher] {
        &self.teachers
    }

    pub fn strategies(&self) -> &[StrategyDescriptor] {
        &self.strategies
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Strategies the selector may pick per space.
    pub fn available(&self) -> &[Vec<StrategyId>] {
        &self.available
    }

    /// Episode counts per strategy and space.
    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn models(&self) -> Models<'_> {
        Models::new(&self.memory, &self.hierarchy, &self.config.models)
    }

    fn forced_due(&mut self) -> Option<StrategyId> {
        let it = self.iteration;
        self.strategies
            .iter()
            .position(|s| s.forced_period.is_some_and(|p| it % p == p - 1))
            .map(StrategyId)
    }

    /// Chooses the next strategy and goal.
    pub fn choose(&mut self) -> Result<Choice> {
        if let Some(strategy) = self.forced_due() {
            let served = availability(&self.hierarchy, &self.teachers, &self.strategies, true);
            let spaces: Vec<usize> = (0..served.len())
                .filter(|&s| served[s].contains(&strategy))
                .collect();
            if spaces.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "{} serves no space",
                    self.strategies[strategy.0].name
                )));
            }
            let space = SpaceId(spaces[self.rng.random_range(0..spaces.len())]);
            let dim = self.hierarchy.dim(space)?;
            let values = (0..dim).map(|_| self.rng.random::<f64>()).collect();
            return Ok(Choice {
                strategy,
                goal: Outcome::new(space, values),
                mode: None,
            });
        }
        let s = motivation::select(
            &self.interest,
            &self.available,
            &self.costs,
            &self.config.motivation,
            &mut self.rng,
        )?;
        Ok(Choice {
            strategy: s.strategy,
            goal: s.goal,
            mode: Some(s.mode),
        })
    }

    /// Runs one full iteration and returns the recorded episode's position.
    pub fn step(&mut self) -> Result<(Choice, usize)> {
        let choice = self.choose()?;
        let pos = self.run(choice.strategy, &choice.goal)?;
        Ok((choice, pos))
    }

    /// Applies `strategy` to `goal`, records the episode and updates the
    /// interest map.
    pub fn run(&mut self, strategy: StrategyId, goal: &Outcome) -> Result<usize> {
        self.hierarchy.check_outcome(goal)?;
        let episode = self.apply(strategy, goal)?;
        let competence = episode.competence_goal;
        let pos = self.memory.record(episode)?;
        self.interest.update_and_split(
            strategy,
            goal,
            self.iteration,
            competence,
            &self.costs,
            &self.config.motivation,
        )?;
        self.counts[strategy.0][goal.space.0] += 1;
        self.iteration += 1;
        Ok(pos)
    }

    /// Reached outcomes when trying `goal` with the current models and no
    /// exploration noise. Never touches memory or the learner's RNG.
    pub fn exploit<R: Rng + ?Sized>(&self, goal: &Outcome, rng: &mut R) -> Result<Vec<Option<Outcome>>> {
        let models = self.models();
        let seq = models.inverse_infer(goal, rng)?;
        let compound = models.resolve(&seq, rng)?;
        Ok(self.env.execute(&compound))
    }
}

/// Spaces served by each strategy. With `include_forced`, scheduled strategies
/// are included too; otherwise they are left out of the selector's sets.
pub fn availability(
    hierarchy: &TaskHierarchy,
    teachers: &[Teacher],
    strategies: &[StrategyDescriptor],
    include_forced: bool,
) -> Vec<Vec<StrategyId>> {
    hierarchy
        .space_ids()
        .map(|space| {
            strategies
                .iter()
                .enumerate()
                .filter(|(_, s)| include_forced || s.forced_period.is_none())
                .filter(|(_, s)| serves(hierarchy, teachers, s, space))
                .map(|(i, _)| StrategyId(i))
                .collect()
        })
        .collect()
}

fn serves(hierarchy: &TaskHierarchy, teachers: &[Teacher], s: &StrategyDescriptor, space: SpaceId) -> bool {
    let teacher = s.teacher.and_then(|t| teachers.get(t.0));
    match s.kind {
        StrategyKind::AutonomousActions => true,
        StrategyKind::AutonomousProcedures => hierarchy
            .outcome_components(space)
            .is_ok_and(|c| !c.is_empty()),
        StrategyKind::Mimicry => teacher.is_some_and(|t| t.has_action_demos(space)),
        StrategyKind::Emulation => teacher.is_some_and(|t| t.is_expert(space)),
        StrategyKind::ProceduralImitation => teacher.is_some_and(|t| t.has_procedure_demos(space)),
    }
}
