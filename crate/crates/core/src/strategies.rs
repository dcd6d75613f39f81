//! The five data-collection strategies.
//!
//! Every strategy turns a goal into one executed, not yet recorded
//! [`Episode`]; [`Learner::run`] records it.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::learner::{Environment, Learner, StrategyKind};
use crate::models::Models;
use crate::motivation;
use crate::teacher::{perturb, DemoResponse, Teacher};
use crate::types::{
    CompoundAction, Controllable, Episode, Outcome, PrimitiveAction, Procedure, SpaceId,
    StrategyId, TeacherId,
};

/// Resolves a sequence, falling back to one random primitive when some
/// required model is empty.
fn resolve_or_random(models: &Models<'_>, seq: &[Controllable], rng: &mut ChaCha8Rng) -> Result<CompoundAction> {
    match models.resolve(seq, rng) {
        Err(Error::EmptyModel(_)) => {
            let p = models.hierarchy.action_dim();
            CompoundAction::new(vec![PrimitiveAction::clamped(
                (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect(),
            )])
        }
        other => other,
    }
}

fn gaussian(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    sd * rng.sample::<f64, _>(StandardNormal)
}

fn as_controllables(compound: &CompoundAction) -> Vec<Controllable> {
    compound.actions.iter().cloned().map(Controllable::Action).collect()
}

impl<E: Environment> Learner<E> {
    /// Dispatches to the strategy's implementation.
    pub fn apply(&mut self, strategy: StrategyId, goal: &Outcome) -> Result<Episode> {
        let desc = self
            .strategies
            .get(strategy.0)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown strategy {}", strategy.0)))?
            .clone();
        match desc.kind {
            StrategyKind::AutonomousActions => self.explore_actions(strategy, goal),
            StrategyKind::AutonomousProcedures => self.explore_procedures(strategy, goal),
            StrategyKind::Mimicry => self.mimic_action(strategy, desc.teacher.unwrap(), goal),
            StrategyKind::Emulation => self.emulate_outcome(strategy, desc.teacher.unwrap(), goal),
            StrategyKind::ProceduralImitation => {
                self.imitate_procedure(strategy, desc.teacher.unwrap(), goal)
            }
        }
    }

    fn finish(
        &self,
        strategy: StrategyId,
        teacher: Option<TeacherId>,
        goal: &Outcome,
        controllables: Vec<Controllable>,
        compound: CompoundAction,
        emulation_target: Option<Outcome>,
    ) -> Result<Episode> {
        let reached = self.env.execute(&compound);
        let competence_goal =
            motivation::competence(goal, reached.get(goal.space.0).and_then(Option::as_ref))?;
        Ok(Episode {
            iteration: self.iteration(),
            context: self.env.context(),
            goal: goal.clone(),
            strategy,
            teacher,
            controllables,
            compound,
            reached,
            competence_goal,
            emulation_target,
        })
    }

    /// Own inverse model towards `target`, resolved to primitives and perturbed
    /// with a noise that shrinks as local data accumulates.
    fn action_exploration(&mut self, target: &Outcome) -> Result<CompoundAction> {
        let models = Models::new(&self.memory, &self.hierarchy, &self.config.models);
        let seq = models.inverse_infer(target, &mut self.rng)?;
        let compound = resolve_or_random(&models, &seq, &mut self.rng)?;
        let n_near = self
            .memory
            .count_within(target.space, &target.values, self.config.exploration.radius)?;
        let sd = self.config.exploration.action_sd(n_near);
        Ok(perturb(&compound, sd, &mut self.rng))
    }

    /// Autonomous exploration of the action space.
    pub fn explore_actions(&mut self, strategy: StrategyId, goal: &Outcome) -> Result<Episode> {
        let compound = self.action_exploration(goal)?;
        self.finish(strategy, None, goal, as_controllables(&compound), compound, None)
    }

    /// Nearest stored procedure of `space` (by reached outcome) that only uses
    /// component spaces of `space`.
    pub fn nearest_procedure(&self, space: SpaceId, goal: &[f64]) -> Result<Option<Procedure>> {
        let mut best: Option<(f64, Procedure)> = None;
        for &e in self.memory.indexed(space)? {
            let ep = self.memory.episode(e);
            if !self.hierarchy.admits(space, &ep.controllables) {
                continue;
            }
            let Some(p) = Procedure::from_controllables(&ep.controllables) else {
                continue;
            };
            let d = crate::types::euclidean(&ep.reached_in(space).unwrap().values, goal);
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, p));
            }
        }
        Ok(best.map(|(_, p)| p))
    }

    /// Autonomous exploration of task decompositions.
    pub fn explore_procedures(&mut self, strategy: StrategyId, goal: &Outcome) -> Result<Episode> {
        let components = self.hierarchy.outcome_components(goal.space)?;
        if components.is_empty() {
            return Err(Error::NoComponents(goal.space));
        }
        let cfg = self.config.exploration.clone();
        let reuse = if self.rng.random::<f64>() < cfg.procedure_reuse {
            self.nearest_procedure(goal.space, &goal.values)?
        } else {
            None
        };
        let procedure = match reuse {
            Some(p) => Procedure {
                subgoals: p
                    .subgoals
                    .into_iter()
                    .map(|s| {
                        let values = s
                            .values
                            .iter()
                            .map(|v| (v + gaussian(&mut self.rng, cfg.procedure_sd)).clamp(0.0, 1.0))
                            .collect();
                        Outcome::new(s.space, values)
                    })
                    .collect(),
            },
            None => self.fresh_procedure(&components, cfg.procedure_len)?,
        };
        self.execute_procedure(strategy, None, goal, procedure)
    }

    /// Procedure with subgoals drawn uniformly in uniformly chosen component
    /// spaces.
    pub fn fresh_procedure(&mut self, components: &[SpaceId], len: usize) -> Result<Procedure> {
        let mut subgoals = Vec::with_capacity(len);
        for _ in 0..len {
            let space = components[self.rng.random_range(0..components.len())];
            let dim = self.hierarchy.dim(space)?;
            subgoals.push(Outcome::new(
                space,
                (0..dim).map(|_| self.rng.random::<f64>()).collect(),
            ));
        }
        Ok(Procedure { subgoals })
    }

    fn execute_procedure(
        &mut self,
        strategy: StrategyId,
        teacher: Option<TeacherId>,
        goal: &Outcome,
        procedure: Procedure,
    ) -> Result<Episode> {
        let controllables = procedure.into_controllables();
        let models = Models::new(&self.memory, &self.hierarchy, &self.config.models);
        let compound = resolve_or_random(&models, &controllables, &mut self.rng)?;
        self.finish(strategy, teacher, goal, controllables, compound, None)
    }

    fn teacher(&self, id: TeacherId) -> Result<&Teacher> {
        self.teachers
            .get(id.0)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown teacher {}", id.0)))
    }

    /// Repeats the teacher's demonstrated movement with a small variation.
    pub fn mimic_action(&mut self, strategy: StrategyId, teacher: TeacherId, goal: &Outcome) -> Result<Episode> {
        self.teacher(teacher)?;
        let response = self.teachers[teacher.0].demonstrate_action(goal, &mut self.rng)?;
        let DemoResponse::Action { compound, .. } = response else {
            unreachable!("action query returns an action demo")
        };
        let compound = perturb(&compound, self.config.exploration.mimic_sd, &mut self.rng);
        self.finish(strategy, Some(teacher), goal, as_controllables(&compound), compound, None)
    }

    /// Reproduces the teacher's demonstrated outcome with the learner's own
    /// movements. Competence is still measured against `goal`.
    pub fn emulate_outcome(&mut self, strategy: StrategyId, teacher: TeacherId, goal: &Outcome) -> Result<Episode> {
        let DemoResponse::Outcome { target, .. } = self.teacher(teacher)?.demonstrate_outcome(goal)? else {
            unreachable!("outcome query returns an outcome demo")
        };
        let compound = self.action_exploration(&target)?;
        self.finish(
            strategy,
            Some(teacher),
            goal,
            as_controllables(&compound),
            compound,
            Some(target),
        )
    }

    /// Follows the teacher's task decomposition, resolving its subgoals with
    /// the learner's own models.
    pub fn imitate_procedure(&mut self, strategy: StrategyId, teacher: TeacherId, goal: &Outcome) -> Result<Episode> {
        let DemoResponse::Procedure { procedure, .. } = self.teacher(teacher)?.demonstrate_procedure(goal)? else {
            unreachable!("procedure query returns a procedure demo")
        };
        self.execute_procedure(strategy, Some(teacher), goal, procedure)
    }
}
