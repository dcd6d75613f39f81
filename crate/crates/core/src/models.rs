//! Memory-based forward and inverse models, and the recursive resolution of
//! controllable sequences into executable compound actions.
//!
//! An episode stored under space `T` is reused by the model of `T` through its
//! controllable sequence when that sequence only refers to components of `T`
//! in the hierarchy. Otherwise (the episode was indexed in `T` by hindsight
//! while pursuing another task) its executed primitive actions are used
//! instead. This keeps every recursion strictly descending in the hierarchy.

use rand::Rng;

use crate::error::{Error, Result};
use crate::memory::{Memory, Neighbor};
use crate::types::{
    structure, CompoundAction, Controllable, Episode, Outcome, PrimitiveAction, SpaceId,
    TaskHierarchy,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Neighbours used by both models.
    pub k: usize,
    /// Regularizer of inverse-distance weights.
    pub epsilon: f64,
    /// Return a uniformly random primitive when a model has no data.
    pub random_fallback: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            k: 5,
            epsilon: 1e-9,
            random_fallback: true,
        }
    }
}

/// Read-only view of the models of every task.
#[derive(Debug, Clone, Copy)]
pub struct Models<'a> {
    pub memory: &'a Memory,
    pub hierarchy: &'a TaskHierarchy,
    pub config: &'a ModelConfig,
}

impl<'a> Models<'a> {
    pub fn new(memory: &'a Memory, hierarchy: &'a TaskHierarchy, config: &'a ModelConfig) -> Self {
        Self {
            memory,
            hierarchy,
            config,
        }
    }

    /// The controllable sequence an episode contributes to the model of `space`.
    pub fn controllables_for(&self, episode: &Episode, space: SpaceId) -> Vec<Controllable> {
        if self.hierarchy.admits(space, &episode.controllables) {
            episode.controllables.clone()
        } else {
            episode
                .compound
                .actions
                .iter()
                .cloned()
                .map(Controllable::Action)
                .collect()
        }
    }

    fn random_action<R: Rng + ?Sized>(&self, rng: &mut R) -> PrimitiveAction {
        PrimitiveAction::clamped(
            (0..self.hierarchy.action_dim())
                .map(|_| rng.random_range(-1.0..=1.0))
                .collect(),
        )
    }

    /// Inverse model: a controllable sequence expected to reach `goal`.
    pub fn inverse_infer<R: Rng + ?Sized>(
        &self,
        goal: &Outcome,
        rng: &mut R,
    ) -> Result<Vec<Controllable>> {
        let neighbors = self
            .memory
            .knn(goal.space, &goal.values, self.config.k)?;
        if neighbors.is_empty() {
            if self.config.random_fallback {
                return Ok(vec![Controllable::Action(self.random_action(rng))]);
            }
            return Err(Error::EmptyModel(goal.space));
        }
        let seqs: Vec<(f64, Vec<Controllable>)> = neighbors
            .iter()
            .map(|n| {
                (
                    n.distance,
                    self.controllables_for(self.memory.episode(n.episode), goal.space),
                )
            })
            .collect();
        let shape = structure(&seqs[0].1);
        let group: Vec<&(f64, Vec<Controllable>)> =
            seqs.iter().filter(|(_, s)| structure(s) == shape).collect();
        if group.len() < 2 {
            return Ok(seqs[0].1.clone());
        }
        let weighted: Vec<(f64, &[Controllable])> = group
            .iter()
            .map(|(d, s)| (1.0 / (d + self.config.epsilon), s.as_slice()))
            .collect();
        Ok(blend(&weighted))
    }

    /// Replaces every goal controllable by the resolution of its inverse model,
    /// recursively, yielding primitives only.
    pub fn resolve<R: Rng + ?Sized>(
        &self,
        controllables: &[Controllable],
        rng: &mut R,
    ) -> Result<CompoundAction> {
        self.resolve_traced(controllables, rng).map(|(c, _)| c)
    }

    /// Like [`Models::resolve`], also returning the deepest recursion level.
    pub fn resolve_traced<R: Rng + ?Sized>(
        &self,
        controllables: &[Controllable],
        rng: &mut R,
    ) -> Result<(CompoundAction, usize)> {
        let mut out = Vec::new();
        let depth = self.resolve_into(controllables, rng, 0, &mut out)?;
        Ok((CompoundAction::new(out)?, depth))
    }

    fn resolve_into<R: Rng + ?Sized>(
        &self,
        controllables: &[Controllable],
        rng: &mut R,
        depth: usize,
        out: &mut Vec<PrimitiveAction>,
    ) -> Result<usize> {
        // Each level descends one hierarchy edge, so this can only trip on a
        // corrupted hierarchy.
        if depth > self.hierarchy.num_spaces() {
            return Err(Error::CycleDetected(SpaceId(0)));
        }
        let mut deepest = depth;
        for c in controllables {
            match c {
                Controllable::Action(a) => out.push(a.clone()),
                Controllable::Goal(goal) => {
                    let inner = self.inverse_infer(goal, rng)?;
                    deepest = deepest.max(self.resolve_into(&inner, rng, depth + 1, out)?);
                }
            }
        }
        Ok(deepest)
    }

    /// Forward model: mean reached outcome of the nearest stored sequences of
    /// the same structure, by distance in parameter space.
    pub fn forward_predict(&self, space: SpaceId, controllables: &[Controllable]) -> Result<Outcome> {
        let indexed = self.memory.indexed(space)?;
        if indexed.is_empty() {
            return Err(Error::EmptyModel(space));
        }
        let shape = structure(controllables);
        let query = flatten(controllables);
        let mut same: Vec<Neighbor> = Vec::new();
        let mut any: Option<Neighbor> = None;
        for &e in indexed {
            let seq = self.controllables_for(self.memory.episode(e), space);
            let params = flatten(&seq);
            if structure(&seq) == shape {
                same.push(Neighbor {
                    episode: e,
                    distance: crate::types::euclidean(&params, &query),
                });
            } else {
                let d = padded_distance(&params, &query);
                if any.is_none_or(|n| d < n.distance) {
                    any = Some(Neighbor {
                        episode: e,
                        distance: d,
                    });
                }
            }
        }
        // stable sort keeps insertion order on ties
        same.sort_by(|a, b| a.distance.total_cmp(&b.distance));
        same.truncate(self.config.k);
        let chosen: Vec<Neighbor> = if same.is_empty() {
            any.into_iter().collect()
        } else {
            same
        };
        let dim = self.hierarchy.dim(space)?;
        let mut mean = vec![0.0; dim];
        for n in &chosen {
            let o = self
                .memory
                .episode(n.episode)
                .reached_in(space)
                .expect("indexed episode reached its space");
            for (m, v) in mean.iter_mut().zip(&o.values) {
                *m += v;
            }
        }
        let count = chosen.len() as f64;
        mean.iter_mut().for_each(|m| *m /= count);
        Ok(Outcome::new(space, mean))
    }
}

/// Weighted average of structure-identical sequences.
pub fn blend(weighted: &[(f64, &[Controllable])]) -> Vec<Controllable> {
    let total: f64 = weighted.iter().map(|(w, _)| w).sum();
    let template = weighted[0].1;
    template
        .iter()
        .enumerate()
        .map(|(slot, c)| {
            let mut acc = vec![0.0; c.params().len()];
            for (w, seq) in weighted {
                for (a, v) in acc.iter_mut().zip(seq[slot].params()) {
                    *a += w * v;
                }
            }
            acc.iter_mut().for_each(|a| *a /= total);
            match c {
                Controllable::Action(_) => Controllable::Action(PrimitiveAction::clamped(acc)),
                Controllable::Goal(o) => Controllable::Goal(Outcome::new(
                    o.space,
                    acc.into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
                )),
            }
        })
        .collect()
}

pub fn flatten(seq: &[Controllable]) -> Vec<f64> {
    seq.iter().flat_map(|c| c.params().iter().copied()).collect()
}

fn padded_distance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let d = a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}
