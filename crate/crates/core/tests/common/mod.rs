#![allow(dead_code)]

use sgim_core::types::{
    CompoundAction, Component, Controllable, Episode, Outcome, PrimitiveAction, SpaceId, SpaceSpec,
    StrategyId, TaskHierarchy,
};

/// Unit spaces of dimension `dims[i]`, each decomposable into actions or
/// goals of the previous space.
pub fn chain(action_dim: usize, dims: &[usize]) -> TaskHierarchy {
    let spaces = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| SpaceSpec::new(format!("s{i}"), vec![0.0; d], vec![1.0; d]))
        .collect();
    let components = (0..dims.len())
        .map(|i| {
            let mut c = vec![Component::Actions];
            if i > 0 {
                c.push(Component::Space(SpaceId(i - 1)));
            }
            c
        })
        .collect();
    TaskHierarchy::new(action_dim, spaces, components).unwrap()
}

pub fn act(p: &[f64]) -> Controllable {
    Controllable::Action(PrimitiveAction::clamped(p.to_vec()))
}

pub fn goal(space: usize, v: &[f64]) -> Controllable {
    Controllable::Goal(Outcome::new(SpaceId(space), v.to_vec()))
}

/// Episode aimed at the first reached space (or space 0), with competence 0
/// when reached and the floor otherwise.
pub fn episode(
    iteration: usize,
    controllables: Vec<Controllable>,
    compound: Vec<Vec<f64>>,
    reached: Vec<Option<Vec<f64>>>,
) -> Episode {
    let reached: Vec<Option<Outcome>> = reached
        .into_iter()
        .enumerate()
        .map(|(s, r)| r.map(|v| Outcome::new(SpaceId(s), v)))
        .collect();
    let (goal, competence) = match reached.iter().flatten().next() {
        Some(o) => (o.clone(), 0.0),
        None => (Outcome::new(SpaceId(0), vec![0.5; 2]), -(2f64).sqrt()),
    };
    Episode {
        iteration,
        context: vec![],
        goal,
        strategy: StrategyId(0),
        teacher: None,
        controllables,
        compound: CompoundAction::new(compound.into_iter().map(PrimitiveAction::clamped).collect()).unwrap(),
        reached,
        competence_goal: competence,
        emulation_target: None,
    }
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
