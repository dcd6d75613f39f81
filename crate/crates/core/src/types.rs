//! Domain types shared by every part of the learner.

use std::fmt;

use crate::error::{Error, Result};

/// Index of an outcome space in a [`TaskHierarchy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpaceId(pub usize);

/// Index of a strategy in the learner's strategy table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrategyId(pub usize);

/// Index of a teacher in the learner's teacher set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TeacherId(pub usize);

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "omega{}", self.0)
    }
}

/// Normalized motor parameters, each component in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveAction {
    pub params: Vec<f64>,
}

impl PrimitiveAction {
    pub fn new(params: Vec<f64>) -> Result<Self> {
        for &v in &params {
            if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
                return Err(Error::OutOfBounds {
                    what: "primitive action",
                    value: v,
                });
            }
        }
        Ok(Self { params })
    }

    /// Builds an action by clamping every component into [-1, 1].
    pub fn clamped(params: Vec<f64>) -> Self {
        Self {
            params: params.into_iter().map(|v| v.clamp(-1.0, 1.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }
}

/// A non-empty sequence of primitive actions sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundAction {
    pub actions: Vec<PrimitiveAction>,
}

impl CompoundAction {
    pub fn new(actions: Vec<PrimitiveAction>) -> Result<Self> {
        let Some(first) = actions.first() else {
            return Err(Error::InvalidConfig("compound action must not be empty".into()));
        };
        let p = first.dim();
        if let Some(bad) = actions.iter().find(|a| a.dim() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: bad.dim(),
            });
        }
        Ok(Self { actions })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// A point of an outcome space, in normalized `[0, 1]^d` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub space: SpaceId,
    pub values: Vec<f64>,
}

impl Outcome {
    pub fn new(space: SpaceId, values: Vec<f64>) -> Self {
        Self { space, values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn distance(&self, other: &Outcome) -> f64 {
        euclidean(&self.values, &other.values)
    }
}

/// Either a primitive action or a goal in a controllable outcome space.
#[derive(Debug, Clone, PartialEq)]
pub enum Controllable {
    Action(PrimitiveAction),
    Goal(Outcome),
}

impl Controllable {
    pub fn slot(&self) -> Slot {
        match self {
            Controllable::Action(_) => Slot::Action,
            Controllable::Goal(o) => Slot::Goal(o.space),
        }
    }

    pub fn params(&self) -> &[f64] {
        match self {
            Controllable::Action(a) => &a.params,
            Controllable::Goal(o) => &o.values,
        }
    }
}

/// Structural shape of one controllable: its variant and, for goals, its space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Action,
    Goal(SpaceId),
}

/// Shape of a controllable sequence; two sequences can be blended iff their
/// structures are equal.
pub fn structure(seq: &[Controllable]) -> Vec<Slot> {
    seq.iter().map(Controllable::slot).collect()
}

/// Task decomposition into an ordered list of subgoals.
#[derive(Debug, Clone, PartialEq)]
pub struct Procedure {
    pub subgoals: Vec<Outcome>,
}

impl Procedure {
    pub fn into_controllables(self) -> Vec<Controllable> {
        self.subgoals.into_iter().map(Controllable::Goal).collect()
    }

    /// Reads a procedure back from a controllable sequence made only of goals.
    pub fn from_controllables(seq: &[Controllable]) -> Option<Self> {
        let subgoals = seq
            .iter()
            .map(|c| match c {
                Controllable::Goal(o) => Some(o.clone()),
                Controllable::Action(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        (!subgoals.is_empty()).then_some(Self { subgoals })
    }
}

/// What an outcome space may be decomposed into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Actions,
    Space(SpaceId),
}

/// Descriptor of an outcome space: name and raw per-dimension bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSpec {
    pub name: String,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SpaceSpec {
    pub fn new(name: impl Into<String>, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            lo,
            hi,
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Maps raw coordinates into `[0, 1]^d`.
    pub fn normalize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&x, (&lo, &hi))| (x - lo) / (hi - lo))
            .collect()
    }

    pub fn denormalize(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&u, (&lo, &hi))| lo + u * (hi - lo))
            .collect()
    }
}

/// Outcome spaces plus the directed acyclic graph of permitted components.
#[derive(Debug, Clone)]
pub struct TaskHierarchy {
    action_dim: usize,
    spaces: Vec<SpaceSpec>,
    components: Vec<Vec<Component>>,
}

impl TaskHierarchy {
    pub fn new(
        action_dim: usize,
        spaces: Vec<SpaceSpec>,
        components: Vec<Vec<Component>>,
    ) -> Result<Self> {
        if action_dim == 0 {
            return Err(Error::InvalidHierarchy("action dimension must be positive".into()));
        }
        if spaces.len() != components.len() {
            return Err(Error::InvalidHierarchy(format!(
                "{} spaces but {} component lists",
                spaces.len(),
                components.len()
            )));
        }
        for s in &spaces {
            if s.dim() == 0 || s.lo.len() != s.hi.len() {
                return Err(Error::InvalidHierarchy(format!("bad bounds for {}", s.name)));
            }
            if s.lo.iter().zip(&s.hi).any(|(lo, hi)| !(lo < hi)) {
                return Err(Error::InvalidHierarchy(format!("empty bounds for {}", s.name)));
            }
        }
        let h = Self {
            action_dim,
            spaces,
            components,
        };
        h.validate()?;
        Ok(h)
    }

    fn validate(&self) -> Result<()> {
        for comps in &self.components {
            for c in comps {
                if let Component::Space(s) = c {
                    if s.0 >= self.spaces.len() {
                        return Err(Error::UnknownSpace(*s));
                    }
                }
            }
        }
        if !self
            .components
            .iter()
            .any(|c| c.contains(&Component::Actions))
        {
            return Err(Error::InvalidHierarchy(
                "no space is decomposable into primitive actions".into(),
            ));
        }
        // Kahn-style check via depth computation.
        for i in 0..self.spaces.len() {
            self.depth_from(SpaceId(i), &mut vec![0u8; self.spaces.len()])?;
        }
        Ok(())
    }

    // 0 = unvisited, 1 = on stack, 2 = done
    fn depth_from(&self, s: SpaceId, marks: &mut [u8]) -> Result<usize> {
        match marks[s.0] {
            1 => return Err(Error::CycleDetected(s)),
            _ => marks[s.0] = 1,
        }
        let mut depth = 0;
        for c in &self.components[s.0] {
            if let Component::Space(child) = c {
                depth = depth.max(1 + self.depth_from(*child, marks)?);
            }
        }
        marks[s.0] = 2;
        Ok(depth)
    }

    /// Adds a permitted component, rejecting the change if it creates a cycle.
    pub fn add_component(&mut self, space: SpaceId, component: Component) -> Result<()> {
        self.space(space)?;
        if self.components[space.0].contains(&component) {
            return Ok(());
        }
        self.components[space.0].push(component);
        if let Err(e) = self.validate() {
            self.components[space.0].pop();
            return Err(e);
        }
        Ok(())
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn num_spaces(&self) -> usize {
        self.spaces.len()
    }

    pub fn space_ids(&self) -> impl Iterator<Item = SpaceId> {
        (0..self.spaces.len()).map(SpaceId)
    }

    pub fn space(&self, id: SpaceId) -> Result<&SpaceSpec> {
        self.spaces.get(id.0).ok_or(Error::UnknownSpace(id))
    }

    pub fn dim(&self, id: SpaceId) -> Result<usize> {
        Ok(self.space(id)?.dim())
    }

    pub fn components(&self, id: SpaceId) -> Result<&[Component]> {
        self.components
            .get(id.0)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownSpace(id))
    }

    /// Component outcome spaces only (procedure subgoal candidates).
    pub fn outcome_components(&self, id: SpaceId) -> Result<Vec<SpaceId>> {
        Ok(self
            .components(id)?
            .iter()
            .filter_map(|c| match c {
                Component::Space(s) => Some(*s),
                Component::Actions => None,
            })
            .collect())
    }

    /// Whether `seq` only uses primitives or goals in component spaces of `id`.
    pub fn admits(&self, id: SpaceId, seq: &[Controllable]) -> bool {
        let Ok(comps) = self.components(id) else {
            return false;
        };
        seq.iter().all(|c| match c {
            Controllable::Action(_) => true,
            Controllable::Goal(o) => comps.contains(&Component::Space(o.space)),
        })
    }

    /// Longest path (in edges between outcome spaces) starting at `id`.
    pub fn depth(&self, id: SpaceId) -> Result<usize> {
        self.space(id)?;
        self.depth_from(id, &mut vec![0u8; self.spaces.len()])
    }

    pub fn max_depth(&self) -> usize {
        self.space_ids()
            .map(|s| self.depth(s).unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Checks dimension and normalized bounds of an outcome.
    pub fn check_outcome(&self, o: &Outcome) -> Result<()> {
        let dim = self.dim(o.space)?;
        if o.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: o.dim(),
            });
        }
        const TOL: f64 = 1e-9;
        for &v in &o.values {
            if !v.is_finite() || v < -TOL || v > 1.0 + TOL {
                return Err(Error::OutOfBounds {
                    what: "outcome",
                    value: v,
                });
            }
        }
        Ok(())
    }
}

/// One interaction record.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub iteration: usize,
    /// Environment start-state snapshot.
    pub context: Vec<f64>,
    pub goal: Outcome,
    pub strategy: StrategyId,
    pub teacher: Option<TeacherId>,
    /// The controllable sequence chosen by the strategy.
    pub controllables: Vec<Controllable>,
    /// Primitive actions actually executed.
    pub compound: CompoundAction,
    /// Reached outcome per space, `None` when the space was not elicited.
    pub reached: Vec<Option<Outcome>>,
    /// Competence with respect to `goal`.
    pub competence_goal: f64,
    /// Outcome demonstrated by a teacher during emulation.
    pub emulation_target: Option<Outcome>,
}

impl Episode {
    pub fn reached_in(&self, space: SpaceId) -> Option<&Outcome> {
        self.reached.get(space.0).and_then(Option::as_ref)
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
