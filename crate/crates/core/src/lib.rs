//! Intrinsically motivated multi-task learning over a hierarchy of outcome spaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`types`]: actions, outcomes, controllables, procedures and the task hierarchy.
//! - [`memory`]: append-only episodic memory with exact nearest-neighbour lookup.
//! - [`arm`]: a deterministic planar arm that can grasp a pen and draw.
//! - [`models`]: memory-based forward/inverse models and recursive resolution of
//!   controllable sequences into compound actions.
//! - [`motivation`]: competence, learning progress, interest maps and the
//!   strategy/task/goal selector.
//! - [`teacher`] and [`strategies`]: scripted demonstrators and the five
//!   data-collection strategies, driven through a [`learner::Learner`].

pub mod arm;
pub mod error;
pub mod learner;
pub mod memory;
pub mod models;
pub mod motivation;
pub mod strategies;
pub mod teacher;
pub mod types;

pub use error::{Error, Result};
pub use learner::{Learner, LearnerConfig};
pub use memory::{Memory, Neighbor};
pub use types::{
    CompoundAction, Component, Controllable, Episode, Outcome, PrimitiveAction, Procedure,
    SpaceId, SpaceSpec, StrategyId, TaskHierarchy, TeacherId,
};
