//! Desk-scale STAR: a Commander choosing abstract goal regions, a Tutor
//! choosing subgoal cells toward them and a Controller choosing moves, all
//! tabular, over a grid maze. After each episode, regions whose start cells
//! disagree on whether a commanded region is reachable within one Commander
//! span are split.
//!
//! A flat Q-learning agent with the sparse goal reward is included as a
//! baseline.

pub mod abstraction;
pub mod error;
pub mod feudal;
pub mod flat;
pub mod maze;
pub mod stats;
pub mod trainer;

pub use abstraction::{Abstraction, Rect};
pub use error::{Error, Result};
pub use feudal::{refine, run_episode, EpisodeTrace, FeudalPolicies, Span, Split, StarConfig};
pub use flat::FlatLearner;
pub use maze::{Action, Cell, GridMaze};
pub use stats::{estimate_reachability, ReachabilityStats, Tally};
pub use trainer::{EpisodeRecord, StarLearner};
