//! Episode loop: feudal learning followed by refinement.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::abstraction::Abstraction;
use crate::error::Result;
use crate::feudal::{refine, run_episode, EpisodeTrace, FeudalPolicies, Split, StarConfig};
use crate::maze::GridMaze;
use crate::stats::ReachabilityStats;

/// Summary of one training episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub success: bool,
    pub steps: usize,
    pub epsilon: f64,
    pub splits: usize,
    pub regions: usize,
}

pub struct StarLearner {
    maze: GridMaze,
    abstraction: Abstraction,
    policies: FeudalPolicies,
    stats: ReachabilityStats,
    config: StarConfig,
    rng: ChaCha8Rng,
    episode: usize,
}

impl StarLearner {
    pub fn new(maze: GridMaze, abstraction: Abstraction, config: StarConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        abstraction.validate(&maze)?;
        let policies = FeudalPolicies::new(&maze, &abstraction);
        Ok(Self {
            maze,
            abstraction,
            policies,
            stats: ReachabilityStats::new(),
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            episode: 0,
        })
    }

    pub fn maze(&self) -> &GridMaze {
        &self.maze
    }

    pub fn abstraction(&self) -> &Abstraction {
        &self.abstraction
    }

    pub fn policies(&self) -> &FeudalPolicies {
        &self.policies
    }

    pub fn stats(&self) -> &ReachabilityStats {
        &self.stats
    }

    pub fn config(&self) -> &StarConfig {
        &self.config
    }

    pub fn episode(&self) -> usize {
        self.episode
    }

    /// Runs and learns from one episode, then refines the abstraction when
    /// enabled.
    pub fn train_episode(&mut self) -> (EpisodeRecord, EpisodeTrace, Vec<Split>) {
        let epsilon = self.config.epsilon(self.episode);
        let trace = run_episode(
            &self.maze,
            &self.abstraction,
            &mut self.policies,
            &mut self.stats,
            &self.config,
            epsilon,
            true,
            &mut self.rng,
        );
        let splits = if self.config.refine {
            refine(
                &self.maze,
                &mut self.abstraction,
                &mut self.policies,
                &mut self.stats,
                &trace.visited,
                &self.config,
            )
        } else {
            Vec::new()
        };
        let record = EpisodeRecord {
            episode: self.episode,
            success: trace.success,
            steps: trace.steps(),
            epsilon,
            splits: splits.len(),
            regions: self.abstraction.len(),
        };
        self.episode += 1;
        (record, trace, splits)
    }

    /// Greedy rollout without learning, drawing ties from `seed`.
    pub fn greedy_episode(&self, seed: u64) -> EpisodeTrace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut policies = self.policies.clone();
        let mut stats = ReachabilityStats::new();
        run_episode(
            &self.maze,
            &self.abstraction,
            &mut policies,
            &mut stats,
            &self.config,
            0.0,
            false,
            &mut rng,
        )
    }
}
