//! Flat tabular Q-learning on the primitive moves, rewarded only at the task
//! goal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::feudal::{argmax_random, StarConfig};
use crate::maze::{Action, GridMaze};
use crate::trainer::EpisodeRecord;

pub struct FlatLearner {
    maze: GridMaze,
    /// `[cell * 4 + action]`.
    q: Vec<f64>,
    config: StarConfig,
    rng: ChaCha8Rng,
    episode: usize,
}

impl FlatLearner {
    /// Uses the discount, learning rate and exploration schedule of `config`.
    pub fn new(maze: GridMaze, config: StarConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            q: vec![0.0; maze.num_free() * 4],
            maze,
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
            episode: 0,
        })
    }

    pub fn values(&self, cell: usize) -> &[f64] {
        &self.q[cell * 4..cell * 4 + 4]
    }

    pub fn train_episode(&mut self) -> EpisodeRecord {
        let epsilon = self.config.epsilon(self.episode);
        let goal = self.maze.goal();
        let mut s = self.maze.start();
        let mut steps = 0;
        while steps < self.maze.horizon() && s != goal {
            let si = self.maze.index(s).unwrap();
            let a = if self.rng.random::<f64>() < epsilon {
                self.rng.random_range(0..4)
            } else {
                argmax_random(&self.q[si * 4..si * 4 + 4], &mut self.rng)
            };
            let s2 = self.maze.step(s, Action::ALL[a]);
            let s2i = self.maze.index(s2).unwrap();
            let target = if s2 == goal {
                1.0
            } else {
                self.config.gamma * self.values(s2i).iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            let q = &mut self.q[si * 4 + a];
            *q += self.config.alpha * (target - *q);
            s = s2;
            steps += 1;
        }
        let record = EpisodeRecord {
            episode: self.episode,
            success: s == goal,
            steps,
            epsilon,
            splits: 0,
            regions: 1,
        };
        self.episode += 1;
        record
    }
}
