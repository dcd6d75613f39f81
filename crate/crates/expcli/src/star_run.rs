//! Maze runs of the feudal learner with abstraction refinement, next to a
//! flat Q-learning baseline trained under the same budget.
//!
//! Output files of a STAR run directory:
//!
//! - `star_episodes.csv`: `episode,success,steps,epsilon,splits,regions`.
//! - `flat_episodes.csv`: `episode,success,steps,epsilon`.
//! - `splits.csv`: `episode,parent,new,dim,threshold,target`.
//! - `abstraction.csv`: `episode,region,x0,y0,x1,y1,cells`, one block of rows
//!   for the initial partition (episode 0) and one after every episode that
//!   changed it (episode `e + 1` after episode `e`).
//! - `greedy_path.csv`: `step,x,y` of a noise-free rollout after training.
//! - `star_summary.csv`: `key,value` metadata and headline numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use sgim_star::{
    Abstraction, Cell, EpisodeRecord, EpisodeTrace, FlatLearner, GridMaze, Split, StarConfig,
    StarLearner,
};

use crate::config::ExperimentConfig;
use crate::error::{io_err, ExpError};

const FLAT_SALT: u64 = 0xF1A7_0000;
const GREEDY_SALT: u64 = 0x6EED_0000;

/// Window of final episodes over which success rates are reported.
pub const SUCCESS_WINDOW: usize = 200;
/// Window of final episodes that must be free of splits.
pub const QUIET_WINDOW: usize = 500;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StarSection {
    /// Maze text file, relative to the configuration file. The built-in
    /// 9×9 maze when absent.
    pub maze: Option<PathBuf>,
    pub horizon: usize,
    pub episodes: usize,
    /// Side of the square blocks of the initial partition.
    pub initial_block: usize,
    /// Give the goal cell a region of its own in the initial partition.
    pub isolate_goal: bool,
    /// Cells whose neighbouring regions are reported separately; defaults to
    /// the two inner bends of the built-in maze.
    pub corners: Option<Vec<[usize; 2]>>,
    /// Also train the flat baseline.
    pub baseline: bool,
    pub commander_span: usize,
    pub tutor_span: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Defaults to the episode budget.
    pub epsilon_episodes: Option<usize>,
    pub min_attempts: u32,
    pub high_rate: f64,
    pub low_rate: f64,
    pub refine: bool,
    pub all_goal_updates: bool,
}

impl Default for StarSection {
    fn default() -> Self {
        let c = StarConfig::default();
        Self {
            maze: None,
            horizon: 200,
            episodes: 3000,
            initial_block: 3,
            isolate_goal: true,
            corners: None,
            baseline: true,
            commander_span: c.commander_span,
            tutor_span: c.tutor_span,
            gamma: c.gamma,
            alpha: c.alpha,
            epsilon_start: c.epsilon_start,
            epsilon_end: c.epsilon_end,
            epsilon_episodes: None,
            min_attempts: c.min_attempts,
            high_rate: c.high_rate,
            low_rate: c.low_rate,
            refine: c.refine,
            all_goal_updates: c.all_goal_updates,
        }
    }
}

pub const DEFAULT_CORNERS: [[usize; 2]; 2] = [[6, 2], [6, 6]];

/// Everything needed to start a STAR run.
#[derive(Debug, Clone)]
pub struct StarSetup {
    pub maze: GridMaze,
    pub abstraction: Abstraction,
    pub config: StarConfig,
    pub episodes: usize,
    pub corners: Vec<Cell>,
    pub baseline: bool,
}

fn invalid(key: &str, message: impl Into<String>) -> ExpError {
    ExpError::Invalid {
        key: format!("star.{key}"),
        message: message.into(),
    }
}

fn section_invalid(message: impl Into<String>) -> ExpError {
    ExpError::Invalid {
        key: "star".into(),
        message: message.into(),
    }
}

impl StarSection {
    /// Resolves the section, reading the maze file relative to `base`.
    pub fn setup(&self, base: &Path) -> Result<StarSetup, ExpError> {
        if self.episodes < 1 {
            return Err(invalid("episodes", "at least one episode is needed"));
        }
        if self.horizon < 1 {
            return Err(invalid("horizon", "horizon must be positive"));
        }
        let maze = match &self.maze {
            Some(rel) => {
                let path = base.join(rel);
                let text = fs::read_to_string(&path).map_err(io_err(&path))?;
                GridMaze::parse(&text, self.horizon).map_err(|e| invalid("maze", format!("{}: {e}", path.display())))?
            }
            None => GridMaze::parse(sgim_star::maze::DEFAULT_MAZE, self.horizon)?,
        };
        let config = StarConfig {
            commander_span: self.commander_span,
            tutor_span: self.tutor_span,
            gamma: self.gamma,
            alpha: self.alpha,
            epsilon_start: self.epsilon_start,
            epsilon_end: self.epsilon_end,
            epsilon_episodes: self.epsilon_episodes.unwrap_or(self.episodes),
            min_attempts: self.min_attempts,
            high_rate: self.high_rate,
            low_rate: self.low_rate,
            refine: self.refine,
            all_goal_updates: self.all_goal_updates,
        };
        config.validate().map_err(|e| section_invalid(e.to_string()))?;
        let mut abstraction =
            Abstraction::tiled(&maze, self.initial_block).map_err(|e| invalid("initial_block", e.to_string()))?;
        if self.isolate_goal {
            abstraction.isolate(&maze, maze.goal())?;
        }
        let corners = match &self.corners {
            Some(cs) => cs.clone(),
            None if self.maze.is_none() => DEFAULT_CORNERS.to_vec(),
            None => Vec::new(),
        };
        let corners = corners.into_iter().map(|[x, y]| Cell::new(x, y)).collect::<Vec<_>>();
        if let Some(c) = corners.iter().find(|c| !maze.in_grid(**c)) {
            return Err(invalid("corners", format!("{c} lies outside the grid")));
        }
        Ok(StarSetup {
            maze,
            abstraction,
            config,
            episodes: self.episodes,
            corners,
            baseline: self.baseline,
        })
    }
}

/// Everything a STAR run produces, before serialization.
#[derive(Debug, Clone)]
pub struct StarRecord {
    pub label: String,
    pub seed: u64,
    pub shortest_path: usize,
    pub episodes: Vec<EpisodeRecord>,
    pub flat: Vec<EpisodeRecord>,
    pub splits: Vec<(usize, Split)>,
    /// Partitions after `episode` training episodes.
    pub snapshots: Vec<(usize, Abstraction)>,
    pub greedy: EpisodeTrace,
    pub corners: Vec<Cell>,
}

fn success_rate(records: &[EpisodeRecord]) -> Option<f64> {
    let tail = &records[records.len().saturating_sub(SUCCESS_WINDOW)..];
    (!tail.is_empty()).then(|| tail.iter().filter(|r| r.success).count() as f64 / tail.len() as f64)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

impl StarRecord {
    pub fn final_abstraction(&self) -> &Abstraction {
        &self.snapshots.last().expect("initial snapshot").1
    }

    /// Success rate of the feudal learner over the last episodes.
    pub fn success_rate(&self) -> f64 {
        success_rate(&self.episodes).unwrap_or(0.0)
    }

    pub fn flat_success_rate(&self) -> Option<f64> {
        success_rate(&self.flat)
    }

    /// Splits made during the last episodes.
    pub fn late_splits(&self) -> usize {
        let from = self.episodes.len().saturating_sub(QUIET_WINDOW);
        self.episodes[from..].iter().map(|r| r.splits).sum()
    }

    /// Greedy path length, when the greedy rollout reaches the goal.
    pub fn greedy_steps(&self) -> Option<usize> {
        self.greedy.success.then(|| self.greedy.steps())
    }

    /// Mean free-cell count of final regions with a cell within one step
    /// (diagonals included) of some corner, and of the other regions.
    pub fn corner_areas(&self) -> (Option<f64>, Option<f64>) {
        let abs = self.final_abstraction();
        let (mut near, mut far) = (Vec::new(), Vec::new());
        for r in 0..abs.len() {
            let area = abs.area(r) as f64;
            if abs
                .cells(r)
                .iter()
                .any(|c| self.corners.iter().any(|k| c.chebyshev(*k) <= 1))
            {
                near.push(area);
            } else {
                far.push(area);
            }
        }
        (mean(&near), mean(&far))
    }
}

/// Trains both learners in memory.
pub fn execute(label: &str, seed: u64, setup: &StarSetup) -> Result<StarRecord, ExpError> {
    let mut learner = StarLearner::new(
        setup.maze.clone(),
        setup.abstraction.clone(),
        setup.config.clone(),
        seed,
    )?;
    let mut episodes = Vec::with_capacity(setup.episodes);
    let mut splits = Vec::new();
    let mut snapshots = vec![(0, setup.abstraction.clone())];
    for _ in 0..setup.episodes {
        let (record, _, made) = learner.train_episode();
        if !made.is_empty() {
            snapshots.push((record.episode + 1, learner.abstraction().clone()));
        }
        splits.extend(made.into_iter().map(|s| (record.episode, s)));
        episodes.push(record);
    }
    let greedy = learner.greedy_episode(seed ^ GREEDY_SALT);

    let mut flat = Vec::new();
    if setup.baseline {
        let mut baseline = FlatLearner::new(setup.maze.clone(), setup.config.clone(), seed ^ FLAT_SALT)?;
        flat = (0..setup.episodes).map(|_| baseline.train_episode()).collect();
    }
    Ok(StarRecord {
        label: label.to_string(),
        seed,
        shortest_path: setup.maze.shortest_path(),
        episodes,
        flat,
        splits,
        snapshots,
        greedy,
        corners: setup.corners.clone(),
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes every output file of `record` into `dir`.
pub fn write(record: &StarRecord, dir: &Path) -> Result<(), ExpError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let put = |name: &str, body: String| -> Result<(), ExpError> {
        let path = dir.join(name);
        fs::write(&path, body).map_err(io_err(path))
    };

    let mut s = String::from("episode,success,steps,epsilon,splits,regions\n");
    for r in &record.episodes {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.episode, r.success as u8, r.steps, r.epsilon, r.splits, r.regions
        );
    }
    put("star_episodes.csv", s)?;

    let mut s = String::from("episode,success,steps,epsilon\n");
    for r in &record.flat {
        let _ = writeln!(s, "{},{},{},{}", r.episode, r.success as u8, r.steps, r.epsilon);
    }
    put("flat_episodes.csv", s)?;

    let mut s = String::from("episode,parent,new,dim,threshold,target\n");
    for (e, sp) in &record.splits {
        let _ = writeln!(s, "{e},{},{},{},{},{}", sp.parent, sp.new, sp.dim, sp.threshold, sp.target);
    }
    put("splits.csv", s)?;

    let mut s = String::from("episode,region,x0,y0,x1,y1,cells\n");
    for (e, abs) in &record.snapshots {
        for (i, r) in abs.regions().iter().enumerate() {
            let _ = writeln!(s, "{e},{i},{},{},{},{},{}", r.x0, r.y0, r.x1, r.y1, abs.area(i));
        }
    }
    put("abstraction.csv", s)?;

    let mut s = String::from("step,x,y\n");
    for (i, c) in record.greedy.path.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{}", c.x, c.y);
    }
    put("greedy_path.csv", s)?;

    let (near, far) = record.corner_areas();
    put(
        "star_summary.csv",
        format!(
            "key,value\nlabel,{}\nseed,{}\nepisodes,{}\nshortest_path,{}\nsuccess_rate,{}\nflat_success_rate,{}\n\
             greedy_success,{}\ngreedy_steps,{}\nregions,{}\nlate_splits,{}\ncorner_area,{}\nother_area,{}\n",
            record.label,
            record.seed,
            record.episodes.len(),
            record.shortest_path,
            record.success_rate(),
            opt(record.flat_success_rate()),
            record.greedy.success as u8,
            record.greedy.steps(),
            record.final_abstraction().len(),
            record.late_splits(),
            opt(near),
            opt(far),
        ),
    )
}

/// Runs the `[star]` section of `config` and writes its outputs into `dir`.
/// `base` is the directory the maze path is relative to.
pub fn run(config: &ExperimentConfig, base: &Path, dir: &Path) -> Result<StarRecord, ExpError> {
    let section = config
        .star
        .as_ref()
        .ok_or_else(|| section_invalid("a [star] section is required"))?;
    let setup = section.setup(base)?;
    let record = execute(&config.label, config.seed, &setup)?;
    write(&record, dir)?;
    Ok(record)
}
