//! Three tabular agents at nested timescales and the reachability-driven
//! refinement of the Commander's goal abstraction.

use rand::Rng;

use crate::abstraction::{Abstraction, Rect};
use crate::error::{Error, Result};
use crate::maze::{Action, Cell, GridMaze};
use crate::stats::ReachabilityStats;

#[derive(Debug, Clone, PartialEq)]
pub struct StarConfig {
    /// Commander span k, in steps.
    pub commander_span: usize,
    /// Tutor span l, in steps.
    pub tutor_span: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Episodes over which exploration decays linearly.
    pub epsilon_episodes: usize,
    /// Attempts a start cell needs toward a target before it counts as
    /// evidence.
    pub min_attempts: u32,
    pub high_rate: f64,
    pub low_rate: f64,
    pub refine: bool,
    /// Update the Controller toward every goal cell on each move instead of
    /// only the current subgoal.
    pub all_goal_updates: bool,
}

impl Default for StarConfig {
    fn default() -> Self {
        Self {
            commander_span: 20,
            tutor_span: 5,
            gamma: 0.95,
            alpha: 0.1,
            epsilon_start: 0.3,
            epsilon_end: 0.05,
            epsilon_episodes: 3000,
            min_attempts: 5,
            high_rate: 0.8,
            low_rate: 0.2,
            refine: true,
            all_goal_updates: false,
        }
    }
}

impl StarConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.commander_span > self.tutor_span && self.tutor_span > 1) {
            return bad("spans must satisfy commander > tutor > 1");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must be in (0, 1]");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must be in (0, 1]");
        }
        for e in [self.epsilon_start, self.epsilon_end] {
            if !(0.0..=1.0).contains(&e) {
                return bad("epsilon must be in [0, 1]");
            }
        }
        if self.epsilon_episodes == 0 {
            return bad("epsilon_episodes must be positive");
        }
        if self.min_attempts == 0 {
            return bad("min_attempts must be positive");
        }
        if !(0.0 <= self.low_rate && self.low_rate < self.high_rate && self.high_rate <= 1.0) {
            return bad("rates must satisfy 0 <= low < high <= 1");
        }
        Ok(())
    }

    /// Linear decay from `epsilon_start` to `epsilon_end`.
    pub fn epsilon(&self, episode: usize) -> f64 {
        let last = self.epsilon_episodes.saturating_sub(1).max(1) as f64;
        let f = (episode as f64 / last).min(1.0);
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * f
    }
}

/// Index of the maximum, ties broken uniformly at random.
pub fn argmax_random<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..values.len()).filter(|&i| values[i] == best).collect();
    ties[rng.random_range(0..ties.len())]
}

fn epsilon_greedy<R: Rng + ?Sized>(values: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if rng.random::<f64>() < epsilon {
        rng.random_range(0..values.len())
    } else {
        argmax_random(values, rng)
    }
}

fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Tutor values for one commanded region: per cell, one value per candidate
/// subgoal.
#[derive(Debug, Clone, PartialEq)]
pub struct TutorTable {
    candidates: Vec<Cell>,
    q: Vec<f64>,
}

impl TutorTable {
    fn new(maze: &GridMaze, abs: &Abstraction, region: usize) -> Self {
        let mut candidates = abs.cells(region).to_vec();
        candidates.extend(abs.frontier(maze, region));
        candidates.sort_by_key(|c| (c.y, c.x));
        Self {
            q: vec![0.0; maze.num_free() * candidates.len()],
            candidates,
        }
    }

    /// Same candidates as a fresh table for `region`, with values copied from
    /// `parent` wherever the candidate existed there.
    fn inherit(maze: &GridMaze, abs: &Abstraction, region: usize, parent: &TutorTable) -> Self {
        let mut t = Self::new(maze, abs, region);
        let (n, pn) = (t.candidates.len(), parent.candidates.len());
        for (c, cell) in t.candidates.iter().enumerate() {
            if let Some(pc) = parent.candidates.iter().position(|p| p == cell) {
                for s in 0..maze.num_free() {
                    t.q[s * n + c] = parent.q[s * pn + pc];
                }
            }
        }
        t
    }

    pub fn candidates(&self) -> &[Cell] {
        &self.candidates
    }

    pub fn values(&self, cell: usize) -> &[f64] {
        let n = self.candidates.len();
        &self.q[cell * n..(cell + 1) * n]
    }

    fn values_mut(&mut self, cell: usize) -> &mut [f64] {
        let n = self.candidates.len();
        &mut self.q[cell * n..(cell + 1) * n]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeudalPolicies {
    /// `[source region][target region]`.
    commander: Vec<Vec<f64>>,
    /// Indexed by commanded region.
    tutor: Vec<TutorTable>,
    /// `[(cell * cells + subgoal) * 4 + action]`.
    controller: Vec<f64>,
    cells: usize,
}

impl FeudalPolicies {
    pub fn new(maze: &GridMaze, abs: &Abstraction) -> Self {
        let n = abs.len();
        let cells = maze.num_free();
        Self {
            commander: vec![vec![0.0; n]; n],
            tutor: (0..n).map(|r| TutorTable::new(maze, abs, r)).collect(),
            controller: vec![0.0; cells * cells * 4],
            cells,
        }
    }

    pub fn commander(&self, from: usize, target: usize) -> f64 {
        self.commander[from][target]
    }

    pub fn commander_row(&self, from: usize) -> &[f64] {
        &self.commander[from]
    }

    pub fn tutor(&self, region: usize) -> &TutorTable {
        &self.tutor[region]
    }

    pub fn controller(&self, cell: usize, subgoal: usize) -> &[f64] {
        let i = (cell * self.cells + subgoal) * 4;
        &self.controller[i..i + 4]
    }

    /// Duplicates the parent's Commander row and column for the new region
    /// and derives the Tutor tables of both parts from the parent's.
    pub fn on_split(&mut self, maze: &GridMaze, abs: &Abstraction, parent: usize, new: usize) {
        debug_assert_eq!(new, self.commander.len());
        for row in &mut self.commander {
            let v = row[parent];
            row.push(v);
        }
        let row = self.commander[parent].clone();
        self.commander.push(row);
        let old = self.tutor[parent].clone();
        self.tutor[parent] = TutorTable::inherit(maze, abs, parent, &old);
        self.tutor.push(TutorTable::inherit(maze, abs, new, &old));
    }

    /// One-step update of the move `s → s2` toward `goal`: 1 on landing on
    /// it, bootstrapped otherwise.
    fn update_controller(&mut self, s: usize, a: usize, s2: usize, goal: usize, cfg: &StarConfig) {
        let target = if s2 == goal {
            1.0
        } else {
            cfg.gamma * max(self.controller(s2, goal))
        };
        let i = (s * self.cells + goal) * 4 + a;
        self.controller[i] += cfg.alpha * (target - self.controller[i]);
    }
}

/// One Commander span.
#[derive(Debug, Clone, PartialEq)]
pub struct Span {
    pub from: usize,
    pub start: Cell,
    pub target: usize,
    pub success: bool,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    /// Visited cells, starting with the start cell.
    pub path: Vec<Cell>,
    pub success: bool,
    pub spans: Vec<Span>,
    /// Regions the Commander decided from, in first-visit order.
    pub visited: Vec<usize>,
}

impl EpisodeTrace {
    pub fn steps(&self) -> usize {
        self.path.len() - 1
    }
}

/// Runs one episode from the start cell. With `learn`, all three agents are
/// updated and spans are tallied in `stats`.
#[allow(clippy::too_many_arguments)]
pub fn run_episode<R: Rng + ?Sized>(
    maze: &GridMaze,
    abs: &Abstraction,
    pol: &mut FeudalPolicies,
    stats: &mut ReachabilityStats,
    cfg: &StarConfig,
    epsilon: f64,
    learn: bool,
    rng: &mut R,
) -> EpisodeTrace {
    let goal = maze.goal();
    let mut s = maze.start();
    let mut path = vec![s];
    let mut spans = Vec::new();
    let mut visited = Vec::new();
    let mut t = 0;
    let n = abs.len();

    while t < maze.horizon() && s != goal {
        let from = abs.region_of(maze, s);
        if !visited.contains(&from) {
            visited.push(from);
        }
        let options: Vec<usize> = (0..n).filter(|&j| j != from || n == 1).collect();
        let values: Vec<f64> = options.iter().map(|&j| pol.commander[from][j]).collect();
        let target = options[epsilon_greedy(&values, epsilon, rng)];
        let span_start = s;
        let (mut reward, mut discount, mut tau, mut success) = (0.0, 1.0, 0, false);

        while tau < cfg.commander_span && t < maze.horizon() && s != goal {
            let si = maze.index(s).unwrap();
            let choice = epsilon_greedy(pol.tutor[target].values(si), epsilon, rng);
            let subgoal = pol.tutor[target].candidates[choice];
            let gi = maze.index(subgoal).unwrap();
            let (mut steps, mut entered) = (0, false);

            while steps < cfg.tutor_span && tau < cfg.commander_span && t < maze.horizon() && s != goal {
                let a = epsilon_greedy(pol.controller(maze.index(s).unwrap(), gi), epsilon, rng);
                let s2 = maze.step(s, Action::ALL[a]);
                if learn {
                    let (from, to) = (maze.index(s).unwrap(), maze.index(s2).unwrap());
                    if cfg.all_goal_updates {
                        for g in 0..maze.num_free() {
                            pol.update_controller(from, a, to, g, cfg);
                        }
                    } else {
                        pol.update_controller(from, a, to, gi, cfg);
                    }
                }
                reward += discount * -maze.normalized_goal_distance(s2);
                discount *= cfg.gamma;
                s = s2;
                path.push(s);
                t += 1;
                tau += 1;
                steps += 1;
                // a single region is commanded to itself: only the task goal counts
                let reached = if target == from { s == goal } else { abs.region_of(maze, s) == target };
                if reached {
                    entered = true;
                    success = true;
                    break;
                }
                if s == subgoal {
                    break;
                }
            }

            if learn {
                let next = if entered || s == goal {
                    0.0
                } else {
                    cfg.gamma.powi(steps as i32) * max(pol.tutor[target].values(maze.index(s).unwrap()))
                };
                let r = if entered { 1.0 } else { 0.0 };
                let q = &mut pol.tutor[target].values_mut(si)[choice];
                *q += cfg.alpha * (r + next - *q);
            }
        }

        if learn {
            let next = if s == goal {
                0.0
            } else {
                let to = abs.region_of(maze, s);
                let best = (0..n)
                    .filter(|&j| j != to || n == 1)
                    .map(|j| pol.commander[to][j])
                    .fold(f64::NEG_INFINITY, f64::max);
                cfg.gamma.powi(tau as i32) * best
            };
            let q = &mut pol.commander[from][target];
            *q += cfg.alpha * (reward + next - *q);
            stats.record(from, span_start, target, success);
        }
        spans.push(Span {
            from,
            start: span_start,
            target,
            success,
            steps: tau,
        });
    }

    EpisodeTrace {
        success: s == goal,
        path,
        spans,
        visited,
    }
}

/// Axis cut of `rect` maximizing the number of labelled cells on their
/// majority side: high-rate cells on one side and low-rate cells on the
/// other. Returns `(dim, threshold, score)`; both parts must keep a cell of
/// `cells`. Ties go to the first dimension, then the lowest threshold.
pub fn best_cut(rect: Rect, cells: &[Cell], labelled: &[(Cell, bool)]) -> Option<(usize, usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    for dim in 0..2 {
        for threshold in rect.lo(dim) + 1..=rect.hi(dim) {
            let below = |c: &Cell| c.coord(dim) < threshold;
            if cells.iter().all(below) || !cells.iter().any(below) {
                continue;
            }
            let mut split = [[0usize; 2]; 2];
            for (c, high) in labelled {
                split[usize::from(below(c))][usize::from(*high)] += 1;
            }
            // Either high cells below and low cells above, or the reverse.
            let score = (split[1][1] + split[0][0]).max(split[1][0] + split[0][1]);
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((dim, threshold, score));
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    pub parent: usize,
    pub new: usize,
    pub dim: usize,
    pub threshold: usize,
    /// Commanded region whose reachability disagreed inside the parent.
    pub target: usize,
}

/// Cells of `region` with enough attempts toward some target, labelled high
/// (`true`) or low (`false`), for the target with mixed evidence and the most
/// labelled cells.
pub fn mixed_evidence(
    abs: &Abstraction,
    stats: &ReachabilityStats,
    region: usize,
    cfg: &StarConfig,
) -> Option<(usize, Vec<(Cell, bool)>)> {
    let mut per_target: std::collections::BTreeMap<usize, Vec<(Cell, bool)>> = Default::default();
    for &c in abs.cells(region) {
        for (target, tally) in stats.cell_targets(c) {
            if tally.attempts < cfg.min_attempts {
                continue;
            }
            let rate = tally.rate().unwrap();
            if rate >= cfg.high_rate {
                per_target.entry(target).or_default().push((c, true));
            } else if rate <= cfg.low_rate {
                per_target.entry(target).or_default().push((c, false));
            }
        }
    }
    let mut best: Option<(usize, Vec<(Cell, bool)>)> = None;
    for (target, labelled) in per_target {
        let mixed = labelled.iter().any(|l| l.1) && labelled.iter().any(|l| !l.1);
        if mixed && best.as_ref().is_none_or(|(_, b)| labelled.len() > b.len()) {
            best = Some((target, labelled));
        }
    }
    best
}

/// Splits every visited region whose start cells disagree on reaching a
/// common target. Returns the splits performed.
pub fn refine(
    maze: &GridMaze,
    abs: &mut Abstraction,
    pol: &mut FeudalPolicies,
    stats: &mut ReachabilityStats,
    visited: &[usize],
    cfg: &StarConfig,
) -> Vec<Split> {
    let mut out = Vec::new();
    for &region in visited {
        if abs.area(region) < 2 {
            continue;
        }
        let Some((target, labelled)) = mixed_evidence(abs, stats, region, cfg) else {
            continue;
        };
        let Some((dim, threshold, _)) = best_cut(abs.rect(region), abs.cells(region), &labelled) else {
            continue;
        };
        let cells = abs.cells(region).to_vec();
        let new = abs
            .split(maze, region, dim, threshold)
            .expect("best_cut keeps cells on both sides");
        pol.on_split(maze, abs, region, new);
        stats.reset_region(region, &cells);
        out.push(Split {
            parent: region,
            new,
            dim,
            threshold,
            target,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_must_nest() {
        let mut c = StarConfig::default();
        c.validate().unwrap();
        c.tutor_span = 20;
        assert!(c.validate().is_err());
        c.tutor_span = 1;
        c.commander_span = 5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn epsilon_schedule() {
        let c = StarConfig::default();
        assert_eq!(c.epsilon(0), 0.3);
        assert!((c.epsilon(2999) - 0.05).abs() < 1e-12);
        assert!((c.epsilon(5000) - 0.05).abs() < 1e-12);
        assert!(c.epsilon(1500) < 0.3 && c.epsilon(1500) > 0.05);
    }

    #[test]
    fn split_copies_commander_values() {
        let m = GridMaze::default_maze();
        let mut abs = Abstraction::tiled(&m, 3).unwrap();
        let mut pol = FeudalPolicies::new(&m, &abs);
        for i in 0..abs.len() {
            for j in 0..abs.len() {
                pol.commander[i][j] = (i * 10 + j) as f64;
            }
        }
        let r = abs.region_of(&m, m.start());
        let new = abs.split(&m, r, 0, 2).unwrap();
        pol.on_split(&m, &abs, r, new);
        assert_eq!(pol.commander[new][3], pol.commander[r][3]);
        assert_eq!(pol.commander[3][new], pol.commander[3][r]);
        assert_eq!(pol.commander[new][new], pol.commander[r][r]);
        assert_eq!(pol.tutor.len(), abs.len());
    }

    #[test]
    fn cut_separates_halves() {
        let rect = Rect::new(0, 0, 3, 0);
        let cells: Vec<Cell> = (0..4).map(|x| Cell::new(x, 0)).collect();
        let labelled: Vec<(Cell, bool)> = cells.iter().map(|&c| (c, c.x < 2)).collect();
        assert_eq!(best_cut(rect, &cells, &labelled), Some((0, 2, 4)));
    }
}
