//! Competence, learning progress and the interest map that drives the choice
//! of strategy, task and goal.
//!
//! Each outcome space is partitioned into axis-aligned boxes (in normalized
//! coordinates). Every box keeps, per strategy, the history of goals attempted
//! in it together with the competence obtained. The interest of a
//! (box, strategy) pair is the strategy's cost factor times the absolute change
//! of mean competence over a sliding window. A box holding too many entries is
//! split at the axis-median cut that best separates high-interest from
//! low-interest goals.

use rand::Rng;

use crate::error::{Error, Result};
use crate::types::{Outcome, SpaceId, StrategyId, TaskHierarchy};

#[derive(Debug, Clone, PartialEq)]
pub struct MotivationConfig {
    /// Entries a region may hold before it is split.
    pub max_entries: usize,
    /// Sliding window of the progress estimate.
    pub window: usize,
    /// Progress reported for histories shorter than two entries.
    pub initial_progress: f64,
    pub p_random: f64,
    pub p_proportional: f64,
    pub p_greedy: f64,
    /// Added to every interest in proportional sampling.
    pub interest_floor: f64,
}

impl Default for MotivationConfig {
    fn default() -> Self {
        Self {
            max_entries: 40,
            window: 12,
            initial_progress: 0.1,
            p_random: 0.10,
            p_proportional: 0.70,
            p_greedy: 0.20,
            interest_floor: 1e-6,
        }
    }
}

impl MotivationConfig {
    pub fn validate(&self) -> Result<()> {
        let p = [self.p_random, self.p_proportional, self.p_greedy];
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidConfig(
                "selection mode probabilities must be in [0, 1] and sum to 1".into(),
            ));
        }
        if self.window < 2 {
            return Err(Error::InvalidConfig("progress window must be at least 2".into()));
        }
        if self.max_entries < 2 {
            return Err(Error::InvalidConfig("region capacity must be at least 2".into()));
        }
        if !(self.initial_progress >= 0.0) || !(self.interest_floor >= 0.0) {
            return Err(Error::InvalidConfig(
                "initial progress and interest floor must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Competence of an unreached goal in a `dim`-dimensional space: minus the
/// diagonal of the unit hypercube.
pub fn competence_floor(dim: usize) -> f64 {
    -(dim as f64).sqrt()
}

/// Negative Euclidean distance between goal and reached outcome, or the floor
/// when the goal's space was not elicited.
pub fn competence(goal: &Outcome, reached: Option<&Outcome>) -> Result<f64> {
    match reached {
        None => Ok(competence_floor(goal.dim())),
        Some(r) => {
            if r.dim() != goal.dim() {
                return Err(Error::DimensionMismatch {
                    expected: goal.dim(),
                    got: r.dim(),
                });
            }
            Ok(-goal.distance(r))
        }
    }
}

/// Absolute difference between the mean of the newest half and the mean of
/// the oldest half of the last `window` competences.
pub fn progress(competences: &[f64], window: usize, initial: f64) -> f64 {
    if competences.len() < 2 {
        return initial;
    }
    let recent = &competences[competences.len().saturating_sub(window)..];
    let old = recent.len() / 2;
    // offsets from a common reference keep a constant window at exactly zero
    let r = recent[0];
    let mean = |xs: &[f64]| xs.iter().map(|x| x - r).sum::<f64>() / xs.len() as f64;
    (mean(&recent[old..]) - mean(&recent[..old])).abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub iteration: usize,
    pub goal: Vec<f64>,
    pub competence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    /// Creation index, unique within a map.
    pub id: usize,
    pub space: SpaceId,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Per-strategy histories, ordered by iteration.
    pub histories: Vec<Vec<Entry>>,
}

impl Region {
    fn root(id: usize, space: SpaceId, dim: usize, strategies: usize) -> Self {
        Self {
            id,
            space,
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
            histories: vec![Vec::new(); strategies],
        }
    }

    /// Half-open box membership, closed on the upper face of the unit cube.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&lo, &hi))| v >= lo && (v < hi || (hi >= 1.0 && v <= hi)))
    }

    pub fn total_entries(&self) -> usize {
        self.histories.iter().map(Vec::len).sum()
    }

    pub fn progress(&self, strategy: StrategyId, config: &MotivationConfig) -> f64 {
        progress_of(&self.histories[strategy.0], config)
    }

    /// Cost-weighted progress.
    pub fn interest(&self, strategy: StrategyId, cost: f64, config: &MotivationConfig) -> f64 {
        cost * self.progress(strategy, config)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&lo, &hi)| lo + rng.random::<f64>() * (hi - lo))
            .collect()
    }
}

fn progress_of(history: &[Entry], config: &MotivationConfig) -> f64 {
    let comps: Vec<f64> = history
        .iter()
        .rev()
        .take(config.window)
        .rev()
        .map(|e| e.competence)
        .collect();
    progress(&comps, config.window, config.initial_progress)
}

/// Axis-median cut of a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub dim: usize,
    pub threshold: f64,
    pub score: f64,
}

/// Sum over the strategies present in `histories` of their interest.
fn side_interest(histories: &[Vec<Entry>], present: &[bool], costs: &[f64], config: &MotivationConfig) -> f64 {
    histories
        .iter()
        .enumerate()
        .filter(|(s, _)| present[*s])
        .map(|(s, h)| costs[s] * progress_of(h, config))
        .sum()
}

fn partition(histories: &[Vec<Entry>], dim: usize, threshold: f64) -> (Vec<Vec<Entry>>, Vec<Vec<Entry>>) {
    let mut left = vec![Vec::new(); histories.len()];
    let mut right = vec![Vec::new(); histories.len()];
    for (s, h) in histories.iter().enumerate() {
        for e in h {
            if e.goal[dim] < threshold {
                left[s].push(e.clone());
            } else {
                right[s].push(e.clone());
            }
        }
    }
    (left, right)
}

/// Median of the goals' coordinates along `dim`.
pub fn median_threshold(region: &Region, dim: usize) -> f64 {
    let mut xs: Vec<f64> = region
        .histories
        .iter()
        .flatten()
        .map(|e| e.goal[dim])
        .collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    (xs[(n - 1) / 2] + xs[n / 2]) / 2.0
}

/// The axis-median cut maximizing `|I_left - I_right| * min(n_left, n_right) / n`,
/// or `None` when every median cut leaves a side empty.
pub fn best_cut(region: &Region, costs: &[f64], config: &MotivationConfig) -> Option<Cut> {
    let n = region.total_entries();
    if n < 2 {
        return None;
    }
    let present: Vec<bool> = region.histories.iter().map(|h| !h.is_empty()).collect();
    let mut best: Option<Cut> = None;
    for dim in 0..region.lo.len() {
        let threshold = median_threshold(region, dim);
        if !(threshold > region.lo[dim] && threshold < region.hi[dim]) {
            continue;
        }
        let (left, right) = partition(&region.histories, dim, threshold);
        let nl: usize = left.iter().map(Vec::len).sum();
        let nr = n - nl;
        if nl == 0 || nr == 0 {
            continue;
        }
        let il = side_interest(&left, &present, costs, config);
        let ir = side_interest(&right, &present, costs, config);
        let score = (il - ir).abs() * nl.min(nr) as f64 / n as f64;
        if best.is_none_or(|b| score > b.score) {
            best = Some(Cut {
                dim,
                threshold,
                score,
            });
        }
    }
    best
}

/// Leaf regions of every outcome space.
#[derive(Debug, Clone)]
pub struct InterestMap {
    spaces: Vec<Vec<Region>>,
    next_id: usize,
    strategies: usize,
}

/// Result of [`InterestMap::update_and_split`].
#[derive(Debug, Clone, PartialEq)]
pub struct Update {
    /// Region id that received the entry.
    pub region: usize,
    /// Region ids of the children, when the region was split.
    pub split: Option<(usize, usize)>,
}

impl InterestMap {
    /// One root region covering each space.
    pub fn new(hierarchy: &TaskHierarchy, strategies: usize) -> Self {
        let mut next_id = 0;
        let spaces = hierarchy
            .space_ids()
            .map(|s| {
                let r = Region::root(next_id, s, hierarchy.dim(s).unwrap(), strategies);
                next_id += 1;
                vec![r]
            })
            .collect();
        Self {
            spaces,
            next_id,
            strategies,
        }
    }

    pub fn num_spaces(&self) -> usize {
        self.spaces.len()
    }

    pub fn regions(&self, space: SpaceId) -> &[Region] {
        &self.spaces[space.0]
    }

    pub fn all_regions(&self) -> impl Iterator<Item = &Region> {
        self.spaces.iter().flatten()
    }

    /// Position of the leaf containing `goal` in its space's region list.
    pub fn leaf(&self, space: SpaceId, goal: &[f64]) -> Result<usize> {
        self.spaces
            .get(space.0)
            .ok_or(Error::UnknownSpace(space))?
            .iter()
            .position(|r| r.contains(goal))
            .ok_or(Error::OutOfBounds {
                what: "goal outside every region",
                value: goal.first().copied().unwrap_or(f64::NAN),
            })
    }

    /// Appends the attempt to its leaf's history for `strategy` and splits the
    /// leaf once it holds more than the configured number of entries.
    pub fn update_and_split(
        &mut self,
        strategy: StrategyId,
        goal: &Outcome,
        iteration: usize,
        competence: f64,
        costs: &[f64],
        config: &MotivationConfig,
    ) -> Result<Update> {
        if strategy.0 >= self.strategies {
            return Err(Error::InvalidConfig(format!("unknown strategy {}", strategy.0)));
        }
        let at = self.leaf(goal.space, &goal.values)?;
        let regions = &mut self.spaces[goal.space.0];
        regions[at].histories[strategy.0].push(Entry {
            iteration,
            goal: goal.values.clone(),
            competence,
        });
        let id = regions[at].id;
        if regions[at].total_entries() <= config.max_entries {
            return Ok(Update {
                region: id,
                split: None,
            });
        }
        let Some(cut) = best_cut(&regions[at], costs, config) else {
            return Ok(Update {
                region: id,
                split: None,
            });
        };
        let parent = regions.remove(at);
        let (lh, rh) = partition(&parent.histories, cut.dim, cut.threshold);
        let mut left = Region {
            id: self.next_id,
            space: parent.space,
            lo: parent.lo.clone(),
            hi: parent.hi.clone(),
            histories: lh,
        };
        left.hi[cut.dim] = cut.threshold;
        let mut right = Region {
            id: self.next_id + 1,
            space: parent.space,
            lo: parent.lo,
            hi: parent.hi,
            histories: rh,
        };
        right.lo[cut.dim] = cut.threshold;
        self.next_id += 2;
        let ids = (left.id, right.id);
        regions.insert(at, right);
        regions.insert(at, left);
        Ok(Update {
            region: id,
            split: Some(ids),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    Random,
    Proportional,
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub strategy: StrategyId,
    pub goal: Outcome,
    pub mode: SelectionMode,
    /// Id of the region the goal was drawn from (root region in random mode).
    pub region: usize,
}

/// Picks a strategy, an outcome space and a goal.
///
/// `available[s]` lists the strategies usable for space `s`; spaces with no
/// strategy are never chosen. `costs[σ]` is the cost factor of strategy `σ`.
pub fn select<R: Rng + ?Sized>(
    map: &InterestMap,
    available: &[Vec<StrategyId>],
    costs: &[f64],
    config: &MotivationConfig,
    rng: &mut R,
) -> Result<Selection> {
    let u: f64 = rng.random();
    if u < config.p_random {
        select_random(map, available, rng)
    } else if u < config.p_random + config.p_proportional {
        select_proportional(map, available, costs, config, rng)
    } else {
        select_greedy(map, available, costs, config, rng)
    }
}

fn no_strategy() -> Error {
    Error::InvalidConfig("no strategy available for any outcome space".into())
}

/// Uniform strategy, then a uniform space among those it serves, then a
/// uniform goal in that space.
pub fn select_random<R: Rng + ?Sized>(
    map: &InterestMap,
    available: &[Vec<StrategyId>],
    rng: &mut R,
) -> Result<Selection> {
    let mut strategies: Vec<StrategyId> = available.iter().flatten().copied().collect();
    strategies.sort();
    strategies.dedup();
    if strategies.is_empty() {
        return Err(no_strategy());
    }
    let strategy = strategies[rng.random_range(0..strategies.len())];
    let spaces: Vec<usize> = (0..available.len())
        .filter(|&s| available[s].contains(&strategy))
        .collect();
    let space = SpaceId(spaces[rng.random_range(0..spaces.len())]);
    let dim = map.regions(space)[0].lo.len();
    let values: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let region = map.regions(space)[map.leaf(space, &values)?].id;
    Ok(Selection {
        strategy,
        goal: Outcome::new(space, values),
        mode: SelectionMode::Random,
        region,
    })
}

/// (region, strategy) drawn with probability proportional to interest plus
/// the configured floor; goal uniform in the region.
pub fn select_proportional<R: Rng + ?Sized>(
    map: &InterestMap,
    available: &[Vec<StrategyId>],
    costs: &[f64],
    config: &MotivationConfig,
    rng: &mut R,
) -> Result<Selection> {
    let mut pairs: Vec<(&Region, StrategyId, f64)> = Vec::new();
    for (s, strategies) in available.iter().enumerate() {
        for region in map.regions(SpaceId(s)) {
            for &st in strategies {
                let w = region.interest(st, costs[st.0], config) + config.interest_floor;
                pairs.push((region, st, w));
            }
        }
    }
    if pairs.is_empty() {
        return Err(no_strategy());
    }
    let total: f64 = pairs.iter().map(|p| p.2).sum();
    let mut x = rng.random::<f64>() * total;
    let mut chosen = pairs.len() - 1;
    for (i, p) in pairs.iter().enumerate() {
        if x < p.2 {
            chosen = i;
            break;
        }
        x -= p.2;
    }
    let (region, strategy, _) = pairs[chosen];
    Ok(Selection {
        strategy,
        goal: Outcome::new(region.space, region.sample(rng)),
        mode: SelectionMode::Proportional,
        region: region.id,
    })
}

/// Interest of a region: the best interest over its available strategies.
pub fn region_interest(
    region: &Region,
    strategies: &[StrategyId],
    costs: &[f64],
    config: &MotivationConfig,
) -> f64 {
    strategies
        .iter()
        .map(|s| region.interest(*s, costs[s.0], config))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Region of maximal interest (lowest creation id on ties), uniform strategy.
pub fn select_greedy<R: Rng + ?Sized>(
    map: &InterestMap,
    available: &[Vec<StrategyId>],
    costs: &[f64],
    config: &MotivationConfig,
    rng: &mut R,
) -> Result<Selection> {
    let region = greedy_region(map, available, costs, config).ok_or_else(no_strategy)?;
    let strategies = &available[region.space.0];
    let strategy = strategies[rng.random_range(0..strategies.len())];
    Ok(Selection {
        strategy,
        goal: Outcome::new(region.space, region.sample(rng)),
        mode: SelectionMode::Greedy,
        region: region.id,
    })
}

pub fn greedy_region<'m>(
    map: &'m InterestMap,
    available: &[Vec<StrategyId>],
    costs: &[f64],
    config: &MotivationConfig,
) -> Option<&'m Region> {
    let mut best: Option<(&Region, f64)> = None;
    for (s, strategies) in available.iter().enumerate() {
        if strategies.is_empty() {
            continue;
        }
        for region in map.regions(SpaceId(s)) {
            let i = region_interest(region, strategies, costs, config);
            let better = match best {
                None => true,
                Some((b, bi)) => i > bi || (i == bi && region.id < b.id),
            };
            if better {
                best = Some((region, i));
            }
        }
    }
    best.map(|(r, _)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Component, SpaceSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hierarchy(dims: &[usize]) -> TaskHierarchy {
        TaskHierarchy::new(
            2,
            dims.iter()
                .enumerate()
                .map(|(i, &d)| SpaceSpec::new(format!("s{i}"), vec![0.0; d], vec![1.0; d]))
                .collect(),
            dims.iter().map(|_| vec![Component::Actions]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn competence_examples() {
        let g = Outcome::new(SpaceId(0), vec![0.0, 0.0]);
        assert_eq!(competence(&g, Some(&g)).unwrap(), 0.0);
        let r = Outcome::new(SpaceId(0), vec![0.3, 0.4]);
        assert!((competence(&g, Some(&r)).unwrap() + 0.5).abs() < 1e-12);
        let g4 = Outcome::new(SpaceId(2), vec![0.5; 4]);
        assert_eq!(competence(&g4, None).unwrap(), -2.0);
        assert!(competence(&g4, Some(&r)).is_err());
    }

    #[test]
    fn progress_examples() {
        assert_eq!(progress(&[-1.0; 4], 12, 0.1), 0.0);
        assert_eq!(progress(&[-1.0, -1.0, -0.5, -0.5], 12, 0.1), 0.5);
        assert_eq!(progress(&[], 12, 0.1), 0.1);
        assert_eq!(progress(&[-0.3], 12, 0.1), 0.1);
        // only the last 12 entries count
        let mut h = vec![-5.0; 10];
        h.extend([-1.0; 12]);
        assert_eq!(progress(&h, 12, 0.1), 0.0);
    }

    #[test]
    fn interest_examples() {
        let cfg = MotivationConfig::default();
        let mut r = Region::root(0, SpaceId(0), 2, 1);
        assert!((r.interest(StrategyId(0), 0.7, &cfg) - 0.07).abs() < 1e-12);
        for (i, c) in [-1.0, -1.0, -0.5, -0.5].into_iter().enumerate() {
            r.histories[0].push(Entry {
                iteration: i,
                goal: vec![0.5, 0.5],
                competence: c,
            });
        }
        assert!((r.interest(StrategyId(0), 1.0, &cfg) - 0.5).abs() < 1e-12);
        assert!((r.interest(StrategyId(0), 0.7, &cfg) - 0.35).abs() < 1e-12);
    }

    #[test]
    fn split_threshold_semantics() {
        let h = hierarchy(&[2]);
        let cfg = MotivationConfig::default();
        let mut map = InterestMap::new(&h, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..40 {
            let g = Outcome::new(SpaceId(0), vec![rng.random(), rng.random()]);
            let u = map
                .update_and_split(StrategyId(0), &g, i, -rng.random::<f64>(), &[1.0], &cfg)
                .unwrap();
            assert!(u.split.is_none());
        }
        assert_eq!(map.regions(SpaceId(0)).len(), 1);
        let g = Outcome::new(SpaceId(0), vec![0.3, 0.6]);
        let u = map
            .update_and_split(StrategyId(0), &g, 40, -0.2, &[1.0], &cfg)
            .unwrap();
        assert!(u.split.is_some());
        let leaves = map.regions(SpaceId(0));
        assert_eq!(leaves.len(), 2);
        assert_eq!(leaves[0].total_entries() + leaves[1].total_entries(), 41);
        assert!((leaves[0].volume() + leaves[1].volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn selector_never_leaves_region() {
        let h = hierarchy(&[2]);
        let cfg = MotivationConfig::default();
        let map = InterestMap::new(&h, 2);
        let avail = vec![vec![StrategyId(0), StrategyId(1)]];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let s = select(&map, &avail, &[1.0, 0.7], &cfg, &mut rng).unwrap();
            assert!(map.regions(SpaceId(0))[0].contains(&s.goal.values));
        }
    }

    #[test]
    fn greedy_ties_prefer_older_region() {
        let h = hierarchy(&[1, 1]);
        let cfg = MotivationConfig::default();
        let map = InterestMap::new(&h, 1);
        let avail = vec![vec![StrategyId(0)], vec![StrategyId(0)]];
        let r = greedy_region(&map, &avail, &[1.0], &cfg).unwrap();
        assert_eq!(r.id, 0);
    }

    #[test]
    fn invalid_mode_probabilities() {
        let cfg = MotivationConfig {
            p_random: 0.5,
            ..MotivationConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(MotivationConfig::default().validate().is_ok());
    }
}
