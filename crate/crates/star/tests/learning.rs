use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sgim_star::{
    estimate_reachability, run_episode, Abstraction, Cell, EpisodeTrace, FeudalPolicies, FlatLearner, GridMaze, Rect,
    ReachabilityStats, StarConfig, StarLearner,
};

fn start_learner(seed: u64, config: StarConfig) -> StarLearner {
    let m = GridMaze::default_maze();
    let mut abs = Abstraction::tiled(&m, 3).unwrap();
    abs.isolate(&m, m.goal()).unwrap();
    StarLearner::new(m, abs, config, seed).unwrap()
}

#[test]
fn nested_spans_are_required() {
    let m = GridMaze::default_maze();
    let abs = Abstraction::tiled(&m, 3).unwrap();
    for (k, l) in [(5, 5), (5, 1), (3, 4), (1, 1)] {
        let config = StarConfig { commander_span: k, tutor_span: l, ..StarConfig::default() };
        assert!(StarLearner::new(m.clone(), abs.clone(), config, 0).is_err());
    }
    let config = StarConfig { commander_span: 3, tutor_span: 2, ..StarConfig::default() };
    assert!(StarLearner::new(m, abs, config, 0).is_ok());
}

#[test]
fn reachability_examples() {
    let mut s = ReachabilityStats::new();
    for _ in 0..5 {
        s.record(0, Cell::new(1, 1), 1, false);
        s.record(1, Cell::new(2, 1), 0, true);
    }
    assert_eq!(estimate_reachability(&s, 0, 1), Some(0.0));
    assert_eq!(estimate_reachability(&s, 1, 0), Some(1.0));
    assert_eq!(estimate_reachability(&s, 0, 2), None);
}

#[test]
fn adjacent_goal_is_learned_with_one_region() {
    let m = GridMaze::parse("######\n#SG..#\n#....#\n######\n", 200).unwrap();
    let abs = Abstraction::new(&m, vec![Rect::new(1, 1, 4, 2)]).unwrap();
    let config = StarConfig { epsilon_episodes: 200, epsilon_end: 0.0, ..StarConfig::default() };
    let mut flat = FlatLearner::new(m.clone(), config.clone(), 4).unwrap();
    let mut l = StarLearner::new(m, abs, config, 4).unwrap();
    let mut late = 0;
    let mut flat_late = 0;
    for e in 0..300 {
        let (record, _, splits) = l.train_episode();
        assert!(splits.is_empty());
        let f = flat.train_episode();
        if e >= 200 {
            late += usize::from(record.success);
            flat_late += usize::from(f.success);
        }
    }
    assert_eq!(flat_late, 100);
    assert_eq!(late, flat_late);
    for seed in 0..5 {
        let trace = l.greedy_episode(seed);
        assert!(trace.success);
        assert!(trace.steps() < l.maze().horizon());
    }
}

/// Tallies recomputed from raw spans.
fn replay(traces: &[EpisodeTrace]) -> (BTreeMap<(usize, usize), (u32, u32)>, BTreeMap<(Cell, usize), (u32, u32)>) {
    let mut pairs = BTreeMap::new();
    let mut cells = BTreeMap::new();
    for t in traces {
        for s in &t.spans {
            let p: &mut (u32, u32) = pairs.entry((s.from, s.target)).or_default();
            p.0 += 1;
            p.1 += u32::from(s.success);
            let c: &mut (u32, u32) = cells.entry((s.start, s.target)).or_default();
            c.0 += 1;
            c.1 += u32::from(s.success);
        }
    }
    (pairs, cells)
}

#[test]
fn reachability_matches_trace_replay() {
    let config = StarConfig { refine: false, ..StarConfig::default() };
    let mut l = start_learner(21, config);
    let mut traces = Vec::new();
    for _ in 0..150 {
        traces.push(l.train_episode().1);
    }
    let (pairs, cells) = replay(&traces);
    assert!(!pairs.is_empty());
    for (&(from, target), &(attempts, successes)) in &pairs {
        let t = l.stats().pair(from, target);
        assert_eq!((t.attempts, t.successes), (attempts, successes));
        assert_eq!(estimate_reachability(l.stats(), from, target), Some(successes as f64 / attempts as f64));
    }
    for (&(start, target), &(attempts, successes)) in &cells {
        let t = l.stats().cell(start, target);
        assert_eq!((t.attempts, t.successes), (attempts, successes));
    }
    let n = l.abstraction().len();
    for from in 0..n {
        for target in 0..n {
            if !pairs.contains_key(&(from, target)) {
                assert_eq!(estimate_reachability(l.stats(), from, target), None);
            }
        }
    }
}

#[test]
fn spans_succeed_exactly_when_the_target_is_entered() {
    let mut l = start_learner(5, StarConfig { refine: false, ..StarConfig::default() });
    for _ in 0..100 {
        let (record, trace, _) = l.train_episode();
        assert_eq!(record.steps, trace.steps());
        let maze = l.maze();
        let abs = l.abstraction();
        let mut at = 0;
        for s in &trace.spans {
            assert_eq!(trace.path[at], s.start);
            assert!(s.steps >= 1 && s.steps <= l.config().commander_span);
            let entered = trace.path[at + 1..=at + s.steps].iter().any(|&c| {
                if s.target == s.from {
                    c == maze.goal()
                } else {
                    abs.region_of(maze, c) == s.target
                }
            });
            assert_eq!(s.success, entered);
            at += s.steps;
        }
        assert_eq!(at, trace.steps());
        assert_eq!(trace.success, *trace.path.last().unwrap() == maze.goal());
        assert!(trace.steps() <= maze.horizon());
    }
}

#[test]
fn refinement_only_grows_and_keeps_the_partition() {
    for seed in 0..3 {
        let mut l = start_learner(seed, StarConfig::default());
        let mut regions = l.abstraction().len();
        for _ in 0..600 {
            let (record, trace, splits) = l.train_episode();
            assert!(record.regions >= regions);
            assert_eq!(record.regions, regions + splits.len());
            assert!(splits.len() <= trace.visited.len());
            for s in &splits {
                assert!(trace.visited.contains(&s.parent));
            }
            l.abstraction().validate(l.maze()).unwrap();
            regions = record.regions;
        }
    }
}

#[test]
fn commander_return_is_zero_at_the_goal() {
    let m = GridMaze::default_maze();
    assert_eq!(m.normalized_goal_distance(m.goal()), 0.0);
    // an episode starting on the goal makes no decision and learns nothing
    let walls = (0..15).map(|i| !(6..=8).contains(&i)).collect();
    let m = GridMaze::new(5, 3, walls, Cell::new(1, 1), Cell::new(1, 1), 10).unwrap();
    let abs = Abstraction::tiled(&m, 5).unwrap();
    let mut pol = FeudalPolicies::new(&m, &abs);
    let before = pol.clone();
    let mut stats = ReachabilityStats::new();
    let trace = run_episode(&m, &abs, &mut pol, &mut stats, &StarConfig::default(), 0.3, true, &mut ChaCha8Rng::seed_from_u64(0));
    assert!(trace.success);
    assert_eq!(trace.steps(), 0);
    assert_eq!(pol, before);
}

#[test]
fn training_is_deterministic() {
    let mut a = start_learner(9, StarConfig::default());
    let mut b = start_learner(9, StarConfig::default());
    for _ in 0..200 {
        assert_eq!(a.train_episode(), b.train_episode());
    }
    assert_eq!(a.abstraction(), b.abstraction());
    assert_eq!(a.greedy_episode(3), b.greedy_episode(3));
}
