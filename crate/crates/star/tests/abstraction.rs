use proptest::prelude::*;

use sgim_star::feudal::best_cut;
use sgim_star::{refine, Abstraction, Cell, FeudalPolicies, GridMaze, Rect, ReachabilityStats, StarConfig};

const ROOM: &str = "\
##########
#S.......#
#........#
#.......G#
##########
";

fn room() -> GridMaze {
    GridMaze::parse(ROOM, 100).unwrap()
}

fn check_partition(maze: &GridMaze, abs: &Abstraction) {
    abs.validate(maze).unwrap();
    let mut seen = vec![0usize; maze.num_free()];
    for r in 0..abs.len() {
        assert!(abs.area(r) > 0);
        for &c in abs.cells(r) {
            assert!(abs.rect(r).contains(c));
            assert_eq!(abs.region_of(maze, c), r);
            seen[maze.index(c).unwrap()] += 1;
        }
    }
    assert!(seen.iter().all(|&n| n == 1));
    for (i, a) in abs.regions().iter().enumerate() {
        for b in &abs.regions()[i + 1..] {
            let disjoint = a.x1 < b.x0 || b.x1 < a.x0 || a.y1 < b.y0 || b.y1 < a.y0;
            assert!(disjoint);
        }
    }
}

/// Score of every admissible cut, by enumeration.
fn cut_scores(rect: Rect, cells: &[Cell], labelled: &[(Cell, bool)]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let (lo, hi) = ([rect.x0, rect.y0], [rect.x1, rect.y1]);
    for dim in 0..2 {
        for t in lo[dim] + 1..=hi[dim] {
            let coord = |c: &Cell| if dim == 0 { c.x } else { c.y };
            let below = cells.iter().filter(|c| coord(c) < t).count();
            if below == 0 || below == cells.len() {
                continue;
            }
            let agree_a = labelled.iter().filter(|(c, h)| (coord(c) < t) == *h).count();
            let agree_b = labelled.len() - agree_a;
            out.push((dim, t, agree_a.max(agree_b)));
        }
    }
    out
}

#[test]
fn default_maze_layout() {
    let m = GridMaze::default_maze();
    assert_eq!((m.width(), m.height()), (9, 9));
    assert_eq!(m.start(), Cell::new(1, 6));
    assert_eq!(m.goal(), Cell::new(1, 1));
    assert_eq!(m.shortest_path(), 15);
    assert_eq!(m.normalized_goal_distance(m.goal()), 0.0);
    assert!(m.normalized_goal_distance(m.start()) > 0.0);
    let mut abs = Abstraction::tiled(&m, 3).unwrap();
    abs.isolate(&m, m.goal()).unwrap();
    check_partition(&m, &abs);
}

#[test]
fn malformed_mazes_are_rejected() {
    assert!(matches!(GridMaze::parse("#####\n#S.x#\n#..G#\n#####\n", 10), Err(sgim_star::Error::Maze { line: 2, .. })));
    assert!(GridMaze::parse("#####\n#S#G#\n#####\n", 10).is_err());
    assert!(GridMaze::parse("#####\n#S..#\n#####\n", 10).is_err());
}

#[test]
fn left_reaching_right_failing_is_cut_at_the_boundary() {
    let m = room();
    let mut abs = Abstraction::new(&m, vec![Rect::new(1, 1, 6, 3), Rect::new(7, 1, 8, 3)]).unwrap();
    let mut pol = FeudalPolicies::new(&m, &abs);
    let mut stats = ReachabilityStats::new();
    for &c in abs.cells(0) {
        for _ in 0..5 {
            stats.record(0, c, 1, c.x < 4);
        }
    }
    let splits = refine(&m, &mut abs, &mut pol, &mut stats, &[0], &StarConfig::default());
    assert_eq!(splits.len(), 1);
    let s = splits[0];
    assert_eq!((s.parent, s.new, s.dim, s.threshold, s.target), (0, 2, 0, 4, 1));
    assert_eq!(abs.rect(0), Rect::new(1, 1, 3, 3));
    assert_eq!(abs.rect(2), Rect::new(4, 1, 6, 3));
    check_partition(&m, &abs);
    // tallies of the split region are forgotten
    assert_eq!(stats.pair(0, 1).attempts, 0);
    assert_eq!(stats.cell(Cell::new(1, 1), 1).attempts, 0);
    assert_eq!(pol.commander_row(2), pol.commander_row(0));
}

#[test]
fn uniform_rates_do_not_split() {
    let m = room();
    let mut abs = Abstraction::new(&m, vec![Rect::new(1, 1, 6, 3), Rect::new(7, 1, 8, 3)]).unwrap();
    let mut pol = FeudalPolicies::new(&m, &abs);
    let mut stats = ReachabilityStats::new();
    for &c in abs.cells(0) {
        for k in 0..5 {
            stats.record(0, c, 1, k != 0);
        }
    }
    assert!(refine(&m, &mut abs, &mut pol, &mut stats, &[0], &StarConfig::default()).is_empty());
    // too few attempts is no evidence either
    let mut stats = ReachabilityStats::new();
    for &c in abs.cells(0) {
        for _ in 0..4 {
            stats.record(0, c, 1, c.x < 4);
        }
    }
    assert!(refine(&m, &mut abs, &mut pol, &mut stats, &[0], &StarConfig::default()).is_empty());
    assert_eq!(abs.len(), 2);
}

#[test]
fn single_cells_are_never_split() {
    let m = GridMaze::parse("#####\n#S.G#\n#####\n", 10).unwrap();
    let mut abs = Abstraction::tiled(&m, 1).unwrap();
    let mut pol = FeudalPolicies::new(&m, &abs);
    let mut stats = ReachabilityStats::new();
    for _ in 0..5 {
        stats.record(0, Cell::new(1, 1), 2, true);
    }
    assert!(refine(&m, &mut abs, &mut pol, &mut stats, &[0, 1, 2], &StarConfig::default()).is_empty());
}

fn rect_and_labels() -> impl Strategy<Value = (Rect, Vec<(Cell, bool)>)> {
    (1usize..7, 1usize..4, 0usize..5, 0usize..5).prop_flat_map(|(w, h, x0, y0)| {
        let rect = Rect::new(x0, y0, x0 + w - 1, y0 + h - 1);
        let cells: Vec<Cell> = (y0..y0 + h).flat_map(|y| (x0..x0 + w).map(move |x| Cell::new(x, y))).collect();
        let n = cells.len();
        (Just(rect), prop::collection::vec(prop::option::of(any::<bool>()), n)).prop_map(move |(rect, labels)| {
            let labelled = cells.iter().zip(labels).filter_map(|(&c, l)| l.map(|h| (c, h))).collect();
            (rect, labelled)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn best_cut_matches_enumeration((rect, labelled) in rect_and_labels()) {
        let cells: Vec<Cell> = (rect.y0..=rect.y1).flat_map(|y| (rect.x0..=rect.x1).map(move |x| Cell::new(x, y))).collect();
        let scores = cut_scores(rect, &cells, &labelled);
        let want = scores.iter().copied().fold(None, |best: Option<(usize, usize, usize)>, s| match best {
            Some(b) if b.2 >= s.2 => Some(b),
            _ => Some(s),
        });
        prop_assert_eq!(best_cut(rect, &cells, &labelled), want);
    }

    #[test]
    fn splits_keep_a_partition(block in 1usize..5, cuts in prop::collection::vec((any::<prop::sample::Index>(), 0usize..2, any::<prop::sample::Index>()), 0..30)) {
        let m = GridMaze::default_maze();
        let mut abs = Abstraction::tiled(&m, block).unwrap();
        check_partition(&m, &abs);
        for (r, dim, t) in cuts {
            let region = r.index(abs.len());
            let rect = abs.rect(region);
            let (lo, hi) = if dim == 0 { (rect.x0, rect.x1) } else { (rect.y0, rect.y1) };
            if lo == hi {
                continue;
            }
            let threshold = lo + 1 + t.index(hi - lo);
            let before = abs.len();
            match abs.split(&m, region, dim, threshold) {
                Ok(new) => {
                    prop_assert_eq!(new, before);
                    prop_assert_eq!(abs.len(), before + 1);
                }
                Err(_) => prop_assert_eq!(abs.len(), before),
            }
            check_partition(&m, &abs);
        }
    }
}
