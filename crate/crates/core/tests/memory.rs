mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{act, chain, episode, euclid};
use sgim_core::types::SpaceId;
use sgim_core::Memory;

/// Exhaustive scan: every stored point with its episode, sorted by distance
/// then by insertion.
fn brute_knn(points: &[(usize, Vec<f64>)], q: &[f64], k: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = points.iter().map(|(e, p)| (*e, euclid(p, q))).collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

fn fill(m: &mut Memory, points: &[Vec<f64>]) -> Vec<(usize, Vec<f64>)> {
    points
        .iter()
        .map(|p| {
            let pos = m
                .record(episode(m.len(), vec![act(&[0.0, 0.0])], vec![vec![0.0, 0.0]], vec![Some(p.clone()), None]))
                .unwrap();
            (pos, p.clone())
        })
        .collect()
}

#[test]
fn small_store_examples() {
    let h = chain(2, &[2, 2]);
    let mut m = Memory::new(&h);
    fill(&mut m, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
    let n = m.knn(SpaceId(0), &[0.0, 0.0], 1).unwrap();
    assert_eq!((n[0].episode, n[0].distance), (0, 0.0));
    let n = m.knn(SpaceId(0), &[0.9, 0.0], 2).unwrap();
    assert_eq!(n[0].episode, 1);
    assert!((n[0].distance - 0.1).abs() < 1e-12);
    assert_eq!(n[1].episode, 0);
    assert!((n[1].distance - 0.9).abs() < 1e-12);
}

#[test]
fn two_hundred_points_match_scan() {
    let h = chain(2, &[2, 2]);
    let mut m = Memory::new(&h);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pts: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random(), rng.random()]).collect();
    let stored = fill(&mut m, &pts);
    for _ in 0..50 {
        let q = [rng.random::<f64>(), rng.random::<f64>()];
        let got: Vec<(usize, f64)> = m.knn(SpaceId(0), &q, 7).unwrap().iter().map(|n| (n.episode, n.distance)).collect();
        assert_eq!(got, brute_knn(&stored, &q, 7));
    }
}

#[test]
fn thousand_episodes_keep_insertion_order() {
    let h = chain(2, &[2, 2]);
    let mut m = Memory::new(&h);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut oracle = Vec::new();
    for i in 0..1000 {
        let p = vec![rng.random::<f64>(), rng.random::<f64>()];
        let pen = rng.random_bool(0.5).then(|| vec![rng.random::<f64>(), rng.random::<f64>()]);
        let ep = episode(i, vec![act(&[p[0], -p[1]])], vec![vec![p[0], -p[1]]], vec![Some(p), pen]);
        oracle.push(ep.clone());
        m.record(ep).unwrap();
    }
    assert_eq!(m.len(), 1000);
    assert_eq!(m.episodes(), oracle.as_slice());
    let with_pen = oracle.iter().filter(|e| e.reached[1].is_some()).count();
    assert_eq!(m.count(SpaceId(1)).unwrap(), with_pen);
    assert_eq!(m.count(SpaceId(0)).unwrap(), 1000);
}

#[test]
fn out_of_bounds_reached_outcome_rejected() {
    let h = chain(2, &[2, 2]);
    let mut m = Memory::new(&h);
    let bad = episode(0, vec![act(&[0.0, 0.0])], vec![vec![0.0, 0.0]], vec![Some(vec![1.2, 0.5]), None]);
    assert!(m.record(bad).is_err());
    assert!(m.is_empty());
}

fn store() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, usize)> {
    // coarse grid values produce frequent exact ties
    let coord = prop_oneof![(0u8..=4).prop_map(|v| v as f64 / 4.0), 0.0..=1.0f64];
    (
        prop::collection::vec(prop::collection::vec(coord.clone(), 3), 0..300),
        prop::collection::vec(coord, 3),
        1usize..12,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn knn_equals_exhaustive_scan((points, query, k) in store()) {
        let h = chain(2, &[3]);
        let mut m = Memory::new(&h);
        let mut stored = Vec::new();
        for p in &points {
            let pos = m.record(episode(m.len(), vec![act(&[0.0, 0.0])], vec![vec![0.0, 0.0]], vec![Some(p.clone())])).unwrap();
            stored.push((pos, p.clone()));
        }
        let got: Vec<(usize, f64)> = m.knn(SpaceId(0), &query, k).unwrap().iter().map(|n| (n.episode, n.distance)).collect();
        prop_assert_eq!(got.len(), k.min(points.len()));
        prop_assert_eq!(got, brute_knn(&stored, &query, k));
    }

    #[test]
    fn index_counts_follow_hindsight(reached in prop::collection::vec((any::<bool>(), any::<bool>()), 0..200)) {
        let h = chain(2, &[2, 2]);
        let mut m = Memory::new(&h);
        let mut before: Vec<_> = Vec::new();
        for (i, (a, b)) in reached.iter().enumerate() {
            let r = vec![a.then(|| vec![0.5, 0.5]), b.then(|| vec![0.25, 0.75])];
            m.record(episode(i, vec![act(&[0.1, 0.1])], vec![vec![0.1, 0.1]], r)).unwrap();
            // earlier episodes are never touched
            prop_assert_eq!(&m.episodes()[..before.len()], before.as_slice());
            before = m.episodes().to_vec();
        }
        prop_assert_eq!(m.count(SpaceId(0)).unwrap(), reached.iter().filter(|r| r.0).count());
        prop_assert_eq!(m.count(SpaceId(1)).unwrap(), reached.iter().filter(|r| r.1).count());
    }
}
