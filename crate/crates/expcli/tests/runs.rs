use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sgim_expcli::compare::{compare, compare_dirs, curves, quantile, RunData};
use sgim_expcli::config::ExperimentConfig;
use sgim_expcli::error::ExpError;
use sgim_expcli::runner::{self, build_learner, evaluate};
use sgim_expcli::star_run;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn small(name: &str, seed: u64, budget: usize) -> ExperimentConfig {
    let (mut cfg, _) = ExperimentConfig::load(&configs().join(format!("{name}.toml"))).unwrap();
    cfg.seed = seed;
    cfg.budget = budget;
    cfg.evaluation.cadence = 100;
    cfg
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn same_seed_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small("full", 3, 400);
    runner::run(&cfg, &tmp.path().join("a")).unwrap();
    runner::run(&cfg, &tmp.path().join("b")).unwrap();
    let a = files(&tmp.path().join("a"));
    assert_eq!(a.len(), 6);
    assert_eq!(a, files(&tmp.path().join("b")));
    let other = small("full", 4, 400);
    runner::run(&other, &tmp.path().join("c")).unwrap();
    assert_ne!(a, files(&tmp.path().join("c")));
}

#[test]
fn output_schemas() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small("full", 1, 250);
    runner::run(&cfg, tmp.path()).unwrap();
    let read = |n: &str| fs::read_to_string(tmp.path().join(n)).unwrap();
    let choices = read("choices.csv");
    let mut lines = choices.lines();
    assert_eq!(lines.next(), Some("iteration,strategy,teacher,space,mode,goal,competence"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 250);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 7);
        assert_eq!(r[0].parse::<usize>().unwrap(), i);
        let competence: f64 = r[6].parse().unwrap();
        assert!(competence <= 0.0);
    }
    assert!(read("eval.csv").starts_with("iteration,space,mean_error,goals\n0,omega0,"));
    assert_eq!(read("eval.csv").lines().count(), 1 + 3 * 4);
    assert!(read("histogram.csv").starts_with("strategy,space,count\n"));
    assert!(read("interest.csv").starts_with("iteration,space,region,lo,hi,entries,strategy,interest\n"));
    let bench = read("benchmark.csv");
    assert_eq!(bench.lines().filter(|l| l.starts_with("omega0,")).count(), 25);
    assert_eq!(bench.lines().filter(|l| l.starts_with("omega2,")).count(), 200);
    assert_eq!(read("run.csv"), "key,value\nlabel,full\nseed,1\nbudget,250\n");
}

#[test]
fn without_teachers_nothing_is_imitated() {
    let mut cfg = small("full", 2, 300);
    cfg.ablation.no_teachers = true;
    let record = runner::execute(&cfg).unwrap();
    assert!(record.choices.iter().all(|c| c.teacher.is_none()));
    let setup = cfg.setup().unwrap();
    for (st, row) in record.histogram.iter().enumerate() {
        if setup.strategies[st].kind.is_imitation() {
            assert!(row.iter().all(|&n| n == 0));
        }
    }
    assert_eq!(record.histogram.iter().flatten().sum::<usize>(), 300);
}

#[test]
fn benchmarks_are_shared_across_variants() {
    let a = runner::execute(&small("full", 7, 10)).unwrap();
    let b = runner::execute(&small("no-procedures", 7, 10)).unwrap();
    let c = runner::execute(&small("full", 8, 10)).unwrap();
    assert_eq!(a.benchmark, b.benchmark);
    assert_ne!(a.benchmark, c.benchmark);
    for goals in &a.benchmark.goals {
        assert!(goals.iter().all(|g| g.values.iter().all(|v| (0.0..=1.0).contains(v))));
    }
}

#[test]
fn evaluation_leaves_the_learner_untouched() {
    let cfg = small("full", 5, 10);
    let setup = cfg.setup().unwrap();
    let bench = runner::benchmark(&setup.hierarchy, 5, 200, 5);
    let mut evaluated = build_learner(&setup, 5).unwrap();
    let mut plain = build_learner(&setup, 5).unwrap();
    for i in 0..200 {
        if i % 50 == 0 {
            let before = evaluated.memory().len();
            evaluate(&evaluated, &bench, 5, i).unwrap();
            assert_eq!(evaluated.memory().len(), before);
        }
        let a = evaluated.step().unwrap();
        let b = plain.step().unwrap();
        assert_eq!(a, b);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let g = &bench.goals[0][3];
    assert_eq!(evaluated.exploit(g, &mut rng.clone()).unwrap(), plain.exploit(g, &mut rng).unwrap());
}

fn two_runs(tmp: &Path) -> (PathBuf, PathBuf) {
    let a = tmp.join("full");
    let b = tmp.join("nop");
    runner::run(&small("full", 1, 200), &a).unwrap();
    runner::run(&small("no-procedures", 1, 200), &b).unwrap();
    (a, b)
}

#[test]
fn comparing_a_run_with_itself_shows_no_difference() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, _) = two_runs(tmp.path());
    let table = compare_dirs(&[a.clone(), a.clone()]).unwrap();
    assert_eq!(table.rows.len(), 3);
    for r in &table.rows {
        assert_eq!(r.runs, 2);
        assert_eq!(r.delta, 0.0);
        assert!(r.winner);
        assert_eq!(r.q1, r.median);
        assert_eq!(r.q3, r.median);
    }
}

#[test]
fn comparison_reports_both_variants() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = two_runs(tmp.path());
    let runs = [RunData::load(&a).unwrap(), RunData::load(&b).unwrap()];
    let table = compare(&runs).unwrap();
    for space in ["omega0", "omega1", "omega2"] {
        let full = table.row(space, "full").unwrap();
        let nop = table.row(space, "no-procedures").unwrap();
        assert_eq!(full.median, runs[0].final_error(space).unwrap());
        assert_eq!(nop.median, runs[1].final_error(space).unwrap());
        let best = full.median.min(nop.median);
        assert_eq!(full.delta, full.median - best);
        assert!(full.winner || nop.winner);
    }
    let csv = table.to_csv();
    assert!(csv.starts_with("space,label,runs,median,q1,q3,delta,winner\n"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn missing_or_mismatched_runs_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = two_runs(tmp.path());
    fs::remove_file(b.join("eval.csv")).unwrap();
    let err = compare_dirs(&[a.clone(), b.clone()]).unwrap_err();
    assert!(matches!(&err, ExpError::MismatchedRuns(m) if m.contains("eval.csv")));
    assert_eq!(err.exit_code(), 2);

    runner::run(&small("no-procedures", 1, 200), &b).unwrap();
    let bench = fs::read_to_string(b.join("benchmark.csv")).unwrap();
    fs::write(b.join("benchmark.csv"), bench.replacen("0.1", "0.2", 1)).unwrap();
    assert!(matches!(compare_dirs(&[a.clone(), b]), Err(ExpError::MismatchedRuns(_))));
    assert!(matches!(compare_dirs(&[a]), Err(ExpError::MismatchedRuns(_))));
}

#[test]
fn quantiles_interpolate() {
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
    assert_eq!(quantile(&xs, 0.5), 3.0);
    assert_eq!(quantile(&xs, 0.25), 2.0);
    assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
    assert_eq!(quantile(&[7.0], 0.75), 7.0);
}

#[test]
fn curve_files() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = two_runs(tmp.path());
    let out = tmp.path().join("curves");
    curves(&[a.clone(), b], 50, &out).unwrap();
    let space = fs::read_to_string(out.join("space_selection.csv")).unwrap();
    assert!(space.starts_with("label,bin_start,bin_end,space,fraction\n"));
    // fractions of each bin add up to one
    let mut sums = std::collections::BTreeMap::<(String, String), f64>::new();
    for line in space.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        *sums.entry((f[0].into(), f[1].into())).or_default() += f[4].parse::<f64>().unwrap();
    }
    assert_eq!(sums.len(), 8);
    assert!(sums.values().all(|s| (s - 1.0).abs() < 1e-9));
    let curve = fs::read_to_string(out.join("curves.csv")).unwrap();
    assert_eq!(curve.lines().count(), 1 + 2 * 3 * 3);
    assert!(fs::read_to_string(out.join("strategy_selection.csv")).unwrap().starts_with("label,bin_start,bin_end,strategy,fraction\n"));
    assert!(matches!(curves(&[a], 0, &out), Err(ExpError::Invalid { .. })));
}

#[test]
fn star_runs_write_their_files_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let (mut cfg, _) = ExperimentConfig::load(&configs().join("star.toml")).unwrap();
    let star = cfg.star.as_mut().unwrap();
    star.episodes = 300;
    let setup = star.setup(&configs()).unwrap();
    let a = star_run::execute("star", 2, &setup).unwrap();
    star_run::write(&a, &tmp.path().join("a")).unwrap();
    let b = star_run::execute("star", 2, &setup).unwrap();
    star_run::write(&b, &tmp.path().join("b")).unwrap();
    let fa = files(&tmp.path().join("a"));
    assert_eq!(fa, files(&tmp.path().join("b")));
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        ["abstraction.csv", "flat_episodes.csv", "greedy_path.csv", "splits.csv", "star_episodes.csv", "star_summary.csv"]
    );
    assert_eq!(a.episodes.len(), 300);
    assert_eq!(a.flat.len(), 300);
    assert_eq!(a.shortest_path, 15);
    let last = a.final_abstraction();
    last.validate(&setup.maze).unwrap();
    assert_eq!(last.len(), a.episodes.last().unwrap().regions);
}
