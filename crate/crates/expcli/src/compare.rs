//! Aggregation across run directories: final-error comparison tables and
//! pre-aggregated learning curves.
//!
//! - `comparison.csv`: `space,label,runs,median,q1,q3,delta,winner`, where
//!   `delta` is the gap to the lowest median of the space and `winner` flags
//!   the label(s) holding it.
//! - `curves.csv`: `label,space,iteration,runs,median,q1,q3` of the
//!   evaluation error.
//! - `space_selection.csv`: `label,bin_start,bin_end,space,fraction` of the
//!   episodes, pooled over seeds.
//! - `strategy_selection.csv`: `label,bin_start,bin_end,strategy,fraction`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{io_err, ExpError};

#[derive(Debug, Deserialize)]
struct EvalLine {
    iteration: usize,
    space: String,
    mean_error: f64,
}

#[derive(Debug, Deserialize)]
struct ChoiceLine {
    iteration: usize,
    strategy: String,
    space: String,
}

/// What `compare` and `curves` read from one run directory.
#[derive(Debug, Clone)]
pub struct RunData {
    pub dir: PathBuf,
    pub label: String,
    pub seed: u64,
    /// `(iteration, space, mean_error)` in file order.
    pub eval: Vec<(usize, String, f64)>,
    benchmark: String,
}

impl RunData {
    pub fn load(dir: &Path) -> Result<Self, ExpError> {
        let read = |name: &str| -> Result<String, ExpError> {
            let path = dir.join(name);
            if !path.is_file() {
                return Err(ExpError::MismatchedRuns(format!("{}: missing {name}", dir.display())));
            }
            fs::read_to_string(&path).map_err(io_err(path))
        };
        let meta = read("run.csv")?;
        let mut label = None;
        let mut seed = None;
        for line in meta.lines().skip(1) {
            match line.split_once(',') {
                Some(("label", v)) => label = Some(v.to_string()),
                Some(("seed", v)) => seed = v.parse().ok(),
                _ => {}
            }
        }
        let (Some(label), Some(seed)) = (label, seed) else {
            return Err(ExpError::MismatchedRuns(format!(
                "{}: run.csv lacks label or seed",
                dir.display()
            )));
        };
        let eval = parse_rows::<EvalLine>(dir, "eval.csv", &read("eval.csv")?)?
            .into_iter()
            .map(|e| (e.iteration, e.space, e.mean_error))
            .collect::<Vec<_>>();
        Ok(Self {
            dir: dir.to_path_buf(),
            label,
            seed,
            eval,
            benchmark: read("benchmark.csv")?,
        })
    }

    /// Space names in benchmark order.
    pub fn spaces(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for line in self.benchmark.lines().skip(1) {
            let name = line.split(',').next().unwrap_or_default();
            if out.last().is_none_or(|l| l != name) {
                out.push(name.to_string());
            }
        }
        out
    }

    /// Error of the last evaluation of `space`.
    pub fn final_error(&self, space: &str) -> Option<f64> {
        self.eval
            .iter()
            .filter(|(_, s, _)| s == space)
            .max_by_key(|(it, _, _)| *it)
            .map(|(_, _, e)| *e)
    }
}

fn parse_rows<T: for<'de> Deserialize<'de>>(dir: &Path, name: &str, body: &str) -> Result<Vec<T>, ExpError> {
    csv::Reader::from_reader(body.as_bytes())
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| ExpError::MismatchedRuns(format!("{}: malformed {name}: {e}", dir.join(name).display())))
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn summarize(mut xs: Vec<f64>) -> (f64, f64, f64) {
    xs.sort_by(f64::total_cmp);
    (quantile(&xs, 0.5), quantile(&xs, 0.25), quantile(&xs, 0.75))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub space: String,
    pub label: String,
    pub runs: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub delta: f64,
    pub winner: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn row(&self, space: &str, label: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.space == space && r.label == label)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("space,label,runs,median,q1,q3,delta,winner\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.space, r.label, r.runs, r.median, r.q1, r.q3, r.delta, r.winner as u8
            );
        }
        s
    }
}

/// Checks that runs sharing a seed used the same benchmark and that every
/// run covers the same spaces.
fn check_matched(runs: &[RunData]) -> Result<Vec<String>, ExpError> {
    if runs.len() < 2 {
        return Err(ExpError::MismatchedRuns("at least two runs are needed".into()));
    }
    let spaces = runs[0].spaces();
    let mut by_seed: BTreeMap<u64, &RunData> = BTreeMap::new();
    for r in runs {
        if r.spaces() != spaces {
            return Err(ExpError::MismatchedRuns(format!(
                "{} and {} cover different spaces",
                runs[0].dir.display(),
                r.dir.display()
            )));
        }
        match by_seed.get(&r.seed) {
            Some(o) if o.benchmark != r.benchmark => {
                return Err(ExpError::MismatchedRuns(format!(
                    "{} and {} share seed {} but not their benchmark",
                    o.dir.display(),
                    r.dir.display(),
                    r.seed
                )))
            }
            Some(_) => {}
            None => {
                by_seed.insert(r.seed, r);
            }
        }
        if let Some(s) = spaces.iter().find(|s| r.final_error(s).is_none()) {
            return Err(ExpError::MismatchedRuns(format!(
                "{}: no evaluation of {s}",
                r.dir.display()
            )));
        }
    }
    Ok(spaces)
}

/// Final errors per space and label: median and quartiles across seeds.
pub fn compare(runs: &[RunData]) -> Result<Comparison, ExpError> {
    let spaces = check_matched(runs)?;
    let labels: BTreeSet<&str> = runs.iter().map(|r| r.label.as_str()).collect();
    let mut rows = Vec::new();
    for space in &spaces {
        let start = rows.len();
        for &label in &labels {
            let errors: Vec<f64> = runs
                .iter()
                .filter(|r| r.label == label)
                .filter_map(|r| r.final_error(space))
                .collect();
            let (median, q1, q3) = summarize(errors.clone());
            rows.push(ComparisonRow {
                space: space.clone(),
                label: label.to_string(),
                runs: errors.len(),
                median,
                q1,
                q3,
                delta: 0.0,
                winner: false,
            });
        }
        let best = rows[start..].iter().map(|r| r.median).fold(f64::INFINITY, f64::min);
        for r in &mut rows[start..] {
            r.delta = r.median - best;
            r.winner = r.median == best;
        }
    }
    Ok(Comparison { rows })
}

/// Loads every directory and compares them.
pub fn compare_dirs(dirs: &[PathBuf]) -> Result<Comparison, ExpError> {
    let runs = dirs.iter().map(|d| RunData::load(d)).collect::<Result<Vec<_>, _>>()?;
    compare(&runs)
}

/// Evaluation curves per label and space: median and quartiles across runs
/// at each evaluated iteration.
pub fn eval_curves(runs: &[RunData]) -> String {
    let mut groups: BTreeMap<(&str, &str, usize), Vec<f64>> = BTreeMap::new();
    let mut order: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for r in runs {
        order.entry(&r.label).or_insert_with(|| r.spaces());
        for (it, space, e) in &r.eval {
            groups.entry((&r.label, space, *it)).or_default().push(*e);
        }
    }
    let mut s = String::from("label,space,iteration,runs,median,q1,q3\n");
    for (label, spaces) in &order {
        for space in spaces {
            for ((_, _, it), xs) in groups.range((*label, space.as_str(), 0)..=(*label, space.as_str(), usize::MAX)) {
                let (m, q1, q3) = summarize(xs.clone());
                let _ = writeln!(s, "{label},{space},{it},{},{m},{q1},{q3}", xs.len());
            }
        }
    }
    s
}

/// Fractions of episodes per bin of `bin` iterations, pooled over the runs
/// of each label, keyed by the column picked by `key`.
fn selection(runs: &[(String, Vec<ChoiceLine>)], bin: usize, key: fn(&ChoiceLine) -> &str, column: &str) -> String {
    let mut counts: BTreeMap<(&str, usize), BTreeMap<&str, usize>> = BTreeMap::new();
    let mut names: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (label, choices) in runs {
        for c in choices {
            let b = c.iteration / bin;
            *counts.entry((label, b)).or_default().entry(key(c)).or_default() += 1;
            names.entry(label).or_default().insert(key(c));
        }
    }
    let mut s = format!("label,bin_start,bin_end,{column},fraction\n");
    for ((label, b), per) in &counts {
        let total: usize = per.values().sum();
        for name in &names[label] {
            let n = per.get(name).copied().unwrap_or(0);
            let _ = writeln!(
                s,
                "{label},{},{},{name},{}",
                b * bin,
                (b + 1) * bin,
                n as f64 / total as f64
            );
        }
    }
    s
}

/// Writes `curves.csv`, `space_selection.csv` and `strategy_selection.csv`
/// for `dirs` into `out`.
pub fn curves(dirs: &[PathBuf], bin: usize, out: &Path) -> Result<(), ExpError> {
    if bin == 0 {
        return Err(ExpError::Invalid {
            key: "bin".into(),
            message: "bin width must be positive".into(),
        });
    }
    let runs = dirs.iter().map(|d| RunData::load(d)).collect::<Result<Vec<_>, _>>()?;
    let mut choices = Vec::new();
    for r in &runs {
        let path = r.dir.join("choices.csv");
        let body = fs::read_to_string(&path).map_err(io_err(&path))?;
        choices.push((r.label.clone(), parse_rows::<ChoiceLine>(&r.dir, "choices.csv", &body)?));
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    let put = |name: &str, body: String| -> Result<(), ExpError> {
        let path = out.join(name);
        fs::write(&path, body).map_err(io_err(path))
    };
    put("curves.csv", eval_curves(&runs))?;
    put("space_selection.csv", selection(&choices, bin, |c| &c.space, "space"))?;
    put("strategy_selection.csv", selection(&choices, bin, |c| &c.strategy, "strategy"))
}
