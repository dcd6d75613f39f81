//! The experiment loop: learning, periodic evaluation on a held-out
//! benchmark, and CSV outputs.
//!
//! Output files of a run directory:
//!
//! - `choices.csv`: `iteration,strategy,teacher,space,mode,goal,competence`,
//!   one row per episode; `goal` holds space-separated normalized coordinates
//!   and `teacher` is blank for autonomous strategies.
//! - `eval.csv`: `iteration,space,mean_error,goals`.
//! - `histogram.csv`: `strategy,space,count`.
//! - `interest.csv`: `iteration,space,region,lo,hi,entries,strategy,interest`.
//! - `benchmark.csv`: `space,index,goal`.
//! - `run.csv`: `key,value` metadata (label, seed, budget).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sgim_core::arm::Arm;
use sgim_core::learner::{availability, Learner};
use sgim_core::motivation::{competence_floor, SelectionMode};
use sgim_core::teacher::build_teacher;
use sgim_core::types::{Outcome, SpaceId, TaskHierarchy};

use crate::config::{ExperimentConfig, LearnerSetup};
use crate::error::{io_err, ExpError};

const TEACHER_SALT: u64 = 0x7EAC_4E25;
const BENCHMARK_SALT: u64 = 0xBE9C_4A11;
const EVAL_SALT: u64 = 0xE7A1_0000;

/// Held-out evaluation goals per space.
#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub goals: Vec<Vec<Outcome>>,
}

/// Regular grid of `per_dim` points per dimension (cell centres), subsampled
/// to `cap` goals per space with a seed-derived RNG.
pub fn benchmark(hierarchy: &TaskHierarchy, per_dim: usize, cap: usize, seed: u64) -> Benchmark {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ BENCHMARK_SALT);
    let goals = hierarchy
        .space_ids()
        .map(|s| {
            let dim = hierarchy.dim(s).unwrap();
            let total = per_dim.pow(dim as u32);
            let mut keep: Vec<usize> = if total > cap {
                sample(&mut rng, total, cap).into_vec()
            } else {
                (0..total).collect()
            };
            keep.sort_unstable();
            keep.into_iter()
                .map(|mut code| {
                    let values = (0..dim)
                        .map(|_| {
                            let i = code % per_dim;
                            code /= per_dim;
                            (i as f64 + 0.5) / per_dim as f64
                        })
                        .collect();
                    Outcome::new(s, values)
                })
                .collect()
        })
        .collect();
    Benchmark { goals }
}

/// Mean distance between goal and reached outcome per space, using the
/// models without exploration noise. Unreached goals count the competence
/// floor's magnitude.
pub fn evaluate(learner: &Learner<Arm>, bench: &Benchmark, seed: u64, iteration: usize) -> Result<Vec<f64>, ExpError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ EVAL_SALT ^ (iteration as u64).rotate_left(32));
    let mut out = Vec::with_capacity(bench.goals.len());
    for goals in &bench.goals {
        let mut total = 0.0;
        for g in goals {
            let reached = learner.exploit(g, &mut rng)?;
            total += match &reached[g.space.0] {
                Some(r) => g.distance(r),
                None => -competence_floor(g.dim()),
            };
        }
        out.push(total / goals.len().max(1) as f64);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceRow {
    pub iteration: usize,
    pub strategy: String,
    pub teacher: Option<String>,
    pub space: SpaceId,
    pub mode: Option<SelectionMode>,
    pub goal: Vec<f64>,
    pub competence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub iteration: usize,
    pub space: SpaceId,
    pub mean_error: f64,
    pub goals: usize,
}

/// Everything a run produces, before serialization.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub label: String,
    pub seed: u64,
    pub budget: usize,
    pub space_names: Vec<String>,
    pub strategy_names: Vec<String>,
    pub choices: Vec<ChoiceRow>,
    pub eval: Vec<EvalRow>,
    /// `[strategy][space]` episode counts.
    pub histogram: Vec<Vec<usize>>,
    pub interest_csv: String,
    pub benchmark: Benchmark,
}

impl RunRecord {
    /// Final evaluation error of `space`.
    pub fn final_error(&self, space: SpaceId) -> Option<f64> {
        self.eval
            .iter()
            .rev()
            .find(|r| r.space == space)
            .map(|r| r.mean_error)
    }
}

/// Builds the learner described by `setup` for `seed`.
pub fn build_learner(setup: &LearnerSetup, seed: u64) -> Result<Learner<Arm>, ExpError> {
    let arm = Arm::new(setup.world.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ TEACHER_SALT);
    let teachers = setup
        .teachers
        .iter()
        .map(|spec| build_teacher(spec, &arm, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Learner::new(
        arm,
        setup.hierarchy.clone(),
        teachers,
        setup.strategies.clone(),
        setup.learner.clone(),
        seed,
    )?)
}

fn snapshot(learner: &Learner<Arm>, iteration: usize, out: &mut String) {
    let map = learner.interest_map();
    let available = availability(learner.hierarchy(), learner.teachers(), learner.strategies(), true);
    for region in map.all_regions() {
        for &st in &available[region.space.0] {
            let _ = writeln!(
                out,
                "{iteration},{},{},{},{},{},{},{}",
                learner.hierarchy().space(region.space).unwrap().name,
                region.id,
                join(&region.lo),
                join(&region.hi),
                region.total_entries(),
                learner.strategies()[st.0].name,
                region.interest(st, learner.costs()[st.0], &learner.config().motivation),
            );
        }
    }
}

/// Runs the learning loop in memory.
pub fn execute(config: &ExperimentConfig) -> Result<RunRecord, ExpError> {
    let setup = config.setup()?;
    let mut learner = build_learner(&setup, config.seed)?;
    let bench = benchmark(
        &setup.hierarchy,
        config.evaluation.per_dim,
        config.evaluation.cap,
        config.seed,
    );
    let space_names: Vec<String> = setup
        .hierarchy
        .space_ids()
        .map(|s| setup.hierarchy.space(s).unwrap().name.clone())
        .collect();
    let strategy_names: Vec<String> = setup.strategies.iter().map(|s| s.name.clone()).collect();
    let mut choices = Vec::with_capacity(config.budget);
    let mut eval = Vec::new();
    let mut interest_csv = String::from("iteration,space,region,lo,hi,entries,strategy,interest\n");
    let record_eval = |learner: &Learner<Arm>, eval: &mut Vec<EvalRow>, it: usize| -> Result<(), ExpError> {
        let errors = evaluate(learner, &bench, config.seed, it)?;
        for (s, e) in errors.into_iter().enumerate() {
            eval.push(EvalRow {
                iteration: it,
                space: SpaceId(s),
                mean_error: e,
                goals: bench.goals[s].len(),
            });
        }
        Ok(())
    };
    record_eval(&learner, &mut eval, 0)?;
    for it in 1..=config.budget {
        let (choice, pos) = learner.step()?;
        let ep = learner.memory().episode(pos);
        choices.push(ChoiceRow {
            iteration: ep.iteration,
            strategy: strategy_names[choice.strategy.0].clone(),
            teacher: ep.teacher.map(|t| learner.teachers()[t.0].name().to_string()),
            space: choice.goal.space,
            mode: choice.mode,
            goal: choice.goal.values.clone(),
            competence: ep.competence_goal,
        });
        if it % config.evaluation.cadence == 0 || it == config.budget {
            record_eval(&learner, &mut eval, it)?;
            if config.evaluation.snapshots || it == config.budget {
                snapshot(&learner, it, &mut interest_csv);
            }
        }
    }
    Ok(RunRecord {
        label: config.label.clone(),
        seed: config.seed,
        budget: config.budget,
        space_names,
        strategy_names,
        choices,
        eval,
        histogram: learner.counts().to_vec(),
        interest_csv,
        benchmark: bench,
    })
}

pub fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

fn mode_name(mode: Option<SelectionMode>) -> &'static str {
    match mode {
        None => "forced",
        Some(SelectionMode::Random) => "random",
        Some(SelectionMode::Proportional) => "proportional",
        Some(SelectionMode::Greedy) => "greedy",
    }
}

/// Writes every output file of `record` into `dir`.
pub fn write(record: &RunRecord, dir: &Path) -> Result<(), ExpError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let put = |name: &str, body: String| -> Result<(), ExpError> {
        let path = dir.join(name);
        fs::write(&path, body).map_err(io_err(path))
    };

    let mut s = String::from("iteration,strategy,teacher,space,mode,goal,competence\n");
    for c in &record.choices {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            c.iteration,
            c.strategy,
            c.teacher.as_deref().unwrap_or(""),
            record.space_names[c.space.0],
            mode_name(c.mode),
            join(&c.goal),
            c.competence
        );
    }
    put("choices.csv", s)?;

    let mut s = String::from("iteration,space,mean_error,goals\n");
    for e in &record.eval {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            e.iteration, record.space_names[e.space.0], e.mean_error, e.goals
        );
    }
    put("eval.csv", s)?;

    let mut s = String::from("strategy,space,count\n");
    for (st, row) in record.histogram.iter().enumerate() {
        for (sp, count) in row.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", record.strategy_names[st], record.space_names[sp], count);
        }
    }
    put("histogram.csv", s)?;

    put("interest.csv", record.interest_csv.clone())?;

    let mut s = String::from("space,index,goal\n");
    for (sp, goals) in record.benchmark.goals.iter().enumerate() {
        for (i, g) in goals.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", record.space_names[sp], i, join(&g.values));
        }
    }
    put("benchmark.csv", s)?;

    put(
        "run.csv",
        format!(
            "key,value\nlabel,{}\nseed,{}\nbudget,{}\n",
            record.label, record.seed, record.budget
        ),
    )
}

/// Runs `config` and writes its outputs into `dir`.
pub fn run(config: &ExperimentConfig, dir: &Path) -> Result<RunRecord, ExpError> {
    let record = execute(config)?;
    write(&record, dir)?;
    Ok(record)
}
