//! Experiment configuration, read from TOML.
//!
//! Every section is optional and falls back to the defaults documented in
//! `configs/full.toml`. Semantic validation errors carry the dotted key they
//! refer to, which [`locate`] maps back to a line of the source file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use sgim_core::arm::{Arm, WorldConfig};
use sgim_core::learner::{ExplorationConfig, LearnerConfig, StrategyDescriptor, StrategyKind};
use sgim_core::models::ModelConfig;
use sgim_core::motivation::MotivationConfig;
use sgim_core::teacher::{TeacherKind, TeacherSpec};
use sgim_core::types::{Component, SpaceId, TaskHierarchy, TeacherId};

use crate::error::ExpError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Name grouping runs of the same variant across seeds.
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub world: WorldSection,
    #[serde(default)]
    pub hierarchy: HierarchySection,
    #[serde(default = "default_teachers")]
    pub teachers: Vec<TeacherSection>,
    /// Empty means: the default set derived from the teachers.
    #[serde(default)]
    pub strategies: Vec<StrategySection>,
    #[serde(default)]
    pub ablation: AblationSection,
    #[serde(default)]
    pub motivation: MotivationSection,
    #[serde(default)]
    pub models: ModelsSection,
    #[serde(default)]
    pub exploration: ExplorationSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    pub star: Option<crate::star_run::StarSection>,
}

fn default_label() -> String {
    "run".into()
}

fn default_budget() -> usize {
    5000
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Run directory, relative to the output root unless absolute.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldSection {
    pub links: [f64; 3],
    pub pen_position: [f64; 2],
    pub grasp_radius: f64,
    pub canvas: [f64; 2],
    pub micro_steps: usize,
}

impl Default for WorldSection {
    fn default() -> Self {
        let w = WorldConfig::default();
        Self {
            links: w.links,
            pen_position: w.pen_position,
            grasp_radius: w.grasp_radius,
            canvas: w.canvas,
            micro_steps: w.micro_steps,
        }
    }
}

impl WorldSection {
    pub fn to_world(&self) -> WorldConfig {
        WorldConfig {
            links: self.links,
            pen_position: self.pen_position,
            grasp_radius: self.grasp_radius,
            canvas: self.canvas,
            micro_steps: self.micro_steps,
        }
    }
}

/// Permitted components of each arm outcome space: `"actions"` or the name
/// of another space.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HierarchySection {
    pub omega0: Vec<String>,
    pub omega1: Vec<String>,
    pub omega2: Vec<String>,
}

impl Default for HierarchySection {
    fn default() -> Self {
        Self {
            omega0: vec!["actions".into()],
            omega1: vec!["actions".into(), "omega0".into()],
            omega2: vec!["actions".into(), "omega1".into()],
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum TeacherKindName {
    Actions,
    Procedures,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeacherSection {
    pub name: String,
    pub kind: TeacherKindName,
    #[serde(default = "default_grid")]
    pub grid: usize,
    pub repertoire_size: Option<usize>,
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(default = "default_teacher_cost")]
    pub cost: f64,
}

fn default_grid() -> usize {
    7
}

fn default_teacher_cost() -> f64 {
    0.7
}

fn default_teachers() -> Vec<TeacherSection> {
    [TeacherSpec::good_actions(), TeacherSpec::procedures()]
        .into_iter()
        .map(|t| TeacherSection {
            name: t.name,
            kind: match t.kind {
                TeacherKind::Actions => TeacherKindName::Actions,
                TeacherKind::Procedures => TeacherKindName::Procedures,
            },
            grid: t.grid,
            repertoire_size: t.repertoire_size,
            noise_sd: t.noise_sd,
            cost: t.cost,
        })
        .collect()
}

impl TeacherSection {
    pub fn to_spec(&self) -> TeacherSpec {
        TeacherSpec {
            name: self.name.clone(),
            kind: match self.kind {
                TeacherKindName::Actions => TeacherKind::Actions,
                TeacherKindName::Procedures => TeacherKind::Procedures,
            },
            grid: self.grid,
            repertoire_size: self.repertoire_size,
            noise_sd: self.noise_sd,
            cost: self.cost,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKindName {
    AutonomousActions,
    AutonomousProcedures,
    Mimicry,
    Emulation,
    ProceduralImitation,
}

impl StrategyKindName {
    fn kind(self) -> StrategyKind {
        match self {
            StrategyKindName::AutonomousActions => StrategyKind::AutonomousActions,
            StrategyKindName::AutonomousProcedures => StrategyKind::AutonomousProcedures,
            StrategyKindName::Mimicry => StrategyKind::Mimicry,
            StrategyKindName::Emulation => StrategyKind::Emulation,
            StrategyKindName::ProceduralImitation => StrategyKind::ProceduralImitation,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySection {
    pub name: String,
    pub kind: StrategyKindName,
    pub teacher: Option<String>,
    /// Defaults to 1.0 for autonomous strategies and the teacher's cost.
    pub cost: Option<f64>,
    pub forced_period: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct AblationSection {
    /// Drop every imitation strategy.
    pub no_teachers: bool,
    /// Drop autonomous and imitated procedures.
    pub no_procedures: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotivationSection {
    pub max_entries: usize,
    pub window: usize,
    pub initial_progress: f64,
    pub p_random: f64,
    pub p_proportional: f64,
    pub p_greedy: f64,
    pub interest_floor: f64,
}

impl Default for MotivationSection {
    fn default() -> Self {
        let m = MotivationConfig::default();
        Self {
            max_entries: m.max_entries,
            window: m.window,
            initial_progress: m.initial_progress,
            p_random: m.p_random,
            p_proportional: m.p_proportional,
            p_greedy: m.p_greedy,
            interest_floor: m.interest_floor,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelsSection {
    pub k: usize,
    pub epsilon: f64,
    pub random_fallback: bool,
}

impl Default for ModelsSection {
    fn default() -> Self {
        let m = ModelConfig::default();
        Self {
            k: m.k,
            epsilon: m.epsilon,
            random_fallback: m.random_fallback,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExplorationSection {
    pub base_sd: f64,
    pub extra_sd: f64,
    pub decay: f64,
    pub radius: f64,
    pub procedure_reuse: f64,
    pub procedure_sd: f64,
    pub procedure_len: usize,
    pub mimic_sd: f64,
}

impl Default for ExplorationSection {
    fn default() -> Self {
        let e = ExplorationConfig::default();
        Self {
            base_sd: e.base_sd,
            extra_sd: e.extra_sd,
            decay: e.decay,
            radius: e.radius,
            procedure_reuse: e.procedure_reuse,
            procedure_sd: e.procedure_sd,
            procedure_len: e.procedure_len,
            mimic_sd: e.mimic_sd,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationSection {
    /// Episodes between two evaluations.
    pub cadence: usize,
    /// Benchmark grid points per dimension.
    pub per_dim: usize,
    /// Maximum benchmark goals per space.
    pub cap: usize,
    /// Write interest-map snapshots at every evaluation.
    pub snapshots: bool,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            cadence: 250,
            per_dim: 5,
            cap: 200,
            snapshots: true,
        }
    }
}

/// Everything needed to build a learner, resolved and validated.
#[derive(Debug, Clone)]
pub struct LearnerSetup {
    pub world: WorldConfig,
    pub hierarchy: TaskHierarchy,
    pub teachers: Vec<TeacherSpec>,
    pub strategies: Vec<StrategyDescriptor>,
    pub learner: LearnerConfig,
}

fn invalid(key: &str, message: impl Into<String>) -> ExpError {
    ExpError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

fn space_by_name(name: &str) -> Option<SpaceId> {
    match name {
        "omega0" => Some(SpaceId(0)),
        "omega1" => Some(SpaceId(1)),
        "omega2" => Some(SpaceId(2)),
        _ => None,
    }
}

impl ExperimentConfig {
    pub fn parse(source: &str) -> Result<Self, ExpError> {
        toml::from_str(source).map_err(|e| ExpError::Parse {
            line: e.span().map(|s| line_of(source, s.start)),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<(Self, String), ExpError> {
        let source = std::fs::read_to_string(path).map_err(|e| ExpError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let config = Self::parse(&source)?;
        Ok((config, source))
    }

    /// Resolves the configuration into learner components.
    pub fn setup(&self) -> Result<LearnerSetup, ExpError> {
        if self.budget < 1 {
            return Err(invalid("budget", "budget must be at least 1"));
        }
        if self.evaluation.cadence < 1 {
            return Err(invalid("evaluation.cadence", "cadence must be at least 1"));
        }
        if self.evaluation.per_dim < 1 || self.evaluation.cap < 1 {
            return Err(invalid("evaluation.per_dim", "benchmark must hold at least one goal"));
        }
        let world = self.world.to_world();
        let arm = Arm::new(world.clone()).map_err(|e| invalid("world", e.to_string()))?;
        let base = arm.hierarchy();
        let mut components = Vec::new();
        for (key, names) in [
            ("hierarchy.omega0", &self.hierarchy.omega0),
            ("hierarchy.omega1", &self.hierarchy.omega1),
            ("hierarchy.omega2", &self.hierarchy.omega2),
        ] {
            let mut comps = Vec::new();
            for n in names {
                comps.push(match n.as_str() {
                    "actions" => Component::Actions,
                    other => Component::Space(
                        space_by_name(other)
                            .ok_or_else(|| invalid(key, format!("unknown space `{other}`")))?,
                    ),
                });
            }
            components.push(comps);
        }
        let spaces = base
            .space_ids()
            .map(|s| base.space(s).unwrap().clone())
            .collect();
        let hierarchy = TaskHierarchy::new(base.action_dim(), spaces, components)
            .map_err(|e| invalid("hierarchy", e.to_string()))?;

        let mut teachers = Vec::new();
        for t in &self.teachers {
            if teachers.iter().any(|o: &TeacherSpec| o.name == t.name) {
                return Err(invalid("teachers.name", format!("duplicate teacher `{}`", t.name)));
            }
            if !(t.noise_sd >= 0.0) {
                return Err(invalid("teachers.noise_sd", "noise must be non-negative"));
            }
            if !(t.cost > 0.0 && t.cost <= 1.0) {
                return Err(invalid("teachers.cost", "cost must be in (0, 1]"));
            }
            if t.grid < 1 || t.repertoire_size == Some(0) {
                return Err(invalid("teachers.grid", "teacher repertoire would be empty"));
            }
            teachers.push(t.to_spec());
        }

        let sections = if self.strategies.is_empty() {
            self.default_strategies()
        } else {
            self.strategies.clone()
        };
        let mut strategies = Vec::new();
        for s in &sections {
            let kind = s.kind.kind();
            if self.ablation.no_teachers && kind.is_imitation() {
                continue;
            }
            if self.ablation.no_procedures
                && matches!(
                    kind,
                    StrategyKind::AutonomousProcedures | StrategyKind::ProceduralImitation
                )
            {
                continue;
            }
            let teacher = match (&s.teacher, kind.is_imitation()) {
                (Some(name), true) => Some(
                    teachers
                        .iter()
                        .position(|t| &t.name == name)
                        .map(TeacherId)
                        .ok_or_else(|| invalid("strategies.teacher", format!("unknown teacher `{name}`")))?,
                ),
                (None, true) => {
                    return Err(invalid("strategies.teacher", format!("{} needs a teacher", s.name)))
                }
                (Some(_), false) => {
                    return Err(invalid(
                        "strategies.teacher",
                        format!("{} is autonomous and takes no teacher", s.name),
                    ))
                }
                (None, false) => None,
            };
            let cost = s
                .cost
                .unwrap_or_else(|| teacher.map_or(1.0, |t| teachers[t.0].cost));
            if !(cost > 0.0 && cost <= 1.0) {
                return Err(invalid("strategies.cost", "cost must be in (0, 1]"));
            }
            if s.forced_period == Some(0) {
                return Err(invalid("strategies.forced_period", "period must be positive"));
            }
            strategies.push(StrategyDescriptor {
                name: s.name.clone(),
                kind,
                teacher,
                cost,
                forced_period: s.forced_period,
            });
        }
        if strategies.is_empty() {
            return Err(invalid("strategies", "no strategy left after ablation"));
        }

        let m = &self.motivation;
        let motivation = MotivationConfig {
            max_entries: m.max_entries,
            window: m.window,
            initial_progress: m.initial_progress,
            p_random: m.p_random,
            p_proportional: m.p_proportional,
            p_greedy: m.p_greedy,
            interest_floor: m.interest_floor,
        };
        motivation
            .validate()
            .map_err(|e| invalid("motivation.p_random", e.to_string()))?;
        if self.models.k < 1 {
            return Err(invalid("models.k", "k must be at least 1"));
        }
        let e = &self.exploration;
        if [e.base_sd, e.extra_sd, e.procedure_sd, e.mimic_sd]
            .iter()
            .any(|v| !(*v >= 0.0))
        {
            return Err(invalid("exploration", "noise levels must be non-negative"));
        }
        if !(0.0..=1.0).contains(&e.procedure_reuse) {
            return Err(invalid("exploration.procedure_reuse", "must be a probability"));
        }
        if e.procedure_len < 1 || !(e.decay > 0.0) {
            return Err(invalid("exploration.procedure_len", "must be positive"));
        }
        let learner = LearnerConfig {
            models: ModelConfig {
                k: self.models.k,
                epsilon: self.models.epsilon,
                random_fallback: self.models.random_fallback,
            },
            motivation,
            exploration: ExplorationConfig {
                base_sd: e.base_sd,
                extra_sd: e.extra_sd,
                decay: e.decay,
                radius: e.radius,
                procedure_reuse: e.procedure_reuse,
                procedure_sd: e.procedure_sd,
                procedure_len: e.procedure_len,
                mimic_sd: e.mimic_sd,
            },
        };
        Ok(LearnerSetup {
            world,
            hierarchy,
            teachers,
            strategies,
            learner,
        })
    }

    /// Autonomous actions and procedures, plus per teacher: mimicry and
    /// emulation for movement teachers, procedural imitation and emulation for
    /// decomposition teachers.
    fn default_strategies(&self) -> Vec<StrategySection> {
        let mut out = vec![
            StrategySection {
                name: "auto-actions".into(),
                kind: StrategyKindName::AutonomousActions,
                teacher: None,
                cost: None,
                forced_period: None,
            },
            StrategySection {
                name: "auto-procedures".into(),
                kind: StrategyKindName::AutonomousProcedures,
                teacher: None,
                cost: None,
                forced_period: None,
            },
        ];
        for t in &self.teachers {
            let first = match t.kind {
                TeacherKindName::Actions => ("mimic", StrategyKindName::Mimicry),
                TeacherKindName::Procedures => ("procedure", StrategyKindName::ProceduralImitation),
            };
            for (prefix, kind) in [first, ("emulate", StrategyKindName::Emulation)] {
                out.push(StrategySection {
                    name: format!("{prefix}-{}", t.name),
                    kind,
                    teacher: Some(t.name.clone()),
                    cost: None,
                    forced_period: None,
                });
            }
        }
        out
    }
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// Line of the dotted `key` in `source` (1-based), if it appears literally.
///
/// `budget` matches a top-level `budget = ...`; `evaluation.cadence` matches
/// `cadence = ...` inside `[evaluation]`; a bare section name matches its
/// header. Array-of-table sections (`[[teachers]]`) match their first entry
/// holding the key.
pub fn locate(source: &str, key: &str) -> Option<usize> {
    let (section, leaf) = match key.rsplit_once('.') {
        Some((s, l)) => (s, l),
        None => ("", key),
    };
    let mut current = String::new();
    let mut header_line = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == key {
                header_line = header_line.or(Some(i + 1));
            }
            continue;
        }
        let Some((k, _)) = line.split_once('=') else {
            continue;
        };
        if current == section && k.trim() == leaf {
            return Some(i + 1);
        }
    }
    header_line
}
