//! Scripted teachers answering demonstration queries.
//!
//! A teacher is an immutable oracle: an expertise mask, a repertoire of
//! verified demonstrations per expert space, a delivery noise on action
//! parameters (correspondence error) and a cost factor. Queries return the
//! demonstration whose achieved outcome is nearest to the requested goal.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::arm::{Arm, Elbow, DRAWING, PEN, TIP};
use crate::error::{Error, Result};
use crate::types::{CompoundAction, Outcome, PrimitiveAction, Procedure, SpaceId};

#[derive(Debug, Clone, PartialEq)]
pub enum DemoContent {
    Action(CompoundAction),
    Procedure(Procedure),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demo {
    pub content: DemoContent,
    /// Outcome the teacher achieved with this demonstration.
    pub outcome: Outcome,
    /// Primitive actions the teacher executed to produce `outcome`.
    pub execution: CompoundAction,
}

/// Answer to a teacher query.
#[derive(Debug, Clone, PartialEq)]
pub enum DemoResponse {
    Action { compound: CompoundAction, achieved: Outcome },
    Outcome { target: Outcome, achieved: Outcome },
    Procedure { procedure: Procedure, achieved: Outcome },
}

#[derive(Debug, Clone)]
pub struct Teacher {
    name: String,
    /// Demonstrations indexed by space id; empty for non-expert spaces.
    repertoire: Vec<Vec<Demo>>,
    noise_sd: f64,
    cost: f64,
}

impl Teacher {
    /// `repertoire[s]` holds the demos for space `s`; a space with demos is an
    /// expert space.
    pub fn new(name: impl Into<String>, repertoire: Vec<Vec<Demo>>, noise_sd: f64, cost: f64) -> Result<Self> {
        let name = name.into();
        if !(noise_sd >= 0.0) {
            return Err(Error::InvalidTeacher(format!("{name}: negative noise")));
        }
        if !(cost > 0.0 && cost <= 1.0) {
            return Err(Error::InvalidTeacher(format!("{name}: cost must be in (0, 1]")));
        }
        if repertoire.iter().all(Vec::is_empty) {
            return Err(Error::InvalidTeacher(format!("{name}: empty repertoire")));
        }
        for (s, demos) in repertoire.iter().enumerate() {
            if demos.iter().any(|d| d.outcome.space != SpaceId(s)) {
                return Err(Error::InvalidTeacher(format!(
                    "{name}: demo outcome outside its expert space"
                )));
            }
        }
        Ok(Self {
            name,
            repertoire,
            noise_sd,
            cost,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    pub fn demos(&self, space: SpaceId) -> &[Demo] {
        self.repertoire.get(space.0).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn repertoire_size(&self) -> usize {
        self.repertoire.iter().map(Vec::len).sum()
    }

    pub fn is_expert(&self, space: SpaceId) -> bool {
        !self.demos(space).is_empty()
    }

    pub fn has_action_demos(&self, space: SpaceId) -> bool {
        self.demos(space)
            .iter()
            .any(|d| matches!(d.content, DemoContent::Action(_)))
    }

    pub fn has_procedure_demos(&self, space: SpaceId) -> bool {
        self.demos(space)
            .iter()
            .any(|d| matches!(d.content, DemoContent::Procedure(_)))
    }

    fn not_expert(&self, space: SpaceId) -> Error {
        Error::NotExpert {
            teacher: self.name.clone(),
            space,
        }
    }

    /// Demo with the nearest achieved outcome among those accepted by `keep`;
    /// ties go to the earlier demo.
    fn nearest(&self, goal: &Outcome, keep: impl Fn(&Demo) -> bool) -> Result<&Demo> {
        self.demos(goal.space)
            .iter()
            .filter(|d| keep(d))
            .fold(None, |best: Option<(&Demo, f64)>, d| {
                let dist = d.outcome.distance(goal);
                match best {
                    Some((_, bd)) if bd <= dist => best,
                    _ => Some((d, dist)),
                }
            })
            .map(|(d, _)| d)
            .ok_or_else(|| self.not_expert(goal.space))
    }

    /// Movement demonstration, perturbed by the teacher's delivery noise.
    pub fn demonstrate_action<R: Rng + ?Sized>(&self, goal: &Outcome, rng: &mut R) -> Result<DemoResponse> {
        let demo = self.nearest(goal, |d| matches!(d.content, DemoContent::Action(_)))?;
        let DemoContent::Action(compound) = &demo.content else {
            unreachable!("filtered on action demos")
        };
        let compound = perturb(compound, self.noise_sd, rng);
        Ok(DemoResponse::Action {
            compound,
            achieved: demo.outcome.clone(),
        })
    }

    /// Outcome demonstration: the achieved outcome of the nearest demo.
    pub fn demonstrate_outcome(&self, goal: &Outcome) -> Result<DemoResponse> {
        let demo = self.nearest(goal, |_| true)?;
        Ok(DemoResponse::Outcome {
            target: demo.outcome.clone(),
            achieved: demo.outcome.clone(),
        })
    }

    /// Task decomposition demonstration, shifted towards the queried goal.
    pub fn demonstrate_procedure(&self, goal: &Outcome) -> Result<DemoResponse> {
        let demo = self.nearest(goal, |d| matches!(d.content, DemoContent::Procedure(_)))?;
        let DemoContent::Procedure(procedure) = &demo.content else {
            unreachable!("filtered on procedure demos")
        };
        Ok(DemoResponse::Procedure {
            procedure: shift_procedure(procedure, &demo.outcome, goal),
            achieved: demo.outcome.clone(),
        })
    }
}

/// Adds Gaussian noise to every action parameter, clamping into [-1, 1].
pub fn perturb<R: Rng + ?Sized>(compound: &CompoundAction, sd: f64, rng: &mut R) -> CompoundAction {
    if sd == 0.0 {
        return compound.clone();
    }
    CompoundAction {
        actions: compound
            .actions
            .iter()
            .map(|a| {
                PrimitiveAction::clamped(
                    a.params
                        .iter()
                        .map(|p| p + sd * rng.sample::<f64, _>(StandardNormal))
                        .collect(),
                )
            })
            .collect(),
    }
}

/// Translates subgoals by `goal - demo_outcome`.
///
/// When the subgoal dimensions add up to the goal dimension, each subgoal
/// takes the matching consecutive slice of the shift (first placement to the
/// first subgoal, and so on). When every subgoal has the goal's dimension the
/// whole shift is applied to each. Otherwise the procedure is unchanged.
pub fn shift_procedure(procedure: &Procedure, demo_outcome: &Outcome, goal: &Outcome) -> Procedure {
    let delta: Vec<f64> = goal
        .values
        .iter()
        .zip(&demo_outcome.values)
        .map(|(g, o)| g - o)
        .collect();
    let dims: Vec<usize> = procedure.subgoals.iter().map(Outcome::dim).collect();
    let offsets: Option<Vec<usize>> = if dims.iter().sum::<usize>() == delta.len() {
        Some(
            dims.iter()
                .scan(0, |acc, d| {
                    let at = *acc;
                    *acc += d;
                    Some(at)
                })
                .collect(),
        )
    } else if dims.iter().all(|&d| d == delta.len()) {
        Some(vec![0; dims.len()])
    } else {
        None
    };
    let Some(offsets) = offsets else {
        return procedure.clone();
    };
    Procedure {
        subgoals: procedure
            .subgoals
            .iter()
            .zip(offsets)
            .map(|(s, at)| {
                Outcome::new(
                    s.space,
                    s.values
                        .iter()
                        .enumerate()
                        .map(|(i, v)| (v + delta[at + i]).clamp(0.0, 1.0))
                        .collect(),
                )
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TeacherKind {
    /// Movement demos for the reaching and pen spaces.
    Actions,
    /// Pen-subgoal decompositions for the drawing space.
    Procedures,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeacherSpec {
    pub name: String,
    pub kind: TeacherKind,
    /// Grid points per canvas axis used to generate demos.
    pub grid: usize,
    /// Optional cap on the total number of demos, subsampled at random.
    pub repertoire_size: Option<usize>,
    pub noise_sd: f64,
    pub cost: f64,
}

impl TeacherSpec {
    pub fn good_actions() -> Self {
        Self {
            name: "T_A".into(),
            kind: TeacherKind::Actions,
            grid: 7,
            repertoire_size: None,
            noise_sd: 0.01,
            cost: 0.7,
        }
    }

    pub fn procedures() -> Self {
        Self {
            name: "T_P".into(),
            kind: TeacherKind::Procedures,
            grid: 5,
            repertoire_size: None,
            noise_sd: 0.0,
            cost: 0.7,
        }
    }

    pub fn poor_actions() -> Self {
        Self {
            name: "T_bad".into(),
            kind: TeacherKind::Actions,
            grid: 7,
            repertoire_size: Some(3),
            noise_sd: 0.5,
            cost: 0.7,
        }
    }
}

fn grid_points(arm: &Arm, n: usize) -> Vec<[f64; 2]> {
    let [lo, hi] = arm.config().canvas;
    let step = (hi - lo) / n as f64;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            out.push([lo + (i as f64 + 0.5) * step, lo + (j as f64 + 0.5) * step]);
        }
    }
    out
}

fn ik_action(arm: &Arm, target: [f64; 2]) -> Option<PrimitiveAction> {
    arm.inverse_kinematics(target, Elbow::Positive)
        .map(|q| Arm::action_for(&q))
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Generates and verifies a teacher's repertoire on a grid of canvas goals
/// using analytic inverse kinematics. Unreachable grid points are skipped.
pub fn build_teacher<R: Rng + ?Sized>(spec: &TeacherSpec, arm: &Arm, rng: &mut R) -> Result<Teacher> {
    let points = grid_points(arm, spec.grid);
    let grasp = ik_action(arm, arm.config().pen_position)
        .ok_or_else(|| Error::InvalidTeacher("pen is not reachable".into()))?;
    let mut repertoire: Vec<Vec<Demo>> = vec![Vec::new(); 3];
    const TOL: f64 = 1e-6;
    match spec.kind {
        TeacherKind::Actions => {
            for &q in &points {
                let Some(reach) = ik_action(arm, q) else { continue };
                let execution = CompoundAction::new(vec![reach.clone()])?;
                let (_, raw) = arm.rollout(&execution);
                if close(&raw.tip, &q, TOL) {
                    repertoire[TIP.0].push(Demo {
                        content: DemoContent::Action(execution.clone()),
                        outcome: arm.from_canvas(TIP, &raw.tip),
                        execution,
                    });
                }
                let execution = CompoundAction::new(vec![grasp.clone(), reach])?;
                let (_, raw) = arm.rollout(&execution);
                if let Some(pen) = raw.pen.filter(|p| close(p, &q, TOL)) {
                    repertoire[PEN.0].push(Demo {
                        content: DemoContent::Action(execution.clone()),
                        outcome: arm.from_canvas(PEN, &pen),
                        execution,
                    });
                }
            }
        }
        TeacherKind::Procedures => {
            let reachable: Vec<([f64; 2], PrimitiveAction)> = points
                .iter()
                .filter_map(|&q| ik_action(arm, q).map(|a| (q, a)))
                .collect();
            for (q1, a1) in &reachable {
                for (q2, a2) in &reachable {
                    if q1 == q2 {
                        continue;
                    }
                    let execution =
                        CompoundAction::new(vec![grasp.clone(), a1.clone(), grasp.clone(), a2.clone()])?;
                    let (_, raw) = arm.rollout(&execution);
                    let target = [q1[0], q1[1], q2[0], q2[1]];
                    let Some(drawing) = raw.drawing.filter(|d| close(d, &target, TOL)) else {
                        continue;
                    };
                    let procedure = Procedure {
                        subgoals: vec![arm.from_canvas(PEN, q1), arm.from_canvas(PEN, q2)],
                    };
                    repertoire[DRAWING.0].push(Demo {
                        content: DemoContent::Procedure(procedure),
                        outcome: arm.from_canvas(DRAWING, &drawing),
                        execution,
                    });
                }
            }
        }
    }
    if let Some(cap) = spec.repertoire_size {
        repertoire = subsample(repertoire, cap, rng);
    }
    Teacher::new(spec.name.clone(), repertoire, spec.noise_sd, spec.cost)
}

/// Keeps `cap` demos overall, at least one per non-empty space when possible,
/// spread round-robin across spaces.
fn subsample<R: Rng + ?Sized>(repertoire: Vec<Vec<Demo>>, cap: usize, rng: &mut R) -> Vec<Vec<Demo>> {
    let total: usize = repertoire.iter().map(Vec::len).sum();
    if total <= cap {
        return repertoire;
    }
    let mut quota = vec![0usize; repertoire.len()];
    let mut left = cap;
    while left > 0 {
        let mut progressed = false;
        for (s, demos) in repertoire.iter().enumerate() {
            if left > 0 && quota[s] < demos.len() {
                quota[s] += 1;
                left -= 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    repertoire
        .into_iter()
        .zip(quota)
        .map(|(demos, q)| {
            let mut keep: Vec<usize> = sample(rng, demos.len(), q).into_vec();
            keep.sort_unstable();
            keep.into_iter().map(|i| demos[i].clone()).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arm::WorldConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn arm() -> Arm {
        Arm::new(WorldConfig::default()).unwrap()
    }

    #[test]
    fn poor_teacher_has_three_demos() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = build_teacher(&TeacherSpec::poor_actions(), &arm(), &mut rng).unwrap();
        assert_eq!(t.repertoire_size(), 3);
        assert!(t.is_expert(TIP) && t.is_expert(PEN));
    }

    #[test]
    fn action_teacher_not_expert_in_drawing() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = build_teacher(&TeacherSpec::good_actions(), &arm(), &mut rng).unwrap();
        assert!(!t.is_expert(DRAWING));
        let goal = Outcome::new(DRAWING, vec![0.5; 4]);
        assert!(matches!(
            t.demonstrate_action(&goal, &mut rng).unwrap_err(),
            Error::NotExpert { .. }
        ));
    }

    #[test]
    fn empty_repertoire_rejected() {
        let err = Teacher::new("x", vec![vec![], vec![]], 0.0, 0.7).unwrap_err();
        assert!(matches!(err, Error::InvalidTeacher(_)));
    }

    #[test]
    fn zero_shift_for_own_outcome() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = build_teacher(&TeacherSpec::procedures(), &arm(), &mut rng).unwrap();
        let demo = &t.demos(DRAWING)[7];
        let DemoResponse::Procedure { procedure, .. } = t.demonstrate_procedure(&demo.outcome).unwrap() else {
            panic!()
        };
        assert_eq!(DemoContent::Procedure(procedure), demo.content);
    }

    #[test]
    fn shift_aligns_first_placement() {
        let p = Procedure {
            subgoals: vec![
                Outcome::new(PEN, vec![0.3, 0.3]),
                Outcome::new(PEN, vec![0.6, 0.7]),
            ],
        };
        let o = Outcome::new(DRAWING, vec![0.3, 0.3, 0.6, 0.7]);
        let g = Outcome::new(DRAWING, vec![0.4, 0.3, 0.6, 0.7]);
        let s = shift_procedure(&p, &o, &g);
        assert!((s.subgoals[0].values[0] - 0.4).abs() < 1e-12);
        assert_eq!(s.subgoals[0].values[1], 0.3);
        assert_eq!(s.subgoals[1].values, vec![0.6, 0.7]);
    }
}
