//! Deterministic planar 3-link arm with a pen that can be grasped and used to
//! draw.
//!
//! Three outcome spaces are produced by an episode:
//!
//! | space    | meaning                                    | dim |
//! |----------|--------------------------------------------|-----|
//! | `omega0` | final end-effector position                | 2   |
//! | `omega1` | final pen-tip position, once grasped       | 2   |
//! | `omega2` | first and last drawing placements          | 4   |
//!
//! Reaching is needed to grasp the pen, and a grasped pen is needed to draw,
//! so the spaces form a natural hierarchy.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::learner::Environment;
use crate::types::{
    CompoundAction, Component, Outcome, PrimitiveAction, SpaceId, SpaceSpec, TaskHierarchy,
};

pub const TIP: SpaceId = SpaceId(0);
pub const PEN: SpaceId = SpaceId(1);
pub const DRAWING: SpaceId = SpaceId(2);

/// Number of joints, and therefore of parameters per primitive action.
pub const JOINTS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub links: [f64; JOINTS],
    pub pen_position: [f64; 2],
    pub grasp_radius: f64,
    /// Canvas bounds `[lo, hi]` used on both axes.
    pub canvas: [f64; 2],
    pub micro_steps: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            links: [1.0, 1.0, 1.0],
            pen_position: [1.2, 1.2],
            grasp_radius: 0.15,
            canvas: [-3.0, 3.0],
            micro_steps: 10,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grasp_radius > 0.0) {
            return Err(Error::InvalidConfig("grasp radius must be positive".into()));
        }
        if self.links.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::InvalidConfig("link lengths must be positive".into()));
        }
        let reach: f64 = self.links.iter().sum();
        if norm(self.pen_position) > reach {
            return Err(Error::InvalidConfig("pen position is out of reach".into()));
        }
        if !(self.canvas[0] < self.canvas[1]) || self.canvas[0] > -reach || self.canvas[1] < reach
        {
            return Err(Error::InvalidConfig(
                "canvas must contain the whole workspace".into(),
            ));
        }
        if self.micro_steps == 0 {
            return Err(Error::InvalidConfig("micro steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    pub joints: [f64; JOINTS],
    pub pen_held: bool,
    pub pen_tip: [f64; 2],
    pub placements: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct Arm {
    config: WorldConfig,
}

impl Arm {
    pub fn new(config: WorldConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn reset(&self) -> ArmState {
        ArmState {
            joints: [0.0; JOINTS],
            pen_held: false,
            pen_tip: self.config.pen_position,
            placements: Vec::new(),
        }
    }

    pub fn forward_kinematics(&self, joints: &[f64; JOINTS]) -> [f64; 2] {
        forward_kinematics(&self.config.links, joints)
    }

    /// Moves the joints linearly to the action's targets over the configured
    /// number of micro-steps, grasping the pen when the tip passes close to it.
    /// A placement is drawn at the end of every primitive that started with
    /// the pen already in hand.
    pub fn step_primitive(&self, state: &mut ArmState, action: &PrimitiveAction) {
        let target: [f64; JOINTS] =
            std::array::from_fn(|i| (action.params[i] * PI).clamp(-PI, PI));
        let start = state.joints;
        let held_at_start = state.pen_held;
        let steps = self.config.micro_steps;
        for step in 1..=steps {
            let t = step as f64 / steps as f64;
            state.joints =
                std::array::from_fn(|i| (start[i] + (target[i] - start[i]) * t).clamp(-PI, PI));
            let tip = self.forward_kinematics(&state.joints);
            if !state.pen_held && dist(tip, self.config.pen_position) <= self.config.grasp_radius {
                state.pen_held = true;
            }
            if state.pen_held {
                state.pen_tip = tip;
            }
        }
        if held_at_start {
            state.placements.push(state.pen_tip);
        }
    }

    /// Runs a compound action from the reset state and returns raw outcomes.
    pub fn rollout(&self, compound: &CompoundAction) -> (ArmState, RawOutcomes) {
        let mut state = self.reset();
        for a in &compound.actions {
            self.step_primitive(&mut state, a);
        }
        let tip = self.forward_kinematics(&state.joints);
        let pen = state.pen_held.then_some(state.pen_tip);
        let drawing = (state.placements.len() >= 2).then(|| {
            let first = state.placements[0];
            let last = state.placements[state.placements.len() - 1];
            [first[0], first[1], last[0], last[1]]
        });
        (state, RawOutcomes { tip, pen, drawing })
    }

    /// Default three-level hierarchy: tip from actions, pen from actions or
    /// tip subgoals, drawing from actions or pen subgoals.
    pub fn hierarchy(&self) -> TaskHierarchy {
        let [lo, hi] = self.config.canvas;
        TaskHierarchy::new(
            JOINTS,
            vec![
                SpaceSpec::new("omega0", vec![lo; 2], vec![hi; 2]),
                SpaceSpec::new("omega1", vec![lo; 2], vec![hi; 2]),
                SpaceSpec::new("omega2", vec![lo; 4], vec![hi; 4]),
            ],
            vec![
                vec![Component::Actions],
                vec![Component::Actions, Component::Space(TIP)],
                vec![Component::Actions, Component::Space(PEN)],
            ],
        )
        .expect("static hierarchy is valid")
    }

    fn normalize(&self, raw: &[f64]) -> Vec<f64> {
        let [lo, hi] = self.config.canvas;
        raw.iter()
            .map(|&x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0))
            .collect()
    }

    fn denormalize(&self, unit: &[f64]) -> Vec<f64> {
        let [lo, hi] = self.config.canvas;
        unit.iter().map(|&u| lo + u * (hi - lo)).collect()
    }

    /// Raw canvas coordinates of a normalized outcome.
    pub fn to_canvas(&self, outcome: &Outcome) -> Vec<f64> {
        self.denormalize(&outcome.values)
    }

    /// Normalized outcome for raw canvas coordinates.
    pub fn from_canvas(&self, space: SpaceId, raw: &[f64]) -> Outcome {
        Outcome::new(space, self.normalize(raw))
    }

    /// Joint angles reaching `target` with the third joint fixed at zero.
    pub fn inverse_kinematics(&self, target: [f64; 2], elbow: Elbow) -> Option<[f64; JOINTS]> {
        let [l1, l2, l3] = self.config.links;
        let l23 = l2 + l3;
        let [x, y] = target;
        let c2 = (x * x + y * y - l1 * l1 - l23 * l23) / (2.0 * l1 * l23);
        if !(-1.0..=1.0).contains(&c2) {
            return None;
        }
        let q2 = match elbow {
            Elbow::Positive => c2.acos(),
            Elbow::Negative => -c2.acos(),
        };
        let q1 = wrap(y.atan2(x) - (l23 * q2.sin()).atan2(l1 + l23 * q2.cos()));
        Some([q1, q2, 0.0])
    }

    /// Normalized action whose targets are the given joint angles.
    pub fn action_for(joints: &[f64; JOINTS]) -> PrimitiveAction {
        PrimitiveAction::clamped(joints.iter().map(|q| q / PI).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elbow {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawOutcomes {
    pub tip: [f64; 2],
    pub pen: Option<[f64; 2]>,
    pub drawing: Option<[f64; 4]>,
}

impl Environment for Arm {
    fn context(&self) -> Vec<f64> {
        self.reset().joints.to_vec()
    }

    fn execute(&self, compound: &CompoundAction) -> Vec<Option<Outcome>> {
        let (_, raw) = self.rollout(compound);
        vec![
            Some(Outcome::new(TIP, self.normalize(&raw.tip))),
            raw.pen.map(|p| Outcome::new(PEN, self.normalize(&p))),
            raw.drawing.map(|d| Outcome::new(DRAWING, self.normalize(&d))),
        ]
    }
}

pub fn forward_kinematics(links: &[f64; JOINTS], joints: &[f64; JOINTS]) -> [f64; 2] {
    let mut theta = 0.0;
    let mut tip = [0.0, 0.0];
    for (l, q) in links.iter().zip(joints) {
        theta += q;
        tip[0] += l * theta.cos();
        tip[1] += l * theta.sin();
    }
    tip
}

fn wrap(a: f64) -> f64 {
    let mut a = a;
    while a > PI {
        a -= 2.0 * PI;
    }
    while a < -PI {
        a += 2.0 * PI;
    }
    a
}

fn norm(p: [f64; 2]) -> f64 {
    p[0].hypot(p[1])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
