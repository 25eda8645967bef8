//! Unified plan representation for the standard, rotation and kinodynamic models.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinodynamics::KinodynamicParams;
use crate::world::{Cell, Orientation, Turn};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("plan mixes model semantics: {0}")]
    MixedModel(String),
    #[error("sum of costs is defined for discrete plans only; use total_completion_seconds")]
    NotDiscrete,
    #[error("plan references unknown robot id {0}")]
    UnknownRobot(usize),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid plan json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Standard,
    Rotation,
    Kinodynamic,
}

impl Model {
    pub fn is_discrete(self) -> bool {
        !matches!(self, Model::Kinodynamic)
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Standard => "standard",
            Model::Rotation => "rotation",
            Model::Kinodynamic => "kinodynamic",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(Model::Standard),
            "rotation" => Ok(Model::Rotation),
            "kinodynamic" => Ok(Model::Kinodynamic),
            other => Err(format!("unknown model {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ActionKind {
    /// Straight run through `cells`; the first cell is the origin.
    Move { cells: Vec<Cell> },
    Rotate {
        dir: Turn,
        #[serde(rename = "turns")]
        quarter_turns: u8,
    },
    Wait,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionPrimitive {
    #[serde(flatten)]
    pub kind: ActionKind,
    pub t0: f64,
    pub t1: f64,
}

impl ActionPrimitive {
    pub fn new(kind: ActionKind, t0: f64, t1: f64) -> Self {
        Self { kind, t0, t1 }
    }

    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn is_wait(&self) -> bool {
        matches!(self.kind, ActionKind::Wait)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotPlan {
    pub id: usize,
    pub actions: Vec<ActionPrimitive>,
}

impl RobotPlan {
    /// Builds a discrete robot plan from its state at every timestep `0..=T`.
    ///
    /// Consecutive states must differ by at most one unit action. Trailing
    /// waits are dropped.
    pub fn from_states(id: usize, states: &[(Cell, Orientation)], timestep: f64) -> Self {
        let mut actions = Vec::with_capacity(states.len().saturating_sub(1));
        for (t, pair) in states.windows(2).enumerate() {
            let ((c0, o0), (c1, o1)) = (pair[0], pair[1]);
            let kind = if c0 != c1 {
                ActionKind::Move {
                    cells: vec![c0, c1],
                }
            } else if o0 != o1 {
                let (dir, quarter_turns) = o0.turn_to(o1).expect("orientation changed");
                ActionKind::Rotate { dir, quarter_turns }
            } else {
                ActionKind::Wait
            };
            actions.push(ActionPrimitive::new(
                kind,
                t as f64 * timestep,
                (t + 1) as f64 * timestep,
            ));
        }
        while actions.last().is_some_and(ActionPrimitive::is_wait) {
            actions.pop();
        }
        Self { id, actions }
    }

    /// Time at which the robot performs its last non-wait action.
    pub fn completion_time(&self) -> f64 {
        self.actions
            .iter()
            .rev()
            .find(|a| !a.is_wait())
            .map(|a| a.t1)
            .unwrap_or(0.0)
    }

    pub fn rotation_count(&self) -> usize {
        self.actions
            .iter()
            .filter(|a| matches!(a.kind, ActionKind::Rotate { .. }))
            .count()
    }

    /// Cell and heading after executing every action, starting from the given pose.
    pub fn final_pose(&self, start: Cell, orient: Orientation) -> (Cell, Orientation) {
        self.actions
            .iter()
            .fold((start, orient), |(c, o), a| match &a.kind {
                ActionKind::Move { cells } => {
                    let end = *cells.last().unwrap_or(&c);
                    let heading = cells
                        .len()
                        .checked_sub(2)
                        .and_then(|i| cells[i].direction_to(cells[i + 1]))
                        .unwrap_or(o);
                    (end, heading)
                }
                ActionKind::Rotate { dir, quarter_turns } => (c, o.rotated(*dir, *quarter_turns)),
                ActionKind::Wait => (c, o),
            })
    }
}

/// Sum of costs in timesteps. Trailing waits at the goal are not counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SoC(pub u64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub model: Model,
    /// Seconds per timestep for discrete models.
    pub timestep: f64,
    pub robots: Vec<RobotPlan>,
    /// Motion parameters the plan was timed with (kinodynamic plans only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinodynamics: Option<KinodynamicParams>,
}

impl Plan {
    pub fn discrete(model: Model, robots: Vec<RobotPlan>) -> Self {
        debug_assert!(model.is_discrete());
        Self {
            model,
            timestep: 1.0,
            robots,
            kinodynamics: None,
        }
    }

    pub fn robot(&self, id: usize) -> Option<&RobotPlan> {
        self.robots.iter().find(|r| r.id == id)
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PlanError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PlanError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PlanError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Checks that every action is expressible in the plan's model.
    pub fn check_model(&self) -> Result<(), PlanError> {
        for r in &self.robots {
            for (i, a) in r.actions.iter().enumerate() {
                let here = || format!("robot {} action {i}", r.id);
                if self.model.is_discrete() {
                    let steps = a.t0 / self.timestep;
                    let steps1 = a.t1 / self.timestep;
                    if (steps - steps.round()).abs() > 1e-9 || (steps1 - steps1.round()).abs() > 1e-9
                    {
                        return Err(PlanError::MixedModel(format!(
                            "{}: non-integer timestep",
                            here()
                        )));
                    }
                }
                match &a.kind {
                    ActionKind::Rotate { .. } if self.model == Model::Standard => {
                        return Err(PlanError::MixedModel(format!(
                            "{}: rotation in a standard-model plan",
                            here()
                        )))
                    }
                    ActionKind::Move { cells } if self.model.is_discrete() && cells.len() != 2 => {
                        return Err(PlanError::MixedModel(format!(
                            "{}: multi-cell run in a discrete plan",
                            here()
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Sum over robots of the timestep at which each robot finishes acting.
pub fn sum_of_costs(plan: &Plan) -> Result<SoC, PlanError> {
    if !plan.model.is_discrete() {
        return Err(PlanError::NotDiscrete);
    }
    plan.check_model()?;
    let total = plan
        .robots
        .iter()
        .map(|r| (r.completion_time() / plan.timestep).round() as u64)
        .sum();
    Ok(SoC(total))
}

/// Kinodynamic analogue of the sum of costs: summed completion times in seconds.
pub fn total_completion_seconds(plan: &Plan) -> f64 {
    plan.robots.iter().map(RobotPlan::completion_time).sum()
}

/// SoC for discrete plans; summed seconds (rounded) for kinodynamic ones.
pub fn plan_cost(plan: &Plan) -> Result<u64, PlanError> {
    match plan.model {
        Model::Kinodynamic => Ok(total_completion_seconds(plan).round() as u64),
        _ => sum_of_costs(plan).map(|s| s.0),
    }
}
