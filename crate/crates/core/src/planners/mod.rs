//! Discrete MAPF planners over the standard and rotation models.
//!
//! All planners share one low-level search ([`spacetime_astar`]) and the same
//! k-robust occupancy semantics as [`crate::validate`]: a robot may not be in
//! a cell within `k` timesteps of another robot's presence there.

mod astar;
mod cbs;
mod conflicts;
mod lns;
mod pbs;
mod pp;
mod reservation;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use web_time::Instant;

pub use astar::{spacetime_astar, HeuristicCache};
pub use cbs::cbs_plan;
pub use conflicts::{count_conflicting_pairs, first_conflict, Conflict};
pub use lns::lns_improve;
pub use pbs::pbs_plan;
pub use pp::{pp_restart_anytime, prioritized_plan};
pub use reservation::ReservationTable;

use crate::plan::{Model, Plan, RobotPlan, SoC};
use crate::world::{Cell, Instance, Orientation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("robot {robot} has no path within the horizon of {horizon} timesteps")]
    Unroutable { robot: usize, horizon: u32 },
    #[error("time limit exhausted{}", lower_bound.map(|b| format!(" (best lower bound {b})")).unwrap_or_default())]
    TimeLimit { lower_bound: Option<u64> },
    #[error("search space exhausted without a solution")]
    Exhausted,
    #[error("planner does not support the {0:?} model")]
    UnsupportedModel(Model),
    #[error("no restart produced a plan ({0} attempts)")]
    NoSolution(u64),
    #[error("unknown robot {0}")]
    UnknownRobot(usize),
    #[error("priority order is not a permutation of the robot ids")]
    BadPriorityOrder,
    #[error("initial plan is invalid: {0}")]
    InvalidInitial(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlannerConfig {
    pub model: Model,
    /// Robustness: occupancy window half-width in timesteps.
    pub k: u32,
    /// Wall-clock budget, seconds.
    pub time_limit: f64,
    /// Iteration budget for anytime planners (restarts / LNS rounds) and node
    /// budget for tree searches. Fixed budgets make runs machine-independent.
    pub iteration_limit: Option<u64>,
    pub seed: u64,
    /// Timestep cap for the low-level search; `None` uses 4 × (width + height).
    pub horizon_cap: Option<u32>,
    /// LNS neighborhood size.
    pub neighborhood: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            model: Model::Standard,
            k: 0,
            time_limit: 60.0,
            iteration_limit: None,
            seed: 0,
            horizon_cap: None,
            neighborhood: 8,
        }
    }
}

impl PlannerConfig {
    pub fn new(model: Model) -> Self {
        Self {
            model,
            ..Default::default()
        }
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit = seconds;
        self
    }

    pub fn with_iterations(mut self, n: u64) -> Self {
        self.iteration_limit = Some(n);
        self
    }

    pub fn horizon(&self, instance: &Instance) -> u32 {
        self.horizon_cap
            .unwrap_or(4 * (instance.map.width() + instance.map.height()) as u32)
    }

    pub(crate) fn check_discrete(&self) -> Result<(), PlannerError> {
        if self.model.is_discrete() {
            Ok(())
        } else {
            Err(PlannerError::UnsupportedModel(self.model))
        }
    }
}

/// Wall-clock deadline plus an optional iteration budget.
#[derive(Debug, Clone)]
pub struct Budget {
    start: Instant,
    time_limit: f64,
    iterations: Option<u64>,
    used: u64,
}

impl Budget {
    pub fn new(config: &PlannerConfig) -> Self {
        Self {
            start: Instant::now(),
            time_limit: config.time_limit,
            iterations: config.iteration_limit,
            used: 0,
        }
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn timed_out(&self) -> bool {
        self.elapsed() >= self.time_limit
    }

    /// Consumes one iteration; false once either budget is spent.
    pub fn tick(&mut self) -> bool {
        if self.iterations.is_some_and(|n| self.used >= n) || self.timed_out() {
            return false;
        }
        self.used += 1;
        true
    }

    pub fn used(&self) -> u64 {
        self.used
    }
}

/// Discrete pose of a robot at one timestep.
pub type State = (Cell, Orientation);

/// One pose per timestep, from t = 0 to arrival at the goal.
pub type Path = Vec<State>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConstraintKind {
    /// Robot may not occupy `cell` at any timestep in `from..=to`.
    Vertex { cell: Cell, from: i64, to: i64 },
    /// Robot may not traverse `from -> to` during timestep `t -> t+1`.
    Edge { from: Cell, to: Cell, t: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub robot: usize,
    #[serde(flatten)]
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn vertex(robot: usize, cell: Cell, from: i64, to: i64) -> Self {
        Self {
            robot,
            kind: ConstraintKind::Vertex { cell, from, to },
        }
    }

    pub fn edge(robot: usize, from: Cell, to: Cell, t: i64) -> Self {
        Self {
            robot,
            kind: ConstraintKind::Edge { from, to, t },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesEntry {
    /// Seconds since the planner started.
    pub wall_clock: f64,
    pub iteration: u64,
    pub soc: SoC,
    pub plan: Plan,
}

/// Plans of strictly decreasing cost found by an anytime planner.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlanSeries {
    pub entries: Vec<SeriesEntry>,
}

impl PlanSeries {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best(&self) -> Option<&SeriesEntry> {
        self.entries.last()
    }

    pub(crate) fn push(&mut self, budget: &Budget, soc: SoC, plan: Plan) {
        debug_assert!(self.entries.last().is_none_or(|e| soc < e.soc));
        self.entries.push(SeriesEntry {
            wall_clock: budget.elapsed(),
            iteration: budget.used(),
            soc,
            plan,
        });
    }
}

pub(crate) fn path_cost(path: &Path) -> u64 {
    path.len().saturating_sub(1) as u64
}

pub(crate) fn soc_of(paths: &[Path]) -> SoC {
    SoC(paths.iter().map(path_cost).sum())
}

/// Assembles a discrete plan from per-robot paths in instance order.
pub(crate) fn plan_from_paths(model: Model, instance: &Instance, paths: &[Path]) -> Plan {
    let robots = instance
        .robots
        .iter()
        .zip(paths)
        .map(|(task, path)| RobotPlan::from_states(task.id, path, 1.0))
        .collect();
    Plan::discrete(model, robots)
}

/// Recovers per-timestep poses from a discrete plan, in instance order.
pub(crate) fn paths_from_plan(plan: &Plan, instance: &Instance) -> Result<Vec<Path>, PlannerError> {
    instance
        .robots
        .iter()
        .map(|task| {
            let rp = plan
                .robot(task.id)
                .ok_or(PlannerError::UnknownRobot(task.id))?;
            let mut pose = (task.start, task.start_orientation);
            let mut path = vec![pose];
            for a in &rp.actions {
                let steps = (a.duration() / plan.timestep).round() as usize;
                let next = RobotPlan {
                    id: rp.id,
                    actions: vec![a.clone()],
                }
                .final_pose(pose.0, pose.1);
                let next = if plan.model == Model::Standard {
                    (next.0, pose.1)
                } else {
                    next
                };
                for _ in 1..steps {
                    path.push(pose);
                }
                path.push(next);
                pose = next;
            }
            Ok(path)
        })
        .collect()
}
