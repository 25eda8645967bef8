//! Model-aware plan validation: vertex, swap and cycle conflicts, continuity, endpoints.
//!
//! Discrete plans are checked on integer timesteps. A robot's stay in a cell is
//! a visit `[first, last]`; two visits of different robots to one cell
//! conflict under robustness `k` when `first_a <= last_b + k` and
//! `first_b <= last_a + k`. Kinodynamic plans are checked on continuous
//! per-cell occupancy windows padded by the safety margin.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::kinodynamics::{
    is_collinear_chain, occupancy_intervals, rotate_duration, straight_run_profile, CellWindow,
};
use crate::plan::{ActionKind, Model, Plan, RobotPlan};
use crate::world::{Cell, Instance, RobotTask};

const TIME_EPS: f64 = 1e-6;
const OVERLAP_EPS: f64 = 1e-9;
/// Timestep standing in for "forever" (robot parked at its goal).
pub const FOREVER: i64 = i64::MAX / 4;

#[derive(Debug, Error, PartialEq)]
pub enum ValidationError {
    #[error("plan references unknown robot id {0}")]
    UnknownRobot(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Violation {
    /// Two robots in one cell at overlapping (k-widened) times.
    Vertex {
        a: usize,
        b: usize,
        cell: Cell,
        a_window: (f64, f64),
        b_window: (f64, f64),
    },
    /// Two robots exchanging adjacent cells in the same timestep.
    Swap {
        a: usize,
        b: usize,
        a_from: Cell,
        b_from: Cell,
        t: i64,
    },
    /// Three or more robots rotating along a cycle of cells in one timestep.
    Cycle { robots: Vec<usize>, t: i64 },
    Discontinuity {
        robot: usize,
        action: usize,
        reason: String,
    },
    Endpoint { robot: usize, reason: String },
}

impl Violation {
    pub fn is_conflict(&self) -> bool {
        matches!(
            self,
            Violation::Vertex { .. } | Violation::Swap { .. } | Violation::Cycle { .. }
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn conflicts(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.is_conflict())
    }
}

#[derive(Debug, Clone, Copy)]
struct Visit {
    robot: usize,
    first: i64,
    last: i64,
}

#[derive(Debug, Clone, Copy)]
struct StepMove {
    robot: usize,
    from: Cell,
    to: Cell,
}

/// Checks a plan against an instance under robustness parameter `k`
/// (ignored for kinodynamic plans, which use the safety margin instead).
pub fn validate(
    plan: &Plan,
    instance: &Instance,
    k: u32,
) -> Result<ValidationReport, ValidationError> {
    for r in &plan.robots {
        if instance.robot(r.id).is_none() {
            return Err(ValidationError::UnknownRobot(r.id));
        }
    }
    let mut violations = Vec::new();
    let mut tasks: Vec<(&RobotTask, &RobotPlan)> = Vec::new();
    for task in &instance.robots {
        match plan.robot(task.id) {
            Some(rp) => tasks.push((task, rp)),
            None => violations.push(Violation::Endpoint {
                robot: task.id,
                reason: "robot missing from plan".into(),
            }),
        }
    }
    // non-finite times make every later check meaningless
    let before = violations.len();
    for (task, rp) in &tasks {
        if let Some(i) = rp.actions.iter().position(|a| !a.t0.is_finite() || !a.t1.is_finite()) {
            violations.push(Violation::Discontinuity {
                robot: task.id,
                action: i,
                reason: "action time is not finite".into(),
            });
        }
    }
    if violations.len() > before {
        return Ok(ValidationReport { violations });
    }
    if plan.model.is_discrete() {
        validate_discrete(plan, instance, &tasks, k as i64, &mut violations);
    } else {
        validate_continuous(plan, instance, &tasks, &mut violations);
    }
    Ok(ValidationReport { violations })
}

fn validate_discrete(
    plan: &Plan,
    instance: &Instance,
    tasks: &[(&RobotTask, &RobotPlan)],
    k: i64,
    out: &mut Vec<Violation>,
) {
    let map = &instance.map;
    let step = plan.timestep;
    let mut visits: BTreeMap<Cell, Vec<Visit>> = BTreeMap::new();
    let mut moves: BTreeMap<i64, Vec<StepMove>> = BTreeMap::new();

    for &(task, rp) in tasks {
        let id = task.id;
        let mut cell = task.start;
        let mut heading = task.start_orientation;
        let mut t: i64 = 0;
        let mut entered: i64 = 0;
        let mut broken = false;
        for (i, a) in rp.actions.iter().enumerate() {
            let mut fail = |reason: String| {
                out.push(Violation::Discontinuity {
                    robot: id,
                    action: i,
                    reason,
                });
            };
            let t0 = a.t0 / step;
            let t1 = a.t1 / step;
            if (t0 - t0.round()).abs() > TIME_EPS || (t1 - t1.round()).abs() > TIME_EPS {
                fail("action times are not whole timesteps".into());
                broken = true;
                break;
            }
            let (t0, t1) = (t0.round() as i64, t1.round() as i64);
            if t0 != t {
                fail(format!("starts at timestep {t0}, previous action ended at {t}"));
                broken = true;
                break;
            }
            let dur = t1 - t0;
            match &a.kind {
                ActionKind::Move { cells } => {
                    if cells.len() != 2 || dur != 1 {
                        fail("discrete moves span exactly one cell in one timestep".into());
                        broken = true;
                        break;
                    }
                    if cells[0] != cell {
                        fail(format!("teleport: at {cell}, move starts from {}", cells[0]));
                        broken = true;
                        break;
                    }
                    let to = cells[1];
                    let Some(dir) = cell.direction_to(to) else {
                        fail(format!("{cell} -> {to} is not a unit step"));
                        broken = true;
                        break;
                    };
                    if !map.is_free(to) {
                        fail(format!("moves into blocked cell {to}"));
                        broken = true;
                        break;
                    }
                    if plan.model == Model::Rotation && dir != heading {
                        fail(format!("moves {dir:?} while facing {heading:?}"));
                        broken = true;
                        break;
                    }
                    visits.entry(cell).or_default().push(Visit {
                        robot: id,
                        first: entered,
                        last: t,
                    });
                    moves.entry(t).or_default().push(StepMove {
                        robot: id,
                        from: cell,
                        to,
                    });
                    cell = to;
                    heading = dir;
                    entered = t1;
                }
                ActionKind::Rotate { dir, quarter_turns } => {
                    if plan.model == Model::Standard {
                        fail("rotation in a standard-model plan".into());
                        broken = true;
                        break;
                    }
                    if !(1..=2).contains(quarter_turns) || dur != *quarter_turns as i64 {
                        fail("a rotation takes one timestep per quarter turn".into());
                        broken = true;
                        break;
                    }
                    heading = heading.rotated(*dir, *quarter_turns);
                }
                ActionKind::Wait => {
                    if dur < 1 {
                        fail("wait shorter than one timestep".into());
                        broken = true;
                        break;
                    }
                }
            }
            t = t1;
        }
        if broken {
            continue;
        }
        visits.entry(cell).or_default().push(Visit {
            robot: id,
            first: entered,
            last: FOREVER,
        });
        if cell != task.goal {
            out.push(Violation::Endpoint {
                robot: id,
                reason: format!("ends at {cell}, goal is {}", task.goal),
            });
        }
    }

    for (&cell, vs) in &visits {
        for (i, a) in vs.iter().enumerate() {
            for b in &vs[i + 1..] {
                if a.robot == b.robot {
                    continue;
                }
                if a.first <= b.last.saturating_add(k) && b.first <= a.last.saturating_add(k) {
                    let (a, b) = if a.robot < b.robot { (a, b) } else { (b, a) };
                    out.push(Violation::Vertex {
                        a: a.robot,
                        b: b.robot,
                        cell,
                        a_window: (a.first as f64 * step, window_end(a.last, step)),
                        b_window: (b.first as f64 * step, window_end(b.last, step)),
                    });
                }
            }
        }
    }

    for (&t, ms) in &moves {
        let by_from: HashMap<Cell, &StepMove> = ms.iter().map(|m| (m.from, m)).collect();
        for m in ms {
            // walk the chain of robots each vacating the cell the previous one enters
            let mut chain = vec![m.robot];
            let mut cur = m;
            let closed = loop {
                match by_from.get(&cur.to) {
                    Some(next) if next.robot == m.robot => break true,
                    Some(next) if chain.contains(&next.robot) => break false,
                    Some(next) => {
                        chain.push(next.robot);
                        cur = next;
                    }
                    None => break false,
                }
            };
            // report each cycle once, from its smallest robot id
            if !closed || chain.iter().min() != Some(&m.robot) {
                continue;
            }
            if chain.len() == 2 {
                let other = by_from[&m.to];
                out.push(Violation::Swap {
                    a: m.robot,
                    b: other.robot,
                    a_from: m.from,
                    b_from: other.from,
                    t,
                });
            } else {
                out.push(Violation::Cycle { robots: chain, t });
            }
        }
    }
}

fn window_end(last: i64, step: f64) -> f64 {
    if last >= FOREVER {
        f64::INFINITY
    } else {
        last as f64 * step
    }
}

/// Per-cell occupancy windows of one kinodynamic robot plan, in visit order.
///
/// The robot is present at its start since `-inf` and stays at its final cell
/// forever. Errors describe the first action that cannot be executed.
pub(crate) fn continuous_visits(
    task: &RobotTask,
    rp: &RobotPlan,
    instance: &Instance,
    params: &crate::kinodynamics::KinodynamicParams,
) -> Result<(Vec<CellWindow>, Cell), (usize, String)> {
    let map = &instance.map;
    let mut cell = task.start;
    let mut heading = task.start_orientation;
    let mut t = 0.0;
    let mut visits = vec![CellWindow {
        cell,
        start: f64::NEG_INFINITY,
        end: f64::NEG_INFINITY,
    }];
    let push = |visits: &mut Vec<CellWindow>, w: CellWindow| {
        let last = visits.last_mut().expect("start visit");
        if last.cell == w.cell {
            last.start = last.start.min(w.start);
            last.end = last.end.max(w.end);
        } else {
            visits.push(w);
        }
    };
    for (i, a) in rp.actions.iter().enumerate() {
        if (a.t0 - t).abs() > TIME_EPS {
            return Err((i, format!("starts at {:.6} s, previous action ended at {t:.6} s", a.t0)));
        }
        match &a.kind {
            ActionKind::Move { cells } => {
                if cells.len() < 2 || cells[0] != cell {
                    return Err((i, format!("teleport: at {cell}, run starts elsewhere")));
                }
                if !is_collinear_chain(cells) {
                    return Err((i, "run is not a straight chain of adjacent cells".into()));
                }
                if let Some(bad) = cells.iter().find(|c| !map.is_free(**c)) {
                    return Err((i, format!("run crosses blocked cell {bad}")));
                }
                let dir = cells[0].direction_to(cells[1]).expect("collinear chain");
                if dir != heading {
                    return Err((i, format!("runs {dir:?} while facing {heading:?}")));
                }
                let profile = straight_run_profile(cells.len() - 1, params);
                if (a.duration() - profile.total).abs() > TIME_EPS {
                    return Err((
                        i,
                        format!(
                            "run of {} cells lasts {:.6} s, profile needs {:.6} s",
                            cells.len() - 1,
                            a.duration(),
                            profile.total
                        ),
                    ));
                }
                let windows = occupancy_intervals(&profile, cells, a.t0, params)
                    .map_err(|e| (i, e.to_string()))?;
                for w in windows {
                    push(&mut visits, w);
                }
                cell = *cells.last().expect("non-empty run");
            }
            ActionKind::Rotate { dir, quarter_turns } => {
                let need = rotate_duration(*quarter_turns, params).map_err(|e| (i, e.to_string()))?;
                if (a.duration() - need).abs() > TIME_EPS {
                    return Err((i, format!("rotation lasts {:.6} s, needs {need:.6} s", a.duration())));
                }
                heading = heading.rotated(*dir, *quarter_turns);
                push(&mut visits, pad(cell, a.t0, a.t1, params.safety_margin));
            }
            ActionKind::Wait => {
                if a.duration() < -TIME_EPS {
                    return Err((i, "negative wait".into()));
                }
                push(&mut visits, pad(cell, a.t0, a.t1, params.safety_margin));
            }
        }
        t = a.t1;
    }
    visits.last_mut().expect("start visit").end = f64::INFINITY;
    Ok((visits, cell))
}

fn pad(cell: Cell, t0: f64, t1: f64, delta: f64) -> CellWindow {
    CellWindow {
        cell,
        start: t0 - delta,
        end: t1 + delta,
    }
}

fn validate_continuous(
    plan: &Plan,
    instance: &Instance,
    tasks: &[(&RobotTask, &RobotPlan)],
    out: &mut Vec<Violation>,
) {
    let params = plan.kinodynamics.unwrap_or_default();
    let mut by_cell: BTreeMap<Cell, Vec<(usize, CellWindow)>> = BTreeMap::new();
    for &(task, rp) in tasks {
        match continuous_visits(task, rp, instance, &params) {
            Ok((visits, end)) => {
                for w in visits {
                    by_cell.entry(w.cell).or_default().push((task.id, w));
                }
                if end != task.goal {
                    out.push(Violation::Endpoint {
                        robot: task.id,
                        reason: format!("ends at {end}, goal is {}", task.goal),
                    });
                }
            }
            Err((action, reason)) => out.push(Violation::Discontinuity {
                robot: task.id,
                action,
                reason,
            }),
        }
    }
    for (&cell, ws) in &by_cell {
        for (i, (ra, a)) in ws.iter().enumerate() {
            for (rb, b) in &ws[i + 1..] {
                if ra == rb {
                    continue;
                }
                if a.start < b.end - OVERLAP_EPS && b.start < a.end - OVERLAP_EPS {
                    let ((ra, a), (rb, b)) = if ra < rb { ((ra, a), (rb, b)) } else { ((rb, b), (ra, a)) };
                    out.push(Violation::Vertex {
                        a: *ra,
                        b: *rb,
                        cell,
                        a_window: (a.start, a.end),
                        b_window: (b.start, b.end),
                    });
                }
            }
        }
    }
}
