//! Prioritized safe-interval planning over timed motion primitives.
//!
//! Robots rest only at waypoints: every run starts and ends at zero speed, and
//! rotations and waits happen in place. Each robot plans against the padded
//! occupancy windows of all higher-priority robots.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use ordered_float::OrderedFloat;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{occupancy_intervals, rotate_duration, straight_run_profile, KinodynamicParams};
use crate::plan::{plan_cost, ActionKind, ActionPrimitive, Model, Plan, RobotPlan, SoC};
use crate::planners::{Budget, PlanSeries, PlannerConfig, PlannerError};
use crate::validate::continuous_visits;
use crate::world::{Cell, GridMap, Instance, Orientation, RobotTask, Turn};

/// Occupied windows per cell, sorted by start time.
#[derive(Debug, Clone)]
pub struct SafeIntervalTable {
    width: usize,
    cells: Vec<Vec<(f64, f64, usize)>>,
}

impl SafeIntervalTable {
    pub fn new(map: &GridMap) -> Self {
        Self {
            width: map.width(),
            cells: vec![Vec::new(); map.num_cells()],
        }
    }

    fn idx(&self, c: Cell) -> usize {
        c.row as usize * self.width + c.col as usize
    }

    /// Adds an occupied window `[start, end]` of `cell` owned by `robot`.
    pub fn insert(&mut self, cell: Cell, start: f64, end: f64, robot: usize) {
        let i = self.idx(cell);
        let list = &mut self.cells[i];
        let pos = list.partition_point(|w| w.0 <= start);
        list.insert(pos, (start, end, robot));
    }

    /// Occupied windows of `cell`, sorted by start.
    pub fn occupied(&self, cell: Cell) -> &[(f64, f64, usize)] {
        &self.cells[self.idx(cell)]
    }

    /// Free intervals of `cell` (complement of the occupied windows).
    pub fn safe_intervals(&self, cell: Cell) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut lo = f64::NEG_INFINITY;
        for &(s, e, _) in self.occupied(cell) {
            if s > lo {
                out.push((lo, s));
            }
            lo = lo.max(e);
        }
        if lo < f64::INFINITY {
            out.push((lo, f64::INFINITY));
        }
        out
    }

    /// Whether `[start, end]` overlaps no occupied window of `cell` (touching is allowed).
    pub fn is_free(&self, cell: Cell, start: f64, end: f64) -> bool {
        self.occupied(cell)
            .iter()
            .all(|&(s, e, _)| !(start < e && s < end))
    }
}

#[derive(Clone, Copy)]
enum Step {
    Rotate(Turn, u8),
    Run { cells: usize, depart: f64 },
}

struct Node {
    cell: Cell,
    heading: Orientation,
    interval: (f64, f64),
    t: f64,
    parent: usize,
    step: Option<Step>,
}

/// Earliest `tau` in `[lo, hi]` outside every open interval of `forbidden` (sorted by start).
fn earliest_outside(lo: f64, hi: f64, forbidden: &[(f64, f64)]) -> Option<f64> {
    let mut tau = lo;
    for &(fs, fe) in forbidden {
        if fs >= tau {
            break;
        }
        if fe > tau {
            tau = fe;
        }
    }
    (tau <= hi && tau.is_finite()).then_some(tau)
}

/// Lower bound on the time from `(c, o)` to `goal`: one stop-to-stop run over
/// the Manhattan distance plus the least rotation that faces every required direction.
fn heuristic(c: Cell, o: Orientation, goal: Cell, params: &KinodynamicParams) -> f64 {
    let d = c.manhattan(goal) as usize;
    if d == 0 {
        return 0.0;
    }
    let (dr, dc) = (goal.row - c.row, goal.col - c.col);
    let mut need = Vec::with_capacity(2);
    if dr < 0 {
        need.push(Orientation::North);
    }
    if dr > 0 {
        need.push(Orientation::South);
    }
    if dc > 0 {
        need.push(Orientation::East);
    }
    if dc < 0 {
        need.push(Orientation::West);
    }
    let q = need
        .iter()
        .map(|&r| o.quarter_turns_to(r))
        .max()
        .unwrap_or(0);
    straight_run_profile(d, params).total + q as f64 * 90.0 / params.omega
}

/// Plans one robot against `table`; returns its timed actions.
fn plan_robot(
    instance: &Instance,
    task: &RobotTask,
    table: &SafeIntervalTable,
    params: &KinodynamicParams,
    budget: &Budget,
) -> Result<Vec<ActionPrimitive>, PlannerError> {
    let map = &*instance.map;
    let unroutable = PlannerError::Unroutable {
        robot: task.id,
        horizon: 0,
    };
    let start_iv = table.safe_intervals(task.start);
    let Some(&first) = start_iv.first().filter(|iv| iv.0 == f64::NEG_INFINITY) else {
        return Err(unroutable);
    };
    let goal_open = table
        .safe_intervals(task.goal)
        .last()
        .is_some_and(|iv| iv.1 == f64::INFINITY);
    if !goal_open {
        return Err(unroutable);
    }
    let delta = params.safety_margin;
    let max_run = map.width().max(map.height());
    let runs: Vec<(f64, Vec<(f64, f64)>)> = (1..=max_run)
        .map(|n| {
            let profile = straight_run_profile(n, params);
            let cells: Vec<Cell> = (0..=n as i32).map(|i| Cell::new(0, i)).collect();
            let windows = occupancy_intervals(&profile, &cells, 0.0, params)
                .expect("straight chain");
            let offsets = windows.iter().map(|w| (w.start, w.end)).collect();
            (profile.total, offsets)
        })
        .collect();

    let mut nodes = vec![Node {
        cell: task.start,
        heading: task.start_orientation,
        interval: first,
        t: 0.0,
        parent: usize::MAX,
        step: None,
    }];
    let mut open = BinaryHeap::new();
    let h0 = heuristic(task.start, task.start_orientation, task.goal, params);
    open.push(Reverse((OrderedFloat(h0), 0usize)));
    let mut closed: HashSet<(Cell, Orientation, OrderedFloat<f64>)> = HashSet::new();
    let mut expansions = 0u64;

    while let Some(Reverse((_, id))) = open.pop() {
        let (cell, heading, interval, t) = {
            let n = &nodes[id];
            (n.cell, n.heading, n.interval, n.t)
        };
        if !closed.insert((cell, heading, OrderedFloat(interval.0))) {
            continue;
        }
        expansions += 1;
        if expansions % 256 == 0 && budget.timed_out() {
            return Err(PlannerError::TimeLimit { lower_bound: None });
        }
        if cell == task.goal && interval.1 == f64::INFINITY {
            return Ok(actions_of(&nodes, id, params));
        }
        let mut push = |nodes: &mut Vec<Node>, node: Node| {
            if closed.contains(&(node.cell, node.heading, OrderedFloat(node.interval.0))) {
                return;
            }
            let f = node.t + heuristic(node.cell, node.heading, task.goal, params);
            open.push(Reverse((OrderedFloat(f), nodes.len())));
            nodes.push(node);
        };

        for (turn, q) in [(Turn::Left, 1u8), (Turn::Right, 1), (Turn::Right, 2)] {
            let dur = rotate_duration(q, params).expect("valid quarter turns");
            if t + dur + delta <= interval.1 {
                push(
                    &mut nodes,
                    Node {
                        cell,
                        heading: heading.rotated(turn, q),
                        interval,
                        t: t + dur,
                        parent: id,
                        step: Some(Step::Rotate(turn, q)),
                    },
                );
            }
        }

        let mut path = vec![cell];
        for (n, (total, offsets)) in runs.iter().enumerate().map(|(i, r)| (i + 1, r)) {
            let next = path[n - 1].step(heading);
            if !map.is_free(next) {
                break;
            }
            path.push(next);
            // departure times at which an intermediate cell window would overlap a reservation
            let mut forbidden: Vec<(f64, f64)> = Vec::new();
            for (i, &(a, b)) in offsets.iter().enumerate().take(n).skip(1) {
                for &(s, e, _) in table.occupied(path[i]) {
                    forbidden.push((s - b, e - a));
                }
            }
            forbidden.sort_by(|x, y| x.0.total_cmp(&y.0));
            let (_, b0) = offsets[0];
            let (an, bn) = offsets[n];
            for iv in table.safe_intervals(next) {
                let lo = t.max(iv.0 - an);
                let hi = (interval.1 - b0).min(iv.1 - bn);
                if lo > hi {
                    continue;
                }
                if let Some(depart) = earliest_outside(lo, hi, &forbidden) {
                    push(
                        &mut nodes,
                        Node {
                            cell: next,
                            heading,
                            interval: iv,
                            t: depart + total,
                            parent: id,
                            step: Some(Step::Run { cells: n, depart }),
                        },
                    );
                }
            }
        }
    }
    Err(unroutable)
}

fn actions_of(nodes: &[Node], last: usize, params: &KinodynamicParams) -> Vec<ActionPrimitive> {
    let mut chain = Vec::new();
    let mut i = last;
    while nodes[i].parent != usize::MAX {
        chain.push(i);
        i = nodes[i].parent;
    }
    chain.reverse();
    let mut actions = Vec::with_capacity(chain.len());
    for id in chain {
        let node = &nodes[id];
        let prev = &nodes[node.parent];
        match node.step.expect("non-root node has a step") {
            Step::Rotate(dir, quarter_turns) => {
                let dur = rotate_duration(quarter_turns, params).expect("valid quarter turns");
                actions.push(ActionPrimitive::new(
                    ActionKind::Rotate { dir, quarter_turns },
                    prev.t,
                    prev.t + dur,
                ));
            }
            Step::Run { cells, depart } => {
                if depart > prev.t {
                    actions.push(ActionPrimitive::new(ActionKind::Wait, prev.t, depart));
                }
                let run: Vec<Cell> = std::iter::successors(Some(prev.cell), |c| {
                    Some(c.step(prev.heading))
                })
                .take(cells + 1)
                .collect();
                actions.push(ActionPrimitive::new(
                    ActionKind::Move { cells: run },
                    depart,
                    node.t,
                ));
            }
        }
    }
    actions
}

fn commit(
    table: &mut SafeIntervalTable,
    instance: &Instance,
    task: &RobotTask,
    rp: &RobotPlan,
    params: &KinodynamicParams,
) {
    let (windows, _) =
        continuous_visits(task, rp, instance, params).expect("planner output is well formed");
    for w in windows {
        table.insert(w.cell, w.start, w.end, task.id);
    }
}

fn plan_in_order(
    instance: &Instance,
    order: &[usize],
    params: &KinodynamicParams,
    budget: &Budget,
) -> Result<Plan, PlannerError> {
    let mut table = SafeIntervalTable::new(&instance.map);
    let mut robots: Vec<Option<RobotPlan>> = vec![None; instance.num_robots()];
    for &idx in order {
        let task = &instance.robots[idx];
        let actions = plan_robot(instance, task, &table, params, budget)?;
        let rp = RobotPlan {
            id: task.id,
            actions,
        };
        commit(&mut table, instance, task, &rp, params);
        robots[idx] = Some(rp);
    }
    Ok(Plan {
        model: Model::Kinodynamic,
        timestep: 1.0,
        robots: robots.into_iter().map(|r| r.expect("every robot planned")).collect(),
        kinodynamics: Some(*params),
    })
}

fn order_indices(instance: &Instance, order: &[usize]) -> Result<Vec<usize>, PlannerError> {
    let mut seen = vec![false; instance.num_robots()];
    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let idx = instance
            .robots
            .iter()
            .position(|r| r.id == *id)
            .ok_or(PlannerError::UnknownRobot(*id))?;
        if std::mem::replace(&mut seen[idx], true) {
            return Err(PlannerError::BadPriorityOrder);
        }
        out.push(idx);
    }
    if out.len() != instance.num_robots() {
        return Err(PlannerError::BadPriorityOrder);
    }
    Ok(out)
}

/// Plans robots in `priority_order` (ids, highest first) under the kinodynamic model.
pub fn kinodynamic_pp(
    instance: &Instance,
    priority_order: &[usize],
    params: &KinodynamicParams,
    config: &PlannerConfig,
) -> Result<Plan, PlannerError> {
    let order = order_indices(instance, priority_order)?;
    plan_in_order(instance, &order, params, &Budget::new(config))
}

/// Kinodynamic prioritized planning with random restarts. Entries are ranked by
/// summed completion time rounded to whole seconds.
pub fn kinodynamic_pp_restart(
    instance: &Instance,
    params: &KinodynamicParams,
    config: &PlannerConfig,
) -> Result<PlanSeries, PlannerError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut budget = Budget::new(config);
    let mut series = PlanSeries::default();
    let mut order: Vec<usize> = (0..instance.num_robots()).collect();
    while budget.tick() {
        order.shuffle(&mut rng);
        match plan_in_order(instance, &order, params, &budget) {
            Ok(plan) => {
                let soc = SoC(plan_cost(&plan).expect("kinodynamic cost"));
                if series.best().is_none_or(|b| soc < b.soc) {
                    series.push(&budget, soc, plan);
                }
            }
            Err(PlannerError::TimeLimit { .. }) => break,
            Err(_) => {}
        }
    }
    if series.is_empty() {
        return Err(PlannerError::NoSolution(budget.used()));
    }
    Ok(series)
}
