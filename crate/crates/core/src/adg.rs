//! Action dependency graph and the execution-monitoring dispatch loop.
//!
//! Every plan action becomes a node; kinodynamic runs are split into one node
//! per cell entered. Type-1 edges chain one robot's nodes. Type-2 edges encode
//! the planned passing order at shared cells: the later visitor may enter a
//! cell only once the earlier visitor has moved on to its next cell.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::FeatureVector;
use crate::kinodynamics::{occupancy_intervals, straight_run_profile, KinodynamicParams};
use crate::plan::{plan_cost, ActionKind, Model, Plan};
use crate::validate::{validate, ValidationError, Violation};
use crate::world::{Cell, Instance, Orientation, Turn};

#[derive(Debug, Error)]
pub enum AdgError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("plan is invalid ({} violation(s)); first: {:?}", .0.len(), .0.first())]
    InvalidPlan(Vec<Violation>),
    #[error("robots {a} and {b} are planned to enter {cell} at the same time {t}")]
    EntryTie { a: usize, b: usize, cell: Cell, t: f64 },
    #[error("robot {parked} stays in {cell} forever but robot {later} enters it afterwards")]
    ParkedCell { cell: Cell, parked: usize, later: usize },
    #[error("dependency graph has a cycle through {0} node(s)")]
    Cyclic(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeAction {
    /// Drive from the center of `from` to the center of the adjacent cell `to`.
    Move { from: Cell, to: Cell },
    Rotate { dir: Turn, quarter_turns: u8 },
    Wait { duration: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct AdgNode {
    pub robot: usize,
    /// Position in the robot's node chain, contiguous from 0.
    pub index: usize,
    /// Cell the robot is in once the node is done.
    pub cell: Cell,
    /// Planned time at which the robot starts entering `cell` (moves) or starts the action.
    pub planned_enter: f64,
    pub action: NodeAction,
    /// Index of the plan action this node was cut from.
    pub plan_action: usize,
    /// Position within a multi-cell run; nonzero nodes continue the run without stopping.
    pub run_offset: usize,
}

impl AdgNode {
    /// Continues a run in motion: may start once its predecessor is issued.
    pub fn is_pipelined(&self) -> bool {
        self.run_offset > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EdgeKind {
    Type1,
    Type2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct AdgEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

/// Starting pose of one robot.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RobotStart {
    pub id: usize,
    pub cell: Cell,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, Serialize)]
pub struct Adg {
    pub model: Model,
    pub params: KinodynamicParams,
    /// Map height in cells, for converting rows to metric coordinates.
    pub map_height: usize,
    pub robots: Vec<RobotStart>,
    pub nodes: Vec<AdgNode>,
    pub edges: Vec<AdgEdge>,
    #[serde(skip)]
    preds: Vec<Vec<usize>>,
    #[serde(skip)]
    succs: Vec<Vec<usize>>,
    #[serde(skip)]
    robot_nodes: Vec<std::ops::Range<usize>>,
}

/// One stay of a robot in a cell: the node that enters it (None for the start
/// cell) and the node that leaves it (None if the robot parks there).
struct Visit {
    robot: usize,
    enter_time: f64,
    enter: Option<usize>,
    leave: Option<usize>,
}

impl Adg {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn preds(&self, node: usize) -> &[usize] {
        &self.preds[node]
    }

    pub fn succs(&self, node: usize) -> &[usize] {
        &self.succs[node]
    }

    /// Node ids of the robot at position `r` in [`Adg::robots`], in chain order.
    pub fn robot_nodes(&self, r: usize) -> std::ops::Range<usize> {
        self.robot_nodes[r].clone()
    }

    /// Position of robot `id` in [`Adg::robots`].
    pub fn robot_slot(&self, id: usize) -> Option<usize> {
        self.robots.iter().position(|r| r.id == id)
    }

    pub fn count(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    /// Distinct unordered robot pairs joined by at least one Type-2 edge.
    pub fn conflict_robot_pairs(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Type2)
            .map(|e| {
                let (a, b) = (self.nodes[e.from].robot, self.nodes[e.to].robot);
                (a.min(b), a.max(b))
            })
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Edge-list JSON: `{"nodes": [...], "edges": [{"from", "to", "kind"}]}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Export<'a> {
            nodes: &'a [AdgNode],
            edges: &'a [AdgEdge],
        }
        serde_json::to_string_pretty(&Export {
            nodes: &self.nodes,
            edges: &self.edges,
        })
        .expect("graph serializes")
    }

    /// Kahn topological order; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &self.succs[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push_back(v);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }
}

/// Builds the dependency graph of a plan that passes validation.
pub fn build_adg(plan: &Plan, instance: &Instance) -> Result<Adg, AdgError> {
    let report = validate(plan, instance, 0)?;
    if !report.is_valid() {
        return Err(AdgError::InvalidPlan(report.violations));
    }
    let params = plan.kinodynamics.unwrap_or_default();
    let params = KinodynamicParams {
        cell_size: instance.map.cell_size(),
        ..params
    };
    let mut nodes: Vec<AdgNode> = Vec::new();
    let mut robots = Vec::new();
    let mut robot_nodes = Vec::new();
    let mut visits: BTreeMap<Cell, Vec<Visit>> = BTreeMap::new();

    for task in &instance.robots {
        let Some(rp) = plan.robot(task.id) else {
            continue;
        };
        robots.push(RobotStart {
            id: task.id,
            cell: task.start,
            orientation: task.start_orientation,
        });
        let first = nodes.len();
        let mut cell = task.start;
        let mut open = Visit {
            robot: task.id,
            enter_time: f64::NEG_INFINITY,
            enter: None,
            leave: None,
        };
        for (ai, a) in rp.actions.iter().enumerate() {
            let index = nodes.len() - first;
            match &a.kind {
                ActionKind::Move { cells } => {
                    // planned entry of each cell after the first
                    let entries: Vec<f64> = if plan.model.is_discrete() {
                        vec![a.t0]
                    } else {
                        let profile = straight_run_profile(cells.len() - 1, &params);
                        occupancy_intervals(&profile, cells, a.t0, &params)
                            .expect("validated run")
                            .iter()
                            .skip(1)
                            .map(|w| w.start)
                            .collect()
                    };
                    for (i, pair) in cells.windows(2).enumerate() {
                        let id = nodes.len();
                        nodes.push(AdgNode {
                            robot: task.id,
                            index: index + i,
                            cell: pair[1],
                            planned_enter: entries[i],
                            action: NodeAction::Move {
                                from: pair[0],
                                to: pair[1],
                            },
                            plan_action: ai,
                            run_offset: i,
                        });
                        open.leave = Some(id);
                        visits.entry(cell).or_default().push(open);
                        cell = pair[1];
                        open = Visit {
                            robot: task.id,
                            enter_time: entries[i],
                            enter: Some(id),
                            leave: None,
                        };
                    }
                }
                ActionKind::Rotate { dir, quarter_turns } => nodes.push(AdgNode {
                    robot: task.id,
                    index,
                    cell,
                    planned_enter: a.t0,
                    action: NodeAction::Rotate {
                        dir: *dir,
                        quarter_turns: *quarter_turns,
                    },
                    plan_action: ai,
                    run_offset: 0,
                }),
                ActionKind::Wait => nodes.push(AdgNode {
                    robot: task.id,
                    index,
                    cell,
                    planned_enter: a.t0,
                    action: NodeAction::Wait {
                        duration: a.duration(),
                    },
                    plan_action: ai,
                    run_offset: 0,
                }),
            }
        }
        visits.entry(cell).or_default().push(open);
        robot_nodes.push(first..nodes.len());
    }

    let mut edges = Vec::new();
    for range in &robot_nodes {
        for i in range.start + 1..range.end {
            edges.push(AdgEdge {
                from: i - 1,
                to: i,
                kind: EdgeKind::Type1,
            });
        }
    }
    for (&cell, list) in visits.iter_mut() {
        list.sort_by(|a, b| a.enter_time.total_cmp(&b.enter_time));
        for pair in list.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.robot == b.robot {
                continue;
            }
            if a.enter_time == b.enter_time {
                return Err(AdgError::EntryTie {
                    a: a.robot,
                    b: b.robot,
                    cell,
                    t: a.enter_time,
                });
            }
            let Some(leave) = a.leave else {
                return Err(AdgError::ParkedCell {
                    cell,
                    parked: a.robot,
                    later: b.robot,
                });
            };
            let enter = b.enter.expect("only start visits lack an entry node");
            edges.push(AdgEdge {
                from: leave,
                to: enter,
                kind: EdgeKind::Type2,
            });
        }
    }
    edges.sort();
    edges.dedup();

    let n = nodes.len();
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    for e in &edges {
        preds[e.to].push(e.from);
        succs[e.from].push(e.to);
    }
    let adg = Adg {
        model: plan.model,
        params,
        map_height: instance.map.height(),
        robots,
        nodes,
        edges,
        preds,
        succs,
        robot_nodes,
    };
    match adg.topological_order() {
        Some(_) => Ok(adg),
        None => Err(AdgError::Cyclic(n)),
    }
}

/// The regression features of a plan and its dependency graph.
pub fn count_features(adg: &Adg, plan: &Plan) -> FeatureVector {
    FeatureVector {
        soc: plan_cost(plan).unwrap_or(0),
        rotations: plan.robots.iter().map(|r| r.rotation_count() as u64).sum(),
        type1_edges: adg.count(EdgeKind::Type1) as u64,
        type2_edges: adg.count(EdgeKind::Type2) as u64,
        conflict_robot_pairs: adg.conflict_robot_pairs() as u64,
        robots: adg.num_robots() as u64,
    }
}

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error("executor failed at node {node:?}: {message}")]
    Executor {
        node: Option<usize>,
        message: String,
        log: ExecutionLog,
    },
    #[error("deadlock: no node can be enabled; stuck frontier {frontier:?}")]
    Deadlock {
        frontier: Vec<usize>,
        log: ExecutionLog,
    },
}

/// Executor failure reported back to the dispatch loop.
#[derive(Debug, Clone, Error)]
#[error("{message}")]
pub struct ExecutorFault {
    pub node: Option<usize>,
    pub message: String,
}

/// The robot side of the dispatch contract.
pub trait Executor {
    /// Hands node `node` to its robot at time `now`.
    fn issue(&mut self, adg: &Adg, node: usize, now: f64) -> Result<(), ExecutorFault>;

    /// Removes and returns the earliest pending completion, or `None` when
    /// nothing issued is still running.
    fn next_completion(&mut self, adg: &Adg) -> Result<Option<(f64, usize)>, ExecutorFault>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum NodeStatus {
    Pending,
    Enabled,
    Running,
    Done,
}

#[derive(Debug, Clone, Serialize)]
pub struct LogRow {
    pub event: usize,
    pub robot: usize,
    pub index: usize,
    pub t_enable: Option<f64>,
    pub t_issue: Option<f64>,
    pub t_complete: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ExecutionLog {
    pub rows: Vec<LogRow>,
}

impl ExecutionLog {
    pub fn to_csv(&self) -> String {
        let fmt = |t: Option<f64>| t.map(|t| format!("{t:.6}")).unwrap_or_default();
        let mut out = String::from("event,robot,index,t_enable,t_issue,t_complete\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.event,
                r.robot,
                r.index,
                fmt(r.t_enable),
                fmt(r.t_issue),
                fmt(r.t_complete)
            );
        }
        out
    }

    /// Completion time of each robot's last node, by position in [`Adg::robots`];
    /// zero for robots without nodes.
    pub fn completion_times(&self, adg: &Adg) -> Vec<f64> {
        (0..adg.num_robots())
            .map(|r| {
                adg.robot_nodes(r)
                    .last()
                    .and_then(|n| self.rows[n].t_complete)
                    .unwrap_or(0.0)
            })
            .collect()
    }
}

struct Dispatcher<'a> {
    adg: &'a Adg,
    status: Vec<NodeStatus>,
    log: ExecutionLog,
}

impl Dispatcher<'_> {
    fn ready(&self, n: usize) -> bool {
        if self.status[n] != NodeStatus::Pending {
            return false;
        }
        let node = &self.adg.nodes[n];
        self.adg.preds(n).iter().all(|&p| {
            let same_robot = self.adg.nodes[p].robot == node.robot;
            if same_robot && node.is_pipelined() {
                self.status[p] >= NodeStatus::Running
            } else {
                self.status[p] == NodeStatus::Done
            }
        })
    }

    /// Enables and issues every ready node among `candidates`, following
    /// pipelined run successors as they become ready.
    fn release(
        &mut self,
        exec: &mut dyn Executor,
        candidates: impl IntoIterator<Item = usize>,
        now: f64,
    ) -> Result<(), ExecutorFault> {
        let mut queue: BTreeSet<usize> = candidates.into_iter().collect();
        while let Some(n) = queue.pop_first() {
            if !self.ready(n) {
                continue;
            }
            self.status[n] = NodeStatus::Enabled;
            self.log.rows[n].t_enable = Some(now);
            exec.issue(self.adg, n, now)?;
            self.status[n] = NodeStatus::Running;
            self.log.rows[n].t_issue = Some(now);
            queue.extend(
                self.adg
                    .succs(n)
                    .iter()
                    .copied()
                    .filter(|&s| self.adg.nodes[s].is_pipelined()),
            );
        }
        Ok(())
    }
}

/// Runs the execution-monitoring loop until every node is done.
pub fn dispatch_loop(adg: &Adg, exec: &mut dyn Executor) -> Result<ExecutionLog, DispatchError> {
    let n = adg.num_nodes();
    let mut d = Dispatcher {
        adg,
        status: vec![NodeStatus::Pending; n],
        log: ExecutionLog {
            rows: adg
                .nodes
                .iter()
                .enumerate()
                .map(|(i, node)| LogRow {
                    event: i,
                    robot: node.robot,
                    index: node.index,
                    t_enable: None,
                    t_issue: None,
                    t_complete: None,
                })
                .collect(),
        },
    };
    let fail = |e: ExecutorFault, log: ExecutionLog| DispatchError::Executor {
        node: e.node,
        message: e.message,
        log,
    };
    if let Err(e) = d.release(exec, 0..n, 0.0) {
        return Err(fail(e, d.log));
    }
    let mut done = 0;
    while done < n {
        let next = match exec.next_completion(adg) {
            Ok(next) => next,
            Err(e) => return Err(fail(e, d.log)),
        };
        let Some((t, node)) = next else {
            let frontier = (0..n)
                .filter(|&i| d.status[i] != NodeStatus::Done)
                .filter(|&i| adg.preds(i).iter().all(|&p| d.status[p] == NodeStatus::Done))
                .collect();
            return Err(DispatchError::Deadlock {
                frontier,
                log: d.log,
            });
        };
        d.status[node] = NodeStatus::Done;
        d.log.rows[node].t_complete = Some(t);
        done += 1;
        if let Err(e) = d.release(exec, adg.succs(node).to_vec(), t) {
            return Err(fail(e, d.log));
        }
    }
    Ok(d.log)
}

/// Executor with a fixed duration per node; each robot works through its
/// issued nodes one at a time.
#[derive(Debug, Clone)]
pub struct FixedDurationExecutor {
    durations: Vec<f64>,
    busy_until: BTreeMap<usize, f64>,
    pending: BTreeSet<(ordered_float::OrderedFloat<f64>, usize)>,
}

impl FixedDurationExecutor {
    pub fn new(durations: Vec<f64>) -> Self {
        Self {
            durations,
            busy_until: BTreeMap::new(),
            pending: BTreeSet::new(),
        }
    }
}

impl Executor for FixedDurationExecutor {
    fn issue(&mut self, adg: &Adg, node: usize, now: f64) -> Result<(), ExecutorFault> {
        let robot = adg.nodes[node].robot;
        let start = self.busy_until.get(&robot).copied().unwrap_or(0.0).max(now);
        let end = start + self.durations[node];
        self.busy_until.insert(robot, end);
        self.pending.insert((ordered_float::OrderedFloat(end), node));
        Ok(())
    }

    fn next_completion(&mut self, _adg: &Adg) -> Result<Option<(f64, usize)>, ExecutorFault> {
        Ok(self.pending.pop_first().map(|(t, n)| (t.0, n)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{ActionPrimitive, RobotPlan};
    use crate::world::{GridMap, RobotTask};
    use std::sync::Arc;

    fn c(r: i32, col: i32) -> Cell {
        Cell::new(r, col)
    }

    fn task(id: usize, s: Cell, g: Cell) -> RobotTask {
        RobotTask {
            id,
            start: s,
            start_orientation: Orientation::East,
            goal: g,
        }
    }

    fn discrete(model: Model, paths: &[(usize, Vec<(Cell, Orientation)>)]) -> Plan {
        Plan::discrete(
            model,
            paths
                .iter()
                .map(|(id, p)| RobotPlan::from_states(*id, p, 1.0))
                .collect(),
        )
    }

    fn east(cells: &[Cell]) -> Vec<(Cell, Orientation)> {
        cells.iter().map(|&c| (c, Orientation::East)).collect()
    }

    /// A crosses (1,1) first; B waits, then passes north to south.
    fn crossing() -> (Instance, Plan) {
        let map = GridMap::from_rows(&["@.@", "...", "@.@"]).unwrap();
        let inst = Instance::new(
            Arc::new(map),
            vec![task(0, c(1, 0), c(1, 2)), task(1, c(0, 1), c(2, 1))],
        )
        .unwrap();
        let plan = discrete(
            Model::Standard,
            &[
                (0, east(&[c(1, 0), c(1, 1), c(1, 2)])),
                (1, east(&[c(0, 1), c(0, 1), c(0, 1), c(1, 1), c(2, 1)])),
            ],
        );
        (inst, plan)
    }

    #[test]
    fn single_robot_chain() {
        let inst = Instance::new(
            Arc::new(GridMap::empty(1, 5)),
            vec![task(0, c(0, 0), c(0, 4))],
        )
        .unwrap();
        let plan = discrete(
            Model::Standard,
            &[(0, east(&[c(0, 0), c(0, 1), c(0, 2), c(0, 3), c(0, 4)]))],
        );
        let adg = build_adg(&plan, &inst).unwrap();
        assert_eq!(adg.num_nodes(), 4);
        assert_eq!(adg.count(EdgeKind::Type1), 3);
        assert_eq!(adg.count(EdgeKind::Type2), 0);
        let f = count_features(&adg, &plan);
        assert_eq!((f.type2_edges, f.conflict_robot_pairs, f.robots), (0, 0, 1));
        assert_eq!(f.rotations, 0);
    }

    #[test]
    fn shared_cell_gives_one_type2_edge() {
        let (inst, plan) = crossing();
        let adg = build_adg(&plan, &inst).unwrap();
        let t2: Vec<_> = adg.edges.iter().filter(|e| e.kind == EdgeKind::Type2).collect();
        assert_eq!(t2.len(), 1);
        let (from, to) = (&adg.nodes[t2[0].from], &adg.nodes[t2[0].to]);
        assert_eq!((from.robot, from.cell), (0, c(1, 2)));
        assert_eq!((to.robot, to.cell), (1, c(1, 1)));
        let f = count_features(&adg, &plan);
        assert_eq!((f.type2_edges, f.conflict_robot_pairs), (1, 1));
    }

    #[test]
    fn delayed_leader_holds_back_follower() {
        let (inst, plan) = crossing();
        let adg = build_adg(&plan, &inst).unwrap();
        let mut durations = vec![1.0; adg.num_nodes()];
        durations[0] = 6.0; // A's first move is delayed by 5 s
        let mut exec = FixedDurationExecutor::new(durations);
        let log = dispatch_loop(&adg, &mut exec).unwrap();
        let a_vacate = adg.robot_nodes(0).nth(1).unwrap();
        let b_enter = adg
            .robot_nodes(1)
            .find(|&n| adg.nodes[n].cell == c(1, 1))
            .unwrap();
        assert!(log.rows[b_enter].t_issue.unwrap() >= log.rows[a_vacate].t_complete.unwrap());
    }

    #[test]
    fn empty_plan_terminates_immediately() {
        let inst = Instance::new(Arc::new(GridMap::empty(2, 2)), vec![]).unwrap();
        let plan = Plan::discrete(Model::Standard, vec![]);
        let adg = build_adg(&plan, &inst).unwrap();
        let log = dispatch_loop(&adg, &mut FixedDurationExecutor::new(vec![])).unwrap();
        assert!(log.rows.is_empty());
    }

    #[test]
    fn chain_completes_in_order_under_delay() {
        let inst = Instance::new(
            Arc::new(GridMap::empty(1, 4)),
            vec![task(0, c(0, 0), c(0, 3))],
        )
        .unwrap();
        let plan = discrete(
            Model::Standard,
            &[(0, east(&[c(0, 0), c(0, 1), c(0, 2), c(0, 3)]))],
        );
        let adg = build_adg(&plan, &inst).unwrap();
        let mut exec = FixedDurationExecutor::new(vec![5.0, 0.1, 2.0]);
        let log = dispatch_loop(&adg, &mut exec).unwrap();
        let t: Vec<f64> = log.rows.iter().map(|r| r.t_complete.unwrap()).collect();
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!(log.to_csv().starts_with("event,robot,index,t_enable,t_issue,t_complete\n"));
    }

    #[test]
    fn kinodynamic_runs_split_per_cell() {
        let inst = Instance::new(
            Arc::new(GridMap::empty(1, 4)),
            vec![task(0, c(0, 0), c(0, 3))],
        )
        .unwrap();
        let params = KinodynamicParams::default();
        let total = straight_run_profile(3, &params).total;
        let plan = Plan {
            model: Model::Kinodynamic,
            timestep: 1.0,
            robots: vec![RobotPlan {
                id: 0,
                actions: vec![ActionPrimitive::new(
                    ActionKind::Move {
                        cells: vec![c(0, 0), c(0, 1), c(0, 2), c(0, 3)],
                    },
                    0.0,
                    total,
                )],
            }],
            kinodynamics: Some(params),
        };
        let adg = build_adg(&plan, &inst).unwrap();
        assert_eq!(adg.num_nodes(), 3);
        assert!(adg.nodes[1].is_pipelined() && adg.nodes[2].is_pipelined());
        assert!(adg.nodes.windows(2).all(|w| w[0].planned_enter < w[1].planned_enter));
    }

    #[test]
    fn deadlocked_executor_reports_frontier() {
        struct Stuck;
        impl Executor for Stuck {
            fn issue(&mut self, _: &Adg, _: usize, _: f64) -> Result<(), ExecutorFault> {
                Ok(())
            }
            fn next_completion(&mut self, _: &Adg) -> Result<Option<(f64, usize)>, ExecutorFault> {
                Ok(None)
            }
        }
        let (inst, plan) = crossing();
        let adg = build_adg(&plan, &inst).unwrap();
        match dispatch_loop(&adg, &mut Stuck) {
            Err(DispatchError::Deadlock { frontier, .. }) => assert!(!frontier.is_empty()),
            other => panic!("expected deadlock, got {other:?}"),
        }
    }
}
