//! Time-expanded A* for one robot under constraints and reservations.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use super::{Constraint, ConstraintKind, Path, PlannerConfig, PlannerError, ReservationTable};
use crate::plan::Model;
use crate::world::{Cell, GridMap, Instance, Orientation, RobotTask};

/// Per-goal distance-to-go tables, shared across searches of one planning job.
#[derive(Debug, Clone)]
pub struct HeuristicCache {
    map: Arc<GridMap>,
    model: Model,
    tables: HashMap<Cell, Vec<u32>>,
}

impl HeuristicCache {
    pub fn new(map: Arc<GridMap>, model: Model) -> Self {
        Self {
            map,
            model,
            tables: HashMap::new(),
        }
    }

    /// Exact unconstrained cost-to-go from every (cell, heading) to `goal`.
    pub fn table(&mut self, goal: Cell) -> &[u32] {
        let map = &self.map;
        let model = self.model;
        self.tables
            .entry(goal)
            .or_insert_with(|| distance_table(map, model, goal))
    }
}

fn distance_table(map: &GridMap, model: Model, goal: Cell) -> Vec<u32> {
    let n = map.num_cells();
    let mut dist = vec![u32::MAX; n * 4];
    if !map.is_free(goal) {
        return dist;
    }
    let mut queue = VecDeque::new();
    for o in Orientation::ALL {
        dist[map.index(goal) * 4 + o.index()] = 0;
        queue.push_back((goal, o));
    }
    while let Some((c, o)) = queue.pop_front() {
        let d = dist[map.index(c) * 4 + o.index()];
        let mut relax = |pc: Cell, po: Orientation, queue: &mut VecDeque<(Cell, Orientation)>| {
            let i = map.index(pc) * 4 + po.index();
            if dist[i] == u32::MAX {
                dist[i] = d + 1;
                queue.push_back((pc, po));
            }
        };
        match model {
            Model::Rotation => {
                // predecessor by driving forward into c while facing o
                let back = c.step(o.right().right());
                if map.is_free(back) {
                    relax(back, o, &mut queue);
                }
                relax(c, o.left(), &mut queue);
                relax(c, o.right(), &mut queue);
            }
            _ => {
                for n in map.neighbors(c) {
                    relax(n, o, &mut queue);
                }
            }
        }
    }
    dist
}

#[derive(Debug, Default)]
struct ConstraintIndex {
    vertex: HashMap<Cell, Vec<(i64, i64)>>,
    edge: HashSet<(Cell, Cell, i64)>,
    latest: i64,
}

impl ConstraintIndex {
    fn new(robot: usize, constraints: &[Constraint]) -> Self {
        let mut idx = Self::default();
        for c in constraints.iter().filter(|c| c.robot == robot) {
            match c.kind {
                ConstraintKind::Vertex { cell, from, to } => {
                    idx.vertex.entry(cell).or_default().push((from, to));
                    idx.latest = idx.latest.max(to);
                }
                ConstraintKind::Edge { from, to, t } => {
                    idx.edge.insert((from, to, t));
                    idx.latest = idx.latest.max(t + 1);
                }
            }
        }
        idx
    }

    fn forbids_vertex(&self, cell: Cell, t: i64) -> bool {
        self.vertex
            .get(&cell)
            .is_some_and(|ws| ws.iter().any(|&(a, b)| a <= t && t <= b))
    }

    fn last_on(&self, cell: Cell) -> Option<i64> {
        self.vertex
            .get(&cell)
            .and_then(|ws| ws.iter().map(|&(_, b)| b).max())
    }
}

struct Node {
    state: (Cell, Orientation),
    parent: usize,
}

/// Shortest time-expanded path for `robot_id` that honors `constraints`
/// (only those addressed to this robot are used) and avoids `reservations`
/// with the configured k-window.
pub fn spacetime_astar(
    instance: &Instance,
    robot_id: usize,
    constraints: &[Constraint],
    reservations: Option<&ReservationTable>,
    config: &PlannerConfig,
) -> Result<Path, PlannerError> {
    config.check_discrete()?;
    let task = instance
        .robot(robot_id)
        .ok_or(PlannerError::UnknownRobot(robot_id))?;
    let mut cache = HeuristicCache::new(instance.map.clone(), config.model);
    search(instance, task, constraints, reservations, config, &mut cache)
}

pub(crate) fn search(
    instance: &Instance,
    task: &RobotTask,
    constraints: &[Constraint],
    reservations: Option<&ReservationTable>,
    config: &PlannerConfig,
    cache: &mut HeuristicCache,
) -> Result<Path, PlannerError> {
    let map = &*instance.map;
    let k = config.k as i64;
    let horizon = config.horizon(instance);
    let cons = ConstraintIndex::new(task.id, constraints);
    let unroutable = PlannerError::Unroutable {
        robot: task.id,
        horizon,
    };

    let goal = task.goal;
    if reservations.is_some_and(|r| r.parked(goal)) {
        return Err(unroutable);
    }
    let earliest_goal = cons
        .last_on(goal)
        .map(|t| t + 1)
        .unwrap_or(0)
        .max(reservations.map(|r| r.free_after(goal, k)).unwrap_or(0));
    let t_static = (cons.latest + 1)
        .max(reservations.map(|r| r.horizon() + k + 1).unwrap_or(0))
        .max(earliest_goal);

    let rotation = config.model == Model::Rotation;
    let start_o = task.start_orientation;
    let blocked = |c: Cell, t: i64| {
        cons.forbids_vertex(c, t) || reservations.is_some_and(|r| r.occupied(c, t, k))
    };
    if blocked(task.start, 0) {
        return Err(unroutable);
    }

    let table = cache.table(goal);
    let h_of = |c: Cell, o: Orientation, t: i64| -> Option<i64> {
        let o = if rotation { o } else { start_o };
        let d = table[map.index(c) * 4 + o.index()];
        (d != u32::MAX).then(|| (d as i64).max(earliest_goal - t))
    };

    let key = |c: Cell, o: Orientation, t: i64| -> (usize, i64) {
        (map.index(c) * 4 + o.index(), t.min(t_static))
    };

    let mut nodes = vec![Node {
        state: (task.start, start_o),
        parent: usize::MAX,
    }];
    let Some(h0) = h_of(task.start, start_o, 0) else {
        return Err(unroutable);
    };
    // (f, h, waited, cell, heading, t, node)
    let mut open = BinaryHeap::new();
    open.push(Reverse((h0, h0, false, task.start, start_o.index(), 0i64, 0usize)));
    let mut closed: HashSet<(usize, i64)> = HashSet::new();

    while let Some(Reverse((_, _, _, c, oi, t, node))) = open.pop() {
        let o = Orientation::from_index(oi);
        if !closed.insert(key(c, o, t)) {
            continue;
        }
        if c == goal && t >= earliest_goal {
            let mut path = Vec::with_capacity(t as usize + 1);
            let mut i = node;
            while i != usize::MAX {
                path.push(nodes[i].state);
                i = nodes[i].parent;
            }
            path.reverse();
            return Ok(path);
        }
        let nt = t + 1;
        if nt > horizon as i64 {
            continue;
        }
        let mut succ: Vec<((Cell, Orientation), bool)> = Vec::with_capacity(5);
        if rotation {
            succ.push(((c.step(o), o), false));
            succ.push(((c, o.left()), false));
            succ.push(((c, o.right()), false));
        } else {
            for dir in Orientation::ALL {
                succ.push(((c.step(dir), o), false));
            }
        }
        succ.push(((c, o), true));
        for ((nc, no), waited) in succ {
            if !map.is_free(nc) || blocked(nc, nt) {
                continue;
            }
            if nc != c {
                if cons.edge.contains(&(c, nc, t)) {
                    continue;
                }
                if reservations.is_some_and(|r| r.blocks_move(c, nc, t)) {
                    continue;
                }
            }
            if closed.contains(&key(nc, no, nt)) {
                continue;
            }
            let Some(h) = h_of(nc, no, nt) else { continue };
            let idx = nodes.len();
            nodes.push(Node {
                state: (nc, no),
                parent: node,
            });
            open.push(Reverse((nt + h, h, waited, nc, no.index(), nt, idx)));
        }
    }
    Err(unroutable)
}
