//! Conflict-Based Search: optimal in the sum of costs for the configured model and k.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::astar::{search, HeuristicCache};
use super::conflicts::{count_conflicting_pairs, first_conflict, Conflict};
use super::{
    path_cost, plan_from_paths, Budget, Constraint, Path, PlannerConfig, PlannerError,
};
use crate::plan::Plan;
use crate::world::Instance;

struct CtNode {
    constraints: Vec<Constraint>,
    paths: Vec<Path>,
    cost: u64,
}

/// Constraint sets that split `conflict`; every solution satisfies at least one.
///
/// A vertex conflict (a at v at ta, b at v at tb, |ta - tb| <= k) is split into
/// "a is not at v at ta" and "b is not at v anywhere in [ta - k, ta + k]".
fn split(instance: &Instance, conflict: &Conflict, k: i64) -> Vec<Constraint> {
    let id = |i: usize| instance.robots[i].id;
    match *conflict {
        Conflict::Vertex { a, b, cell, ta, .. } => vec![
            Constraint::vertex(id(a), cell, ta, ta),
            Constraint::vertex(id(b), cell, ta - k, ta + k),
        ],
        Conflict::Swap {
            a,
            b,
            a_from,
            b_from,
            t,
        } => vec![
            Constraint::edge(id(a), a_from, b_from, t),
            Constraint::edge(id(b), b_from, a_from, t),
        ],
        Conflict::Cycle { ref moves, t } => moves
            .iter()
            .map(|&(r, from, to)| Constraint::edge(id(r), from, to, t))
            .collect(),
    }
}

pub fn cbs_plan(instance: &Instance, config: &PlannerConfig) -> Result<Plan, PlannerError> {
    config.check_discrete()?;
    let k = config.k as i64;
    let mut cache = HeuristicCache::new(instance.map.clone(), config.model);
    let mut paths = Vec::with_capacity(instance.num_robots());
    for task in &instance.robots {
        paths.push(search(instance, task, &[], None, config, &mut cache)?);
    }
    let cost = paths.iter().map(path_cost).sum();
    let mut nodes = vec![CtNode {
        constraints: Vec::new(),
        paths,
        cost,
    }];
    let mut open = BinaryHeap::new();
    let conflicts = count_conflicting_pairs(&nodes[0].paths, config.k);
    open.push(Reverse((cost, conflicts, 0usize)));
    let mut budget = Budget::new(config);

    while let Some(Reverse((cost, _, id))) = open.pop() {
        if !budget.tick() {
            return Err(PlannerError::TimeLimit {
                lower_bound: Some(cost),
            });
        }
        let Some(conflict) = first_conflict(&nodes[id].paths, config.k) else {
            return Ok(plan_from_paths(config.model, instance, &nodes[id].paths));
        };
        for constraint in split(instance, &conflict, k) {
            let parent = &nodes[id];
            let idx = instance
                .robots
                .iter()
                .position(|r| r.id == constraint.robot)
                .expect("constraint on a known robot");
            let mut constraints = parent.constraints.clone();
            constraints.push(constraint);
            let task = &instance.robots[idx];
            let Ok(path) = search(instance, task, &constraints, None, config, &mut cache) else {
                continue;
            };
            let mut paths = parent.paths.clone();
            let cost = parent.cost - path_cost(&paths[idx]) + path_cost(&path);
            paths[idx] = path;
            let conflicts = count_conflicting_pairs(&paths, config.k);
            open.push(Reverse((cost, conflicts, nodes.len())));
            nodes.push(CtNode {
                constraints,
                paths,
                cost,
            });
        }
        // the expanded node is never revisited
        nodes[id].paths = Vec::new();
    }
    Err(PlannerError::Exhausted)
}
