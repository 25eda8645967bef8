//! Priority-Based Search: depth-first search over partial priority orders.

use super::astar::{search, HeuristicCache};
use super::conflicts::{count_conflicting_pairs, first_conflict, Conflict};
use super::{plan_from_paths, Budget, Path, PlannerConfig, PlannerError, ReservationTable};
use crate::plan::Plan;
use crate::world::Instance;

#[derive(Clone)]
struct PbsNode {
    /// `above[y][x]`: robot x has higher priority than robot y (transitively closed).
    above: Vec<Vec<bool>>,
    paths: Vec<Path>,
}

impl PbsNode {
    fn ordered(&self, a: usize, b: usize) -> bool {
        self.above[a][b] || self.above[b][a]
    }

    fn higher(&self, y: usize) -> Vec<usize> {
        (0..self.paths.len()).filter(|&x| self.above[y][x]).collect()
    }
}

struct Pbs<'a> {
    instance: &'a Instance,
    config: &'a PlannerConfig,
    cache: HeuristicCache,
}

impl Pbs<'_> {
    fn table_of(&self, node: &PbsNode, robots: &[usize]) -> ReservationTable {
        let mut table = ReservationTable::new(&self.instance.map);
        for &x in robots {
            table.add_path(self.instance.robots[x].id, &node.paths[x]);
        }
        table
    }

    /// Child of `node` with `hi` above `lo`; replans `lo` and every robot
    /// below it that now collides with a higher-priority robot.
    fn child(&mut self, node: &PbsNode, hi: usize, lo: usize) -> Option<PbsNode> {
        if node.above[hi][lo] || node.above[lo][hi] || hi == lo {
            return None;
        }
        let n = node.paths.len();
        let mut child = node.clone();
        let uppers: Vec<usize> = std::iter::once(hi).chain(node.higher(hi)).collect();
        let lowers: Vec<usize> = std::iter::once(lo)
            .chain((0..n).filter(|&y| node.above[y][lo]))
            .collect();
        for &y in &lowers {
            for &x in &uppers {
                child.above[y][x] = true;
            }
        }
        let mut affected = lowers;
        affected.sort_by_key(|&y| (child.above[y].iter().filter(|&&b| b).count(), y));
        let k = self.config.k as i64;
        for y in affected {
            let higher = child.higher(y);
            let table = self.table_of(&child, &higher);
            if y != lo && table.admits(&child.paths[y], k) {
                continue;
            }
            let task = &self.instance.robots[y];
            child.paths[y] =
                search(self.instance, task, &[], Some(&table), self.config, &mut self.cache).ok()?;
        }
        Some(child)
    }
}

/// Picks the robot pair to branch on; for cycles, the first unordered pair of members.
fn branch_pair(node: &PbsNode, conflict: &Conflict) -> Option<(usize, usize)> {
    match conflict {
        Conflict::Cycle { moves, .. } => {
            let members: Vec<usize> = moves.iter().map(|m| m.0).collect();
            members.iter().enumerate().find_map(|(i, &a)| {
                members[i + 1..]
                    .iter()
                    .find(|&&b| !node.ordered(a, b))
                    .map(|&b| (a.min(b), a.max(b)))
            })
        }
        c => Some(c.pair()),
    }
}

pub fn pbs_plan(instance: &Instance, config: &PlannerConfig) -> Result<Plan, PlannerError> {
    config.check_discrete()?;
    let n = instance.num_robots();
    let mut pbs = Pbs {
        instance,
        config,
        cache: HeuristicCache::new(instance.map.clone(), config.model),
    };
    let mut paths = Vec::with_capacity(n);
    for task in &instance.robots {
        paths.push(search(instance, task, &[], None, config, &mut pbs.cache)?);
    }
    let root = PbsNode {
        above: vec![vec![false; n]; n],
        paths,
    };
    let mut budget = Budget::new(config);
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if !budget.tick() {
            return Err(PlannerError::TimeLimit { lower_bound: None });
        }
        let Some(conflict) = first_conflict(&node.paths, config.k) else {
            return Ok(plan_from_paths(config.model, instance, &node.paths));
        };
        let Some((a, b)) = branch_pair(&node, &conflict) else {
            continue;
        };
        let mut children: Vec<(usize, PbsNode)> = [(a, b), (b, a)]
            .into_iter()
            .filter_map(|(hi, lo)| pbs.child(&node, hi, lo))
            .map(|c| (count_conflicting_pairs(&c.paths, config.k), c))
            .collect();
        // fewer colliding pairs is explored first (pushed last)
        children.sort_by_key(|(pairs, _)| std::cmp::Reverse(*pairs));
        stack.extend(children.into_iter().map(|(_, c)| c));
    }
    Err(PlannerError::Exhausted)
}
