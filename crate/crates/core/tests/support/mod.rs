//! Shared helpers for integration tests: a brute-force optimal solver and
//! instance generators.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use mapf_exec::plan::Model;
use mapf_exec::world::{random_instance, random_map, Cell, GridMap, Instance, Orientation};

/// Pose of one robot in the joint search: cell, heading, and whether it has
/// committed to staying at its goal forever.
type Pose = (Cell, Orientation, bool);

/// Optimal sum of costs by Dijkstra over joint states.
///
/// Each timestep costs one unit per robot that has not yet committed to
/// resting at its goal. Committed robots occupy their goal forever. Conflicts:
/// two robots in one cell; a robot entering a cell occupied one step earlier
/// by another robot when `k >= 1`; swaps; and rotation cycles of any length.
pub fn joint_optimal_soc(inst: &Instance, model: Model, k: u32) -> Option<u64> {
    assert!(k <= 1, "the oracle only knows windows up to k = 1");
    let map = &inst.map;
    let goals: Vec<Cell> = inst.robots.iter().map(|r| r.goal).collect();
    let start: Vec<Pose> = inst
        .robots
        .iter()
        .map(|r| (r.start, r.start_orientation, false))
        .collect();
    let mut dist: HashMap<Vec<Pose>, u64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    for s in commit_choices(&start, &goals) {
        dist.insert(s.clone(), 0);
        heap.push(Reverse((0u64, s)));
    }
    while let Some(Reverse((d, state))) = heap.pop() {
        if dist.get(&state).is_some_and(|&best| best < d) {
            continue;
        }
        if state.iter().all(|p| p.2) {
            return Some(d);
        }
        let step_cost = state.iter().filter(|p| !p.2).count() as u64;
        let options: Vec<Vec<(Cell, Orientation)>> = state.iter().map(|p| moves(map, model, *p)).collect();
        let mut choice = vec![0usize; state.len()];
        loop {
            let next: Vec<(Cell, Orientation)> = choice.iter().zip(&options).map(|(&i, o)| o[i]).collect();
            if legal(&state, &next, k) {
                let with_flags: Vec<Pose> = next.iter().zip(&state).map(|(&(c, o), p)| (c, o, p.2)).collect();
                for s in commit_choices(&with_flags, &goals) {
                    let nd = d + step_cost;
                    if dist.get(&s).is_none_or(|&old| nd < old) {
                        dist.insert(s.clone(), nd);
                        heap.push(Reverse((nd, s)));
                    }
                }
            }
            // odometer over the per-robot options
            let mut i = 0;
            loop {
                if i == choice.len() {
                    break;
                }
                choice[i] += 1;
                if choice[i] < options[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == choice.len() {
                break;
            }
        }
    }
    None
}

fn moves(map: &GridMap, model: Model, (c, o, done): Pose) -> Vec<(Cell, Orientation)> {
    if done {
        return vec![(c, o)];
    }
    let mut out = vec![(c, o)];
    match model {
        Model::Standard => {
            for dir in [Orientation::North, Orientation::East, Orientation::South, Orientation::West] {
                let n = c.step(dir);
                if map.in_bounds(n) && map.is_free(n) {
                    out.push((n, o));
                }
            }
        }
        Model::Rotation => {
            out.push((c, o.left()));
            out.push((c, o.right()));
            let n = c.step(o);
            if map.in_bounds(n) && map.is_free(n) {
                out.push((n, o));
            }
        }
        Model::Kinodynamic => unreachable!("discrete models only"),
    }
    out
}

fn legal(cur: &[Pose], next: &[(Cell, Orientation)], k: u32) -> bool {
    let n = cur.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if i < j && next[i].0 == next[j].0 {
                return false;
            }
            // entering a cell another robot occupied one step earlier
            if k >= 1 && next[i].0 == cur[j].0 && next[i].0 != cur[i].0 {
                return false;
            }
        }
    }
    // cycles (swaps included) among robots moving into cells vacated this step
    for s in 0..n {
        let mut at = s;
        for _ in 0..n {
            if next[at].0 == cur[at].0 {
                break;
            }
            match (0..n).find(|&j| j != at && cur[j].0 == next[at].0) {
                Some(j) if j == s => return false,
                Some(j) => at = j,
                None => break,
            }
        }
    }
    true
}

fn commit_choices(state: &[Pose], goals: &[Cell]) -> Vec<Vec<Pose>> {
    let mut out = vec![state.to_vec()];
    for (i, p) in state.iter().enumerate() {
        if !p.2 && p.0 == goals[i] {
            let extra: Vec<Vec<Pose>> = out
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    s[i].2 = true;
                    s
                })
                .collect();
            out.extend(extra);
        }
    }
    out
}

/// Small random instance: map at most 4×4 with a few obstacles.
pub fn tiny_instance(seed: u64, robots: usize) -> Instance {
    let h = 3 + (seed % 2) as usize;
    let w = 4;
    let obstacles = [0.0, 0.1, 0.2][(seed % 3) as usize];
    let map = Arc::new(random_map(h, w, obstacles, seed));
    random_instance(map, robots, seed).expect("tiny instance")
}

/// Random instance on a random map of the given size.
pub fn grid_instance(h: usize, w: usize, obstacles: f64, robots: usize, seed: u64) -> Instance {
    let map = Arc::new(random_map(h, w, obstacles, seed));
    random_instance(map, robots, seed).expect("instance")
}
