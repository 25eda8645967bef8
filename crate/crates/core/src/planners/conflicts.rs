//! Pairwise conflict detection on timestep paths (robots park at their last cell).

use std::collections::HashMap;

use super::Path;
use crate::world::Cell;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conflict {
    /// Robot `a` in `cell` at `ta`, robot `b` in `cell` at `tb`, `|ta - tb| <= k`.
    Vertex {
        a: usize,
        b: usize,
        cell: Cell,
        ta: i64,
        tb: i64,
    },
    /// `a` moves `a_from -> b_from` while `b` moves `b_from -> a_from` during `t -> t+1`.
    Swap {
        a: usize,
        b: usize,
        a_from: Cell,
        b_from: Cell,
        t: i64,
    },
    /// Robots (index, from, to) rotating along a cycle during `t -> t+1`.
    Cycle {
        moves: Vec<(usize, Cell, Cell)>,
        t: i64,
    },
}

impl Conflict {
    pub fn time(&self) -> i64 {
        match self {
            Conflict::Vertex { ta, tb, .. } => *ta.min(tb),
            Conflict::Swap { t, .. } | Conflict::Cycle { t, .. } => *t,
        }
    }

    /// The two robots the conflict is resolved between.
    pub fn pair(&self) -> (usize, usize) {
        match self {
            Conflict::Vertex { a, b, .. } | Conflict::Swap { a, b, .. } => (*a, *b),
            Conflict::Cycle { moves, .. } => (moves[0].0, moves[1].0),
        }
    }
}

fn at(path: &Path, t: i64) -> Cell {
    path[(t.max(0) as usize).min(path.len() - 1)].0
}

/// Earliest conflict between robots `i` and `j` (indices into `paths`), if any.
pub fn pair_conflict(paths: &[Path], i: usize, j: usize, k: i64) -> Option<Conflict> {
    let (pi, pj) = (&paths[i], &paths[j]);
    let end = pi.len().max(pj.len()) as i64 + k + 1;
    for t in 0..end {
        let ci = at(pi, t);
        for tb in (t - k).max(0)..=t + k {
            if at(pj, tb) == ci {
                return Some(Conflict::Vertex {
                    a: i,
                    b: j,
                    cell: ci,
                    ta: t,
                    tb,
                });
            }
        }
        let (ni, cj, nj) = (at(pi, t + 1), at(pj, t), at(pj, t + 1));
        if ci != ni && ni == cj && nj == ci {
            return Some(Conflict::Swap {
                a: i,
                b: j,
                a_from: ci,
                b_from: cj,
                t,
            });
        }
    }
    None
}

/// Earliest rotation cycle of length >= 3 among all robots.
fn first_cycle(paths: &[Path]) -> Option<Conflict> {
    let end = paths.iter().map(Vec::len).max().unwrap_or(0) as i64;
    for t in 0..end {
        let moves: HashMap<Cell, (usize, Cell)> = paths
            .iter()
            .enumerate()
            .filter_map(|(r, p)| {
                let (a, b) = (at(p, t), at(p, t + 1));
                (a != b).then_some((a, (r, b)))
            })
            .collect();
        let mut starts: Vec<_> = moves.iter().map(|(&from, &(r, to))| (r, from, to)).collect();
        starts.sort();
        for &(r, from, to) in &starts {
            let mut chain = vec![(r, from, to)];
            let mut cur = to;
            while let Some(&(nr, next)) = moves.get(&cur) {
                if nr == r {
                    if chain.len() >= 3 {
                        return Some(Conflict::Cycle { moves: chain, t });
                    }
                    break;
                }
                if chain.iter().any(|m| m.0 == nr) {
                    break;
                }
                chain.push((nr, cur, next));
                cur = next;
            }
        }
    }
    None
}

/// Earliest conflict over all robot pairs: smallest time, then smallest robot indices.
pub fn first_conflict(paths: &[Path], k: u32) -> Option<Conflict> {
    let k = k as i64;
    let mut best: Option<Conflict> = None;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            if let Some(c) = pair_conflict(paths, i, j, k) {
                if best.as_ref().is_none_or(|b| c.time() < b.time()) {
                    best = Some(c);
                }
            }
        }
    }
    if k == 0 {
        if let Some(cy) = first_cycle(paths) {
            if best.as_ref().is_none_or(|b| cy.time() < b.time()) {
                best = Some(cy);
            }
        }
    }
    best
}

/// Number of robot pairs with at least one conflict (cycles count each adjacent pair).
pub fn count_conflicting_pairs(paths: &[Path], k: u32) -> usize {
    let mut n = 0;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            if pair_conflict(paths, i, j, k as i64).is_some() {
                n += 1;
            }
        }
    }
    if k == 0 && first_cycle(paths).is_some() {
        n += 1;
    }
    n
}
