//! Space-time occupancy of already-planned robots.

use std::collections::HashMap;

use super::Path;
use crate::validate::FOREVER;
use crate::world::{Cell, GridMap};

/// Paths of higher-priority robots, indexed for point queries.
///
/// Robots stay parked at the last cell of their path forever.
#[derive(Debug, Clone)]
pub struct ReservationTable {
    width: usize,
    /// Per cell: (robot, first, last) visits.
    visits: Vec<Vec<(usize, i64, i64)>>,
    /// (t, from) -> to for every move during t -> t+1.
    moves: HashMap<(i64, Cell), Cell>,
    /// Latest finite timestep touched by any reservation.
    horizon: i64,
    robots: usize,
}

impl ReservationTable {
    pub fn new(map: &GridMap) -> Self {
        Self {
            width: map.width(),
            visits: vec![Vec::new(); map.num_cells()],
            moves: HashMap::new(),
            horizon: 0,
            robots: 0,
        }
    }

    fn idx(&self, c: Cell) -> usize {
        c.row as usize * self.width + c.col as usize
    }

    pub fn add_path(&mut self, robot: usize, path: &Path) {
        self.robots += 1;
        let mut entered = 0i64;
        for t in 0..path.len() {
            let cell = path[t].0;
            let next = path.get(t + 1).map(|s| s.0);
            match next {
                Some(n) if n != cell => {
                    let i = self.idx(cell);
                    self.visits[i].push((robot, entered, t as i64));
                    self.moves.insert((t as i64, cell), n);
                    entered = t as i64 + 1;
                }
                Some(_) => {}
                None => {
                    let i = self.idx(cell);
                    self.visits[i].push((robot, entered, FOREVER));
                }
            }
        }
        self.horizon = self.horizon.max(path.len() as i64);
    }

    pub fn len(&self) -> usize {
        self.robots
    }

    pub fn is_empty(&self) -> bool {
        self.robots == 0
    }

    /// Last timestep after which the table no longer changes.
    pub fn horizon(&self) -> i64 {
        self.horizon
    }

    /// Whether some reserved robot is in `cell` within `k` timesteps of `t`.
    pub fn occupied(&self, cell: Cell, t: i64, k: i64) -> bool {
        self.visits[self.idx(cell)]
            .iter()
            .any(|&(_, first, last)| first - k <= t && t <= last.saturating_add(k))
    }

    /// Whether a robot parked in `cell` forever from some time on.
    pub fn parked(&self, cell: Cell) -> bool {
        self.visits[self.idx(cell)]
            .iter()
            .any(|&(_, _, last)| last >= FOREVER)
    }

    /// Earliest timestep from which `cell` stays free forever (given window `k`).
    pub fn free_after(&self, cell: Cell, k: i64) -> i64 {
        self.visits[self.idx(cell)]
            .iter()
            .map(|&(_, _, last)| last.saturating_add(k + 1))
            .max()
            .unwrap_or(0)
    }

    /// Whether moving `from -> to` during `t -> t+1` swaps with a reserved robot
    /// or closes a rotation cycle through reserved robots.
    pub fn blocks_move(&self, from: Cell, to: Cell, t: i64) -> bool {
        let mut cur = to;
        for _ in 0..=self.robots {
            match self.moves.get(&(t, cur)) {
                Some(&next) if next == from => return true,
                Some(&next) => cur = next,
                None => return false,
            }
        }
        false
    }

    /// Whether `path` (parked at its end forever) avoids every reservation.
    pub fn admits(&self, path: &Path, k: i64) -> bool {
        let end = (path.len() as i64).max(self.horizon + k + 1);
        for t in 0..=end {
            let i = (t as usize).min(path.len() - 1);
            let cell = path[i].0;
            if self.occupied(cell, t, k) {
                return false;
            }
            if let Some(next) = path.get(i + 1) {
                if next.0 != cell && self.blocks_move(cell, next.0, t) {
                    return false;
                }
            }
        }
        !self.parked(path[path.len() - 1].0)
    }
}
