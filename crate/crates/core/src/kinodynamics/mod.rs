//! Differential-drive motion primitives and the kinodynamic prioritized planner.

mod planner;
mod profile;

pub use planner::{kinodynamic_pp, kinodynamic_pp_restart, SafeIntervalTable};
pub use profile::MotionProfile;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::Cell;

#[derive(Debug, Error, PartialEq)]
pub enum KinoError {
    #[error("rotation of {0} quarter turns is not a primitive (expected 1 or 2)")]
    BadQuarterTurns(u8),
    #[error("run cells are not a collinear chain of adjacent cells")]
    NotCollinear,
    #[error("profile distance {profile} m does not match run length {run} m")]
    DistanceMismatch { profile: f64, run: f64 },
}

/// Robot and map constants used by the kinodynamic model and the executor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KinodynamicParams {
    /// m/s
    pub v_max: f64,
    /// m/s²
    pub a_max: f64,
    /// deg/s
    pub omega: f64,
    /// m
    pub footprint_diameter: f64,
    /// m
    pub cell_size: f64,
    /// Time pad added on both sides of every cell occupancy window, seconds.
    pub safety_margin: f64,
}

impl Default for KinodynamicParams {
    fn default() -> Self {
        Self {
            v_max: 0.5,
            a_max: 0.4,
            omega: 30.0,
            footprint_diameter: 0.35,
            cell_size: 1.0,
            safety_margin: 0.2,
        }
    }
}

impl KinodynamicParams {
    pub fn is_valid(&self) -> bool {
        [
            self.v_max,
            self.a_max,
            self.omega,
            self.footprint_diameter,
            self.cell_size,
        ]
        .iter()
        .all(|&x| x > 0.0)
            && self.safety_margin >= 0.0
            && self.footprint_diameter < self.cell_size
    }

    pub fn omega_rad(&self) -> f64 {
        self.omega.to_radians()
    }
}

/// Stop-to-stop profile for a straight run across `n_cells` cell lengths.
pub fn straight_run_profile(n_cells: usize, params: &KinodynamicParams) -> MotionProfile {
    MotionProfile::new(
        n_cells as f64 * params.cell_size,
        0.0,
        params.v_max,
        params.a_max,
    )
}

/// In-place rotation by 90° or 180° at constant angular speed.
pub fn rotate_duration(quarter_turns: u8, params: &KinodynamicParams) -> Result<f64, KinoError> {
    match quarter_turns {
        1 | 2 => Ok(90.0 * quarter_turns as f64 / params.omega),
        q => Err(KinoError::BadQuarterTurns(q)),
    }
}

/// Occupancy window of one cell, seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellWindow {
    pub cell: Cell,
    pub start: f64,
    pub end: f64,
}

pub(crate) fn is_collinear_chain(cells: &[Cell]) -> bool {
    if cells.len() < 2 {
        return true;
    }
    let Some(dir) = cells[0].direction_to(cells[1]) else {
        return false;
    };
    cells.windows(2).all(|w| w[0].direction_to(w[1]) == Some(dir))
}

/// Per-cell windows during which the footprint overlaps each cell of a run.
///
/// Windows are padded by the safety margin. The first cell is occupied from
/// `t_start` and the last until the run ends.
pub fn occupancy_intervals(
    run: &MotionProfile,
    cells: &[Cell],
    t_start: f64,
    params: &KinodynamicParams,
) -> Result<Vec<CellWindow>, KinoError> {
    let delta = params.safety_margin;
    if cells.len() <= 1 {
        return Ok(cells
            .iter()
            .map(|&cell| CellWindow {
                cell,
                start: t_start - delta,
                end: t_start + run.total + delta,
            })
            .collect());
    }
    if !is_collinear_chain(cells) {
        return Err(KinoError::NotCollinear);
    }
    let run_len = (cells.len() - 1) as f64 * params.cell_size;
    if (run_len - run.distance).abs() > 1e-9 {
        return Err(KinoError::DistanceMismatch {
            profile: run.distance,
            run: run_len,
        });
    }
    let reach = params.cell_size / 2.0 + params.footprint_diameter / 2.0;
    let last = cells.len() - 1;
    Ok(cells
        .iter()
        .enumerate()
        .map(|(i, &cell)| {
            let center = i as f64 * params.cell_size;
            let t_in = if i == 0 {
                0.0
            } else {
                run.time_at(center - reach)
            };
            let t_out = if i == last {
                run.total
            } else {
                run.time_at(center + reach)
            };
            CellWindow {
                cell,
                start: t_start + t_in - delta,
                end: t_start + t_out + delta,
            }
        })
        .collect())
}
