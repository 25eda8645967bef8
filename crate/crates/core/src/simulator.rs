//! Kinematic differential-drive simulator driven by the ADG dispatch loop.
//!
//! Motion is closed-form: in-place turns at constant angular speed and straight
//! drives following [`MotionProfile`]s. Completion events are exact; the trace
//! is sampled on a fixed `dt` grid afterwards. A run that gets extended while
//! the robot is moving is re-profiled from the current speed, so the robot only
//! stops where its issued commands end.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adg::{dispatch_loop, Adg, DispatchError, ExecutionLog, Executor, ExecutorFault, NodeAction};
use crate::kinodynamics::{KinodynamicParams, MotionProfile};
use crate::world::{Cell, Orientation, Turn};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("empty fleet: execution time is undefined without robots")]
    EmptyFleet,
    #[error("invalid execution config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error("{} separation violation(s); first: {:?}", .0.len(), .0.first())]
    Collision(Vec<SeparationViolation>),
}

/// Disturbances injected into execution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecConfig {
    /// Trace sampling step, seconds.
    pub dt: f64,
    /// Each action starts after a delay drawn uniformly from `[0, max_delay]` seconds.
    pub max_delay: f64,
    /// Each action's speed limit is scaled by a factor drawn uniformly from `[1 - speed_noise, 1]`.
    pub speed_noise: f64,
    pub seed: u64,
}

impl Default for ExecConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            max_delay: 0.5,
            speed_noise: 0.1,
            seed: 0,
        }
    }
}

impl ExecConfig {
    pub fn check(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0) {
            return Err(SimError::BadConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.max_delay >= 0.0) {
            return Err(SimError::BadConfig(format!("delay bound must be >= 0, got {}", self.max_delay)));
        }
        if !(0.0..1.0).contains(&self.speed_noise) {
            return Err(SimError::BadConfig(format!("speed noise must be in [0, 1), got {}", self.speed_noise)));
        }
        Ok(())
    }

    pub fn deterministic() -> Self {
        Self {
            max_delay: 0.0,
            speed_noise: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotTrace {
    pub id: usize,
    pub samples: Vec<Sample>,
    pub completion_time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExecutionTrace {
    pub dt: f64,
    pub robots: Vec<RobotTrace>,
    pub aet: f64,
    #[serde(skip)]
    pub log: ExecutionLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationViolation {
    pub t: f64,
    pub a: usize,
    pub b: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Turn {
        t0: f64,
        t1: f64,
        x: f64,
        y: f64,
        h0: f64,
        h1: f64,
    },
    Drive {
        t0: f64,
        /// End time; earlier than `t0 + profile.total` if the drive was re-profiled.
        t1: f64,
        x0: f64,
        y0: f64,
        heading: f64,
        profile: MotionProfile,
    },
}

impl Segment {
    fn start(&self) -> f64 {
        match *self {
            Segment::Turn { t0, .. } | Segment::Drive { t0, .. } => t0,
        }
    }

    fn pose(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            Segment::Turn { t0, t1, x, y, h0, h1 } => {
                let f = if t1 > t0 { ((t - t0) / (t1 - t0)).clamp(0.0, 1.0) } else { 1.0 };
                (x, y, h0 + (h1 - h0) * f)
            }
            Segment::Drive { t0, t1, x0, y0, heading, profile } => {
                let s = profile.position(t.min(t1) - t0);
                (x0 + s * heading.cos(), y0 + s * heading.sin(), heading)
            }
        }
    }
}

/// An in-progress straight run: drive targets are distances from the run origin.
#[derive(Debug, Clone)]
struct Run {
    ox: f64,
    oy: f64,
    heading: f64,
    v_limit: f64,
    /// Distance from the origin at which the current segment starts.
    s_off: f64,
    t_start: f64,
    profile: MotionProfile,
    /// Issued move nodes not yet reported: (node, target distance).
    targets: Vec<(usize, f64)>,
}

impl Run {
    fn time_to(&self, d: f64) -> f64 {
        self.t_start + self.profile.time_at(d - self.s_off)
    }

    fn end(&self) -> f64 {
        self.t_start + self.profile.total
    }
}

struct RobotSim {
    x: f64,
    y: f64,
    /// Continuous heading angle (not wrapped).
    angle: f64,
    orient: Orientation,
    /// Time at which the last issued motion ends.
    free_at: f64,
    segments: Vec<Segment>,
    run: Option<Run>,
    /// Non-move completions: (time, node).
    fixed: Vec<(f64, usize)>,
    /// Per node of this robot (by chain index): (delay, speed factor).
    noise: Vec<(f64, f64)>,
}

struct SimExecutor {
    params: KinodynamicParams,
    robots: Vec<RobotSim>,
    slot_of: BTreeMap<usize, usize>,
    first_node: Vec<usize>,
}

fn metric(cell: Cell, params: &KinodynamicParams, map_height: usize) -> (f64, f64) {
    (
        cell.col as f64 * params.cell_size,
        (map_height as f64 - 1.0 - cell.row as f64) * params.cell_size,
    )
}

impl SimExecutor {
    fn new(adg: &Adg, params: KinodynamicParams, cfg: &ExecConfig) -> Self {
        let mut robots = Vec::with_capacity(adg.num_robots());
        let mut slot_of = BTreeMap::new();
        let mut first_node = Vec::new();
        for (slot, start) in adg.robots.iter().enumerate() {
            slot_of.insert(start.id, slot);
            let nodes = adg.robot_nodes(slot);
            first_node.push(nodes.start);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(start.id as u64);
            let noise = nodes
                .map(|_| {
                    let d: f64 = rng.gen();
                    let s: f64 = rng.gen();
                    (d * cfg.max_delay, 1.0 - s * cfg.speed_noise)
                })
                .collect();
            let (x, y) = metric(start.cell, &params, adg.map_height);
            robots.push(RobotSim {
                x,
                y,
                angle: start.orientation.angle(),
                orient: start.orientation,
                free_at: 0.0,
                segments: Vec::new(),
                run: None,
                fixed: Vec::new(),
                noise,
            });
        }
        Self {
            params,
            robots,
            slot_of,
            first_node,
        }
    }

    /// Disturbance of the plan action that `node` belongs to.
    fn noise_of(&self, adg: &Adg, slot: usize, node: usize) -> (f64, f64) {
        let lead = node - adg.nodes[node].run_offset;
        self.robots[slot].noise[lead - self.first_node[slot]]
    }

    fn turn(&mut self, slot: usize, start: f64, dir: Turn, quarter_turns: u8) -> f64 {
        let p = &self.params;
        let r = &mut self.robots[slot];
        let dur = 90.0 * quarter_turns as f64 / p.omega;
        let sign = match dir {
            Turn::Left => 1.0,
            Turn::Right => -1.0,
        };
        let h1 = r.angle + sign * quarter_turns as f64 * FRAC_PI_2;
        r.segments.push(Segment::Turn {
            t0: start,
            t1: start + dur,
            x: r.x,
            y: r.y,
            h0: r.angle,
            h1,
        });
        r.angle = h1;
        r.orient = r.orient.rotated(dir, quarter_turns);
        r.free_at = start + dur;
        start + dur
    }

    fn start_run(&mut self, slot: usize, node: usize, start: f64, dir: Orientation, factor: f64) {
        let p = self.params;
        let mut t = start;
        let r = &self.robots[slot];
        if let Some((turn, q)) = r.orient.turn_to(dir) {
            t = self.turn(slot, start, turn, q);
        }
        let r = &mut self.robots[slot];
        let v_limit = p.v_max * factor;
        let profile = MotionProfile::new(p.cell_size, 0.0, v_limit, p.a_max);
        r.run = Some(Run {
            ox: r.x,
            oy: r.y,
            heading: r.angle,
            v_limit,
            s_off: 0.0,
            t_start: t,
            profile,
            targets: vec![(node, p.cell_size)],
        });
        r.free_at = t + profile.total;
    }

    /// Lengthens the current run by one cell at time `now`.
    fn extend_run(&mut self, slot: usize, node: usize, now: f64) {
        let p = self.params;
        let r = &mut self.robots[slot];
        let run = r.run.as_mut().expect("pipelined node continues a run");
        let target = run.targets.last().map(|t| t.1).unwrap_or(run.s_off + run.profile.distance) + p.cell_size;
        let (s, v, t0) = if now <= run.t_start {
            (run.s_off, run.profile.v0, run.t_start)
        } else {
            let tau = now - run.t_start;
            (run.s_off + run.profile.position(tau), run.profile.speed(tau), now)
        };
        // close the segment driven so far
        if t0 > run.t_start {
            r.segments.push(Segment::Drive {
                t0: run.t_start,
                t1: t0,
                x0: run.ox + run.s_off * run.heading.cos(),
                y0: run.oy + run.s_off * run.heading.sin(),
                heading: run.heading,
                profile: run.profile,
            });
        }
        let limit = run.v_limit.max(v).min(p.v_max);
        run.profile = MotionProfile::new(target - s, v, limit, p.a_max);
        run.s_off = s;
        run.t_start = t0;
        run.targets.push((node, target));
        r.free_at = run.end();
    }

    /// Ends a finished run: records its last segment and parks the robot.
    fn settle_run(&mut self, slot: usize) {
        let r = &mut self.robots[slot];
        if let Some(run) = r.run.take() {
            let end = run.end();
            r.segments.push(Segment::Drive {
                t0: run.t_start,
                t1: end,
                x0: run.ox + run.s_off * run.heading.cos(),
                y0: run.oy + run.s_off * run.heading.sin(),
                heading: run.heading,
                profile: run.profile,
            });
            let total = run.s_off + run.profile.distance;
            r.x = run.ox + total * run.heading.cos();
            r.y = run.oy + total * run.heading.sin();
        }
    }

    fn into_traces(mut self, adg: &Adg, log: &ExecutionLog, dt: f64) -> Vec<RobotTrace> {
        for slot in 0..self.robots.len() {
            self.settle_run(slot);
        }
        let completions = log.completion_times(adg);
        let horizon = completions.iter().copied().fold(0.0, f64::max);
        let steps = (horizon / dt).ceil() as usize + 1;
        self.robots
            .iter()
            .zip(&adg.robots)
            .zip(completions)
            .map(|((r, start), completion_time)| {
                let (sx, sy) = metric(start.cell, &self.params, adg.map_height);
                let rest = (sx, sy, start.orientation.angle());
                let mut seg = 0usize;
                let samples = (0..=steps)
                    .map(|k| {
                        let t = k as f64 * dt;
                        while seg < r.segments.len() && r.segments[seg].start() <= t {
                            seg += 1;
                        }
                        let (x, y, h) = if seg == 0 {
                            rest
                        } else {
                            r.segments[seg - 1].pose(t)
                        };
                        Sample {
                            t,
                            x,
                            y,
                            heading: wrap_angle(h),
                        }
                    })
                    .collect();
                RobotTrace {
                    id: start.id,
                    samples,
                    completion_time,
                }
            })
            .collect()
    }
}

fn wrap_angle(h: f64) -> f64 {
    let w = (h + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

impl Executor for SimExecutor {
    fn issue(&mut self, adg: &Adg, node: usize, now: f64) -> Result<(), ExecutorFault> {
        let n = &adg.nodes[node];
        let slot = self.slot_of[&n.robot];
        let (delay, factor) = self.noise_of(adg, slot, node);
        match n.action {
            NodeAction::Wait { .. } => self.robots[slot].fixed.push((now, node)),
            NodeAction::Rotate { dir, quarter_turns } => {
                self.settle_run(slot);
                let start = (now + delay).max(self.robots[slot].free_at);
                let end = self.turn(slot, start, dir, quarter_turns);
                self.robots[slot].fixed.push((end, node));
            }
            NodeAction::Move { from, to } => {
                let dir = from.direction_to(to).ok_or_else(|| ExecutorFault {
                    node: Some(node),
                    message: format!("move {from} -> {to} is not between adjacent cells"),
                })?;
                if n.is_pipelined() && self.robots[slot].run.is_some() {
                    self.extend_run(slot, node, now);
                } else {
                    self.settle_run(slot);
                    let start = (now + delay).max(self.robots[slot].free_at);
                    self.start_run(slot, node, start, dir, factor);
                }
            }
        }
        Ok(())
    }

    fn next_completion(&mut self, _adg: &Adg) -> Result<Option<(f64, usize)>, ExecutorFault> {
        let mut best: Option<(f64, usize, usize, bool)> = None;
        for (slot, r) in self.robots.iter().enumerate() {
            let mut consider = |t: f64, node: usize, is_move: bool| {
                if best.is_none_or(|b| (t, node) < (b.0, b.1)) {
                    best = Some((t, node, slot, is_move));
                }
            };
            for &(t, node) in &r.fixed {
                consider(t, node, false);
            }
            if let Some(run) = &r.run {
                if let Some(&(node, d)) = run.targets.first() {
                    consider(run.time_to(d), node, true);
                }
            }
        }
        let Some((t, node, slot, is_move)) = best else {
            return Ok(None);
        };
        let r = &mut self.robots[slot];
        if is_move {
            r.run.as_mut().expect("run with targets").targets.remove(0);
        } else {
            let i = r.fixed.iter().position(|&(_, n)| n == node).expect("pending node");
            r.fixed.remove(i);
        }
        Ok(Some((t, node)))
    }
}

/// Executes the dependency graph in the simulator and returns the sampled trace.
pub fn simulate(adg: &Adg, params: &KinodynamicParams, cfg: &ExecConfig) -> Result<ExecutionTrace, SimError> {
    cfg.check()?;
    if adg.num_robots() == 0 {
        return Err(SimError::EmptyFleet);
    }
    let mut exec = SimExecutor::new(adg, *params, cfg);
    let log = dispatch_loop(adg, &mut exec)?;
    let robots = exec.into_traces(adg, &log, cfg.dt);
    let mut trace = ExecutionTrace {
        dt: cfg.dt,
        robots,
        aet: 0.0,
        log,
    };
    trace.aet = average_execution_time(&trace)?;
    let violations = check_separation(&trace, params);
    if !violations.is_empty() {
        return Err(SimError::Collision(violations));
    }
    Ok(trace)
}

/// Every sample at which two robot centers are closer than the footprint diameter.
pub fn check_separation(trace: &ExecutionTrace, params: &KinodynamicParams) -> Vec<SeparationViolation> {
    let mut out = Vec::new();
    let steps = trace.robots.iter().map(|r| r.samples.len()).min().unwrap_or(0);
    for k in 0..steps {
        for (i, a) in trace.robots.iter().enumerate() {
            for b in &trace.robots[i + 1..] {
                let (p, q) = (a.samples[k], b.samples[k]);
                let distance = (p.x - q.x).hypot(p.y - q.y);
                if distance < params.footprint_diameter - 1e-9 {
                    out.push(SeparationViolation {
                        t: p.t,
                        a: a.id,
                        b: b.id,
                        distance,
                    });
                }
            }
        }
    }
    out
}

/// Mean completion time over robots.
pub fn average_execution_time(trace: &ExecutionTrace) -> Result<f64, SimError> {
    if trace.robots.is_empty() {
        return Err(SimError::EmptyFleet);
    }
    Ok(trace.robots.iter().map(|r| r.completion_time).sum::<f64>() / trace.robots.len() as f64)
}

impl ExecutionTrace {
    /// Rows `robot,t,x,y,heading`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("robot,t,x,y,heading\n");
        for r in &self.robots {
            for s in &r.samples {
                let _ = writeln!(out, "{},{:.3},{:.6},{:.6},{:.6}", r.id, s.t, s.x, s.y, s.heading);
            }
        }
        out
    }

    /// `{"aet", "completions": {id: t}, "violations": [...]}`.
    pub fn summary(&self, params: &KinodynamicParams) -> Summary {
        Summary {
            aet: self.aet,
            completions: self
                .robots
                .iter()
                .map(|r| (r.id.to_string(), r.completion_time))
                .collect(),
            violations: check_separation(self, params),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub aet: f64,
    pub completions: BTreeMap<String, f64>,
    pub violations: Vec<SeparationViolation>,
}

impl Summary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}
