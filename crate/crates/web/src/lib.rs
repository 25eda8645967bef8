//! Browser bindings for the planning-to-execution pipeline.
//!
//! Every export takes plain numbers or strings and returns a JSON string, so
//! the page needs no glue beyond `JSON.parse`. The functions are ordinary Rust
//! too, which keeps them testable natively.

use std::sync::Arc;

use mapf_exec::experiment::{execute_plan, run_planner, PipelineError, PlannerKind};
use mapf_exec::kinodynamics::{straight_run_profile, KinodynamicParams};
use mapf_exec::plan::{sum_of_costs, Model};
use mapf_exec::planners::PlannerConfig;
use mapf_exec::simulator::ExecConfig;
use mapf_exec::world::{random_instance, random_map, room_map, GridMap, Instance, WorldError};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error("unknown map kind {0:?} (random, rooms or empty)")]
    MapKind(String),
    #[error("unknown model {0:?}")]
    Model(String),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl From<DemoError> for JsValue {
    fn from(e: DemoError) -> Self {
        JsValue::from_str(&e.to_string())
    }
}

#[derive(Serialize)]
struct ProfilePoint {
    t: f64,
    v: f64,
    s: f64,
}

#[derive(Serialize)]
struct ProfileView {
    cells: usize,
    total: f64,
    v_peak: f64,
    points: Vec<ProfilePoint>,
}

/// Speed and distance over time for a stop-to-stop run of `cells` cells.
pub fn profile(cells: usize, samples: usize) -> String {
    let p = straight_run_profile(cells, &KinodynamicParams::default());
    let samples = samples.max(2);
    let points = (0..samples)
        .map(|i| {
            let t = p.total * i as f64 / (samples - 1) as f64;
            ProfilePoint {
                t,
                v: p.speed(t),
                s: p.position(t),
            }
        })
        .collect();
    serde_json::to_string(&ProfileView {
        cells,
        total: p.total,
        v_peak: p.v_peak,
        points,
    })
    .expect("profile serializes")
}

fn demo_map(kind: &str, seed: u64) -> Result<GridMap, DemoError> {
    match kind {
        "random" => Ok(random_map(12, 12, 0.15, seed)),
        "rooms" => Ok(room_map(3, 3, seed)),
        "empty" => Ok(GridMap::empty(10, 10)),
        other => Err(DemoError::MapKind(other.to_string())),
    }
}

fn demo_instance(kind: &str, robots: usize, seed: u64) -> Result<Instance, DemoError> {
    let map = Arc::new(demo_map(kind, seed)?);
    Ok(random_instance(map, robots, seed)?)
}

fn params_for(inst: &Instance) -> KinodynamicParams {
    KinodynamicParams {
        cell_size: inst.map.cell_size(),
        ..KinodynamicParams::default()
    }
}

fn plan_and_run(inst: &Instance, model: Model, seed: u64, exec: &ExecConfig) -> Result<RunView, DemoError> {
    let params = params_for(inst);
    let cfg = PlannerConfig::new(model).with_iterations(10).with_seed(seed);
    let out = run_planner(PlannerKind::PpRestart, inst, &cfg, &params)?;
    let plan = out.best().expect("restart series is never empty");
    let run = execute_plan(plan, inst, &params, exec)?;
    Ok(RunView {
        model: model.name().to_string(),
        soc: sum_of_costs(plan).map(|c| c.0).ok(),
        aet: run.trace.aet,
        type2_edges: run.features.type2_edges,
        robots: run
            .trace
            .robots
            .iter()
            .map(|r| RobotView {
                id: r.id,
                completion: r.completion_time,
                xyh: r.samples.iter().map(|s| [s.x, s.y, s.heading]).collect(),
            })
            .collect(),
        dt: run.trace.dt,
    })
}

#[derive(Serialize)]
struct RobotView {
    id: usize,
    completion: f64,
    xyh: Vec<[f64; 3]>,
}

#[derive(Serialize)]
struct RunView {
    model: String,
    soc: Option<u64>,
    aet: f64,
    type2_edges: u64,
    dt: f64,
    robots: Vec<RobotView>,
}

#[derive(Serialize)]
struct SimulationView {
    height: usize,
    width: usize,
    blocked: Vec<[i32; 2]>,
    goals: Vec<[i32; 2]>,
    run: RunView,
}

/// Plans a random instance, executes it under disturbances and returns the
/// map plus per-robot pose samples.
pub fn simulate(map: &str, robots: usize, model: &str, seed: u64, max_delay: f64, speed_noise: f64) -> Result<String, DemoError> {
    let model: Model = model.parse().map_err(|_| DemoError::Model(model.to_string()))?;
    let inst = demo_instance(map, robots, seed)?;
    let exec = ExecConfig {
        max_delay,
        speed_noise,
        seed,
        ..ExecConfig::default()
    };
    let run = plan_and_run(&inst, model, seed, &exec)?;
    let view = SimulationView {
        height: inst.map.height(),
        width: inst.map.width(),
        blocked: inst.map.blocked_cells().iter().map(|c| [c.row, c.col]).collect(),
        goals: inst.robots.iter().map(|r| [r.goal.row, r.goal.col]).collect(),
        run,
    };
    Ok(serde_json::to_string(&view).expect("view serializes"))
}

#[derive(Serialize)]
struct ComparisonRow {
    model: String,
    soc: Option<u64>,
    aet: f64,
}

/// Plans one instance under each model fidelity and executes all three with
/// the same disturbance seed.
pub fn compare(map: &str, robots: usize, seed: u64) -> Result<String, DemoError> {
    let inst = demo_instance(map, robots, seed)?;
    let exec = ExecConfig {
        seed,
        ..ExecConfig::default()
    };
    let mut rows = Vec::new();
    for model in [Model::Standard, Model::Rotation, Model::Kinodynamic] {
        let run = plan_and_run(&inst, model, seed, &exec)?;
        rows.push(ComparisonRow {
            model: run.model,
            soc: run.soc,
            aet: run.aet,
        });
    }
    Ok(serde_json::to_string(&rows).expect("rows serialize"))
}

#[wasm_bindgen(js_name = profile)]
pub fn profile_js(cells: u32, samples: u32) -> String {
    profile(cells as usize, samples as usize)
}

#[wasm_bindgen(js_name = simulate)]
pub fn simulate_js(map: &str, robots: u32, model: &str, seed: u32, max_delay: f64, speed_noise: f64) -> Result<String, JsValue> {
    Ok(simulate(map, robots as usize, model, seed as u64, max_delay, speed_noise)?)
}

#[wasm_bindgen(js_name = compare)]
pub fn compare_js(map: &str, robots: u32, seed: u32) -> Result<String, JsValue> {
    Ok(compare(map, robots as usize, seed as u64)?)
}
