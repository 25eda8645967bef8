use std::path::{Path, PathBuf};

use assert_cmd::Command;
use mapf_exec::plan::{ActionKind, ActionPrimitive, Model, Plan, RobotPlan};
use mapf_exec::world::{save_map, Cell, GridMap, Instance, Orientation, RobotTask};
use std::sync::Arc;

fn mapfx() -> Command {
    Command::cargo_bin("mapfx").unwrap()
}

fn write_map(dir: &Path) -> PathBuf {
    let path = dir.join("empty8.map");
    save_map(&GridMap::empty(8, 8), &path).unwrap();
    path
}

fn one_robot_instance(dir: &Path) -> PathBuf {
    write_map(dir);
    let inst = Instance::new(
        Arc::new(GridMap::empty(8, 8)),
        vec![RobotTask {
            id: 0,
            start: Cell::new(0, 0),
            start_orientation: Orientation::East,
            goal: Cell::new(0, 3),
        }],
    )
    .unwrap()
    .with_map_path("empty8.map");
    let path = dir.join("inst.json");
    std::fs::write(&path, inst.to_json()).unwrap();
    path
}

fn stdout_of(cmd: &mut Command) -> String {
    let out = cmd.assert().success().get_output().stdout.clone();
    String::from_utf8(out).unwrap()
}

#[test]
fn plan_pbs_rotation_writes_plan_json() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path());
    let text = stdout_of(mapfx().args(["plan", "--planner", "pbs", "--model", "rotation", "-k", "1", "-n", "5"]).arg("--map").arg(&map));
    let plan = Plan::from_json(&text).unwrap();
    assert_eq!(plan.model, Model::Rotation);
    assert_eq!(plan.num_robots(), 5);
}

#[test]
fn cbs_kinodynamic_is_an_unsupported_pair() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path());
    mapfx()
        .args(["plan", "--planner", "cbs", "--model", "kinodynamic", "-n", "2", "--map"])
        .arg(&map)
        .assert()
        .code(1)
        .stderr(predicates::str::contains("unsupported pair"));
}

#[test]
fn pp_restart_writes_a_series() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path());
    let text = stdout_of(
        mapfx()
            .args(["plan", "--planner", "pp-restart", "--time-limit", "10", "--iterations", "5", "--seed", "3", "-n", "6", "--map"])
            .arg(&map),
    );
    let series: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(!series.as_array().unwrap().is_empty());
}

#[test]
fn bad_usage_exits_one() {
    mapfx().args(["plan", "--planner", "astar"]).assert().code(1);
    mapfx().args(["frobnicate"]).assert().code(1);
}

#[test]
fn execute_valid_plan_and_repeat_identically() {
    let dir = tempfile::tempdir().unwrap();
    let inst = one_robot_instance(dir.path());
    let plan = dir.path().join("plan.json");
    mapfx().args(["plan", "--planner", "pp", "-o"]).arg(&plan).arg("--instance").arg(&inst).assert().success();
    let run = || {
        stdout_of(
            mapfx()
                .args(["execute", "--seed", "4", "--plan"])
                .arg(&plan)
                .arg("--instance")
                .arg(&inst)
                .arg("--trace")
                .arg(dir.path().join("trace.csv")),
        )
    };
    let first = run();
    assert_eq!(first, run());
    let summary: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert!(summary["aet"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["violations"].as_array().unwrap().len(), 0);
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("robot,t,x,y,heading\n"));
}

#[test]
fn teleporting_plan_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let inst = one_robot_instance(dir.path());
    let plan = Plan::discrete(
        Model::Standard,
        vec![RobotPlan {
            id: 0,
            actions: vec![ActionPrimitive::new(
                ActionKind::Move {
                    cells: vec![Cell::new(0, 0), Cell::new(0, 3)],
                },
                0.0,
                1.0,
            )],
        }],
    );
    let path = dir.path().join("bad.json");
    std::fs::write(&path, plan.to_json()).unwrap();
    mapfx()
        .args(["execute", "--plan"])
        .arg(&path)
        .arg("--instance")
        .arg(&inst)
        .assert()
        .code(1)
        .stderr(predicates::str::contains("refusing to execute"));
    mapfx().args(["validate", "--plan"]).arg(&path).arg("--instance").arg(&inst).assert().code(1);
}

#[test]
fn features_and_validate_on_a_good_plan() {
    let dir = tempfile::tempdir().unwrap();
    let inst = one_robot_instance(dir.path());
    let plan = dir.path().join("plan.json");
    mapfx()
        .args(["plan", "--planner", "cbs", "--model", "rotation", "-o"])
        .arg(&plan)
        .arg("--instance")
        .arg(&inst)
        .assert()
        .success();
    mapfx().args(["validate", "--plan"]).arg(&plan).arg("--instance").arg(&inst).assert().success();
    let f: serde_json::Value =
        serde_json::from_str(&stdout_of(mapfx().args(["features", "--plan"]).arg(&plan).arg("--instance").arg(&inst))).unwrap();
    assert_eq!(f["soc"], 3);
    assert_eq!(f["robots"], 1);
}

#[test]
fn experiment_then_regress() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("exp.toml");
    std::fs::write(
        &spec,
        r#"
scenarios = 1
workers = 1
output = "out"

[[maps]]
name = "open"
kind = "empty"
height = 6
width = 6
robots = [3]

[[runs]]
planner = "pp"
model = "standard"
"#,
    )
    .unwrap();
    mapfx().arg("experiment").arg(&spec).assert().success();
    let data = std::fs::read_to_string(dir.path().join("out/dataset.csv")).unwrap();
    assert_eq!(data.lines().count(), 2);
    // too few rows for a quadratic fit: a usage error, not a crash
    mapfx()
        .args(["regress", "--features", "soc", "--dataset"])
        .arg(dir.path().join("out/dataset.csv"))
        .assert()
        .code(1);
}
