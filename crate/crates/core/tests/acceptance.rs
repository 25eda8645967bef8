//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report is always printed:
//! `cargo test -p mapf-exec --test acceptance`.

mod support;

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use mapf_exec::adg::build_adg;
use mapf_exec::analysis::{ablation_table, pearson, Dataset, Feature};
use mapf_exec::experiment::{execute_plan, run_experiment, run_planner, ExperimentSpec, PlannerKind};
use mapf_exec::kinodynamics::{kinodynamic_pp, straight_run_profile, KinodynamicParams};
use mapf_exec::plan::{plan_cost, sum_of_costs, Model, Plan};
use mapf_exec::planners::{cbs_plan, lns_improve, prioritized_plan, PlannerConfig};
use mapf_exec::simulator::{check_separation, simulate, ExecConfig, ExecutionTrace, SimError};
use mapf_exec::validate::validate;
use mapf_exec::world::{random_instance, random_map, room_map, Cell, GridMap, Instance, Orientation, RobotTask};
use support::{grid_instance, joint_optimal_soc, tiny_instance};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ids(inst: &Instance) -> Vec<usize> {
    inst.robots.iter().map(|r| r.id).collect()
}

fn params_for(inst: &Instance) -> KinodynamicParams {
    KinodynamicParams {
        cell_size: inst.map.cell_size(),
        ..KinodynamicParams::default()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

// 1 -------------------------------------------------------------------------

fn optimality_oracle() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut mismatches = Vec::new();
    let mut seed = 0u64;
    while checked < 50 {
        let inst = tiny_instance(seed, 2 + (seed % 2) as usize);
        let model = if seed % 2 == 0 { Model::Standard } else { Model::Rotation };
        let k = ((seed / 2) % 2) as u32;
        seed += 1;
        let Some(opt) = joint_optimal_soc(&inst, model, k) else {
            continue;
        };
        checked += 1;
        let got = cbs_plan(&inst, &PlannerConfig::new(model).with_k(k))
            .ok()
            .map(|p| sum_of_costs(&p).unwrap().0);
        if got != Some(opt) {
            mismatches.push(format!("seed {} {model:?} k={k}: cbs {got:?} vs {opt}", seed - 1));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches.is_empty() && secs < 120.0,
        format!("{checked} instances, {} mismatches {:?}, {secs:.1} s", mismatches.len(), mismatches),
    )
}

// 2 -------------------------------------------------------------------------

fn validity() -> Outcome {
    let mut counts = std::collections::BTreeMap::<&str, (usize, usize)>::new();
    let mut bad = Vec::new();
    for s in 0..200u64 {
        let n = 4 + (s % 5) as usize;
        let inst = grid_instance(8, 8, 0.15, n, s);
        let model = if s % 2 == 0 { Model::Standard } else { Model::Rotation };
        let k = ((s / 2) % 2) as u32;
        let cfg = PlannerConfig {
            iteration_limit: Some(2000),
            time_limit: 20.0,
            neighborhood: 3,
            ..PlannerConfig::new(model).with_k(k).with_seed(s)
        };
        let runs: [(&str, PlannerKind, Model); 6] = [
            ("pp", PlannerKind::Pp, model),
            ("pp-restart", PlannerKind::PpRestart, model),
            ("pbs", PlannerKind::Pbs, model),
            ("cbs", PlannerKind::Cbs, model),
            ("lns", PlannerKind::Lns, model),
            ("kinodynamic-pp", PlannerKind::Pp, Model::Kinodynamic),
        ];
        for (name, planner, m) in runs {
            let mut c = PlannerConfig { model: m, ..cfg.clone() };
            if matches!(planner, PlannerKind::PpRestart | PlannerKind::Lns) {
                c.iteration_limit = Some(10);
            }
            let entry = counts.entry(name).or_default();
            entry.0 += 1;
            let Ok(out) = run_planner(planner, &inst, &c, &params_for(&inst)) else {
                continue;
            };
            entry.1 += 1;
            for plan in out.plans() {
                let report = validate(plan, &inst, if m == Model::Kinodynamic { 0 } else { k }).unwrap();
                let acyclic = build_adg(plan, &inst).map(|a| a.is_acyclic()).unwrap_or(false);
                if !report.is_valid() || !acyclic {
                    bad.push(format!("{name} seed {s}: {} violations, acyclic {acyclic}", report.violations.len()));
                }
            }
        }
    }
    let solved: Vec<String> = counts.iter().map(|(k, (a, s))| format!("{k} {s}/{a}")).collect();
    outcome(
        bad.is_empty(),
        format!("200 instances; solved {}; invalid {} {:?}", solved.join(", "), bad.len(), bad.iter().take(3).collect::<Vec<_>>()),
    )
}

// 3 -------------------------------------------------------------------------

fn execution_safety() -> Outcome {
    let start = Instant::now();
    let delays = [0.0, 0.5, 2.0];
    let noises = [0.0, 0.1, 0.3];
    let runs = [
        (PlannerKind::PpRestart, Model::Standard, 0),
        (PlannerKind::Pbs, Model::Rotation, 1),
        (PlannerKind::PpRestart, Model::Kinodynamic, 0),
        (PlannerKind::Lns, Model::Rotation, 0),
    ];
    let mut sims = 0;
    let mut failures = Vec::new();
    let mut seed = 0u64;
    while sims < 100 && seed < 400 {
        let inst = grid_instance(8, 8, 0.15, 8, 1000 + seed);
        let (planner, model, k) = runs[(seed % 4) as usize];
        seed += 1;
        let cfg = PlannerConfig {
            iteration_limit: Some(if planner == PlannerKind::Pbs { 2000 } else { 10 }),
            time_limit: 20.0,
            neighborhood: 3,
            ..PlannerConfig::new(model).with_k(k).with_seed(seed)
        };
        let params = params_for(&inst);
        let Ok(out) = run_planner(planner, &inst, &cfg, &params) else {
            continue;
        };
        let plan = out.best().unwrap();
        let adg = match build_adg(plan, &inst) {
            Ok(a) => a,
            Err(e) => {
                failures.push(format!("seed {seed} {planner} {model:?}: {e}"));
                sims += 1;
                continue;
            }
        };
        let exec = ExecConfig {
            max_delay: delays[sims % 3],
            speed_noise: noises[(sims / 3) % 3],
            seed,
            ..ExecConfig::default()
        };
        sims += 1;
        match simulate(&adg, &params, &exec) {
            Ok(trace) if check_separation(&trace, &params).is_empty() => {}
            Ok(_) => failures.push(format!("seed {seed}: violations")),
            Err(SimError::Collision(v)) => failures.push(format!("seed {seed}: {} violations", v.len())),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        sims == 100 && failures.is_empty() && secs < 300.0,
        format!("{sims} simulations, {} unsafe {:?}, {secs:.1} s", failures.len(), failures.iter().take(3).collect::<Vec<_>>()),
    )
}

// 4 -------------------------------------------------------------------------

/// Largest finite-difference speed and acceleration over a trace.
fn max_speed_accel(trace: &ExecutionTrace) -> (f64, f64) {
    let (mut vmax, mut amax) = (0.0f64, 0.0f64);
    for r in &trace.robots {
        let v: Vec<f64> = r
            .samples
            .windows(2)
            .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y) / (w[1].t - w[0].t))
            .collect();
        for pair in v.windows(2) {
            amax = amax.max((pair[1] - pair[0]).abs() / trace.dt);
        }
        vmax = v.iter().copied().fold(vmax, f64::max);
    }
    (vmax, amax)
}

fn kinematics() -> Outcome {
    let params = KinodynamicParams::default();
    let det = ExecConfig::deterministic();
    let mut worst_err = 0.0f64;
    let mut traces = Vec::new();
    for n in 1..=10usize {
        let map = Arc::new(GridMap::empty(1, 11));
        let inst = Instance::new(
            map,
            vec![RobotTask {
                id: 0,
                start: Cell::new(0, 0),
                start_orientation: Orientation::East,
                goal: Cell::new(0, n as i32),
            }],
        )
        .unwrap();
        let plan = kinodynamic_pp(&inst, &[0], &params, &PlannerConfig::new(Model::Kinodynamic)).unwrap();
        let trace = execute_plan(&plan, &inst, &params, &det).unwrap().trace;
        worst_err = worst_err.max((trace.robots[0].completion_time - straight_run_profile(n, &params).total).abs());
        traces.push(trace);
    }
    // a turn then a discrete 3-cell path: 3 s + 3 × 3.25 s
    let inst = Instance::new(
        Arc::new(GridMap::empty(4, 4)),
        vec![RobotTask {
            id: 0,
            start: Cell::new(3, 0),
            start_orientation: Orientation::East,
            goal: Cell::new(0, 0),
        }],
    )
    .unwrap();
    let plan = prioritized_plan(&inst, &[0], &PlannerConfig::new(Model::Rotation)).unwrap();
    let trace = execute_plan(&plan, &inst, &params, &det).unwrap().trace;
    worst_err = worst_err.max((trace.robots[0].completion_time - (90.0 / params.omega + 3.0 * 3.25)).abs());
    traces.push(trace);

    // disturbed multi-robot runs for the limit checks
    for s in 0..6u64 {
        let inst = grid_instance(8, 8, 0.1, 6, 500 + s);
        let cfg = PlannerConfig::new(Model::Kinodynamic).with_iterations(5).with_seed(s);
        if let Ok(out) = run_planner(PlannerKind::PpRestart, &inst, &cfg, &params) {
            let exec = ExecConfig {
                max_delay: 2.0,
                speed_noise: 0.3,
                seed: s,
                ..ExecConfig::default()
            };
            traces.push(execute_plan(out.best().unwrap(), &inst, &params, &exec).unwrap().trace);
        }
    }
    let eps = 2.0 * params.a_max * det.dt;
    let (v, a) = traces.iter().map(max_speed_accel).fold((0.0f64, 0.0f64), |m, x| (m.0.max(x.0), m.1.max(x.1)));
    outcome(
        worst_err <= det.dt && v <= params.v_max + eps && a <= params.a_max + eps,
        format!(
            "{} traces; worst completion error {worst_err:.2e} s (dt {}); max speed {v:.4} m/s, max |accel| {a:.4} m/s² (eps {eps:.3})",
            traces.len(),
            det.dt
        ),
    )
}

// 5 -------------------------------------------------------------------------

struct SeriesFit {
    label: String,
    plans: usize,
    r: Option<f64>,
    spread: f64,
}

fn lns_series_fits(map: &Arc<GridMap>, model: Model) -> Vec<SeriesFit> {
    let mut fits = Vec::new();
    for n in [10usize, 12, 14, 16, 18, 20] {
        for s in 0..3u64 {
            let inst = random_instance(map.clone(), n, 70 + 10 * n as u64 + s).unwrap();
            let cfg = PlannerConfig {
                iteration_limit: Some(1000),
                ..PlannerConfig::new(model).with_seed(s)
            };
            let mut fit = SeriesFit {
                label: format!("n{n}s{s}"),
                plans: 0,
                r: None,
                spread: 0.0,
            };
            // an id-order PP failure leaves nothing to improve
            let Ok(initial) = prioritized_plan(&inst, &ids(&inst), &cfg) else {
                fits.push(fit);
                continue;
            };
            let series = lns_improve(&inst, &initial, &cfg).unwrap();
            let params = params_for(&inst);
            // every plan of one instance runs under the same disturbance seed
            let exec = ExecConfig {
                seed: s,
                ..ExecConfig::default()
            };
            let (mut socs, mut aets) = (Vec::new(), Vec::new());
            for e in &series.entries {
                let t = execute_plan(&e.plan, &inst, &params, &exec).unwrap().trace;
                socs.push(e.soc.0 as f64);
                aets.push(t.aet);
            }
            fit.plans = socs.len();
            if socs.len() >= 3 {
                let c = pearson(&socs, &aets).unwrap();
                let ss: f64 = socs.iter().zip(&aets).map(|(x, y)| (y - (c.slope * x + c.intercept)).powi(2)).sum();
                fit.r = Some(c.r);
                fit.spread = (ss / socs.len() as f64).sqrt();
            }
            fits.push(fit);
        }
    }
    fits
}

fn soc_aet_correlation() -> Outcome {
    // Fixed candidate pool. An instance whose series has fewer than 3 plans
    // (PP was already locally optimal) has no defined correlation and is
    // reported as excluded. Pass: at least 5 instances reach r >= 0.8, the
    // median r is >= 0.8 and residual spread is nonzero. Every r is printed.
    // The gated series come from the rotation model, where SoC counts turns;
    // standard-model correlations are reported alongside.
    let map = Arc::new(random_map(16, 16, 0.1, 7));
    let fits = lns_series_fits(&map, Model::Rotation);
    let qualifying: Vec<&SeriesFit> = fits.iter().filter(|f| f.r.is_some()).collect();
    let mut rs: Vec<f64> = qualifying.iter().map(|f| f.r.unwrap()).collect();
    rs.sort_by(f64::total_cmp);
    let strong = rs.iter().filter(|&&r| r >= 0.8).count();
    let median = rs.get(rs.len() / 2).copied().unwrap_or(f64::NAN);
    let pass = strong >= 5 && median >= 0.8 && qualifying.iter().any(|f| f.spread > 0.0);
    let lines: Vec<String> = qualifying
        .iter()
        .map(|f| format!("{}: {} plans r={:.3} resid {:.3}s", f.label, f.plans, f.r.unwrap(), f.spread))
        .collect();
    let excluded: Vec<String> = fits.iter().filter(|f| f.r.is_none()).map(|f| format!("{}:{}", f.label, f.plans)).collect();
    let mut standard: Vec<f64> = lns_series_fits(&map, Model::Standard).iter().filter_map(|f| f.r).collect();
    standard.sort_by(f64::total_cmp);
    let std_note = match standard.len() {
        0 => "none".to_string(),
        m => format!(
            "{m} series, r min {:.3} median {:.3}, {} with r >= 0.8",
            standard[0],
            standard[m / 2],
            standard.iter().filter(|&&r| r >= 0.8).count()
        ),
    };
    outcome(
        pass,
        format!(
            "rotation model, {} instances with >=3 plans, {strong} with r >= 0.8, median r {median:.3}: {}; excluded (plans) {}; standard model for reference: {std_note}",
            qualifying.len(),
            lines.join(", "),
            excluded.join(" ")
        ),
    )
}

// 6 -------------------------------------------------------------------------

const TABLE_SPEC: &str = r#"
seed = 3
scenarios = 14
folds = 5

[[maps]]
name = "empty10"
kind = "empty"
height = 10
width = 10
robots = [6, 12]

[[maps]]
name = "random16"
kind = "random"
height = 16
width = 16
obstacles = 0.1
seed = 1
robots = [8, 16]

[[maps]]
name = "rooms"
kind = "room"
rooms = 3
room_size = 4
seed = 2
robots = [8, 16]

[[maps]]
name = "random32"
kind = "random"
height = 32
width = 32
obstacles = 0.1
seed = 4
robots = [10, 20]

[[runs]]
planner = "lns"
model = "standard"
execute = "all"

[[runs]]
planner = "lns"
model = "rotation"
execute = "all"

[planner]
iterations = 60
neighborhood = 4
"#;

fn feature_ablation() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec::from_toml(TABLE_SPEC).unwrap();
    let out = run_experiment(&spec, Path::new("."), dir.path()).unwrap();
    let data: &Dataset = &out.dataset;
    let report = match ablation_table(data, 5, 3) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("{} rows: {e}", data.len())),
    };
    let all = report.all().cv_mape;
    let ranking = report.ranking();
    let best_single = report.single(ranking[0]).unwrap().cv_mape;
    let soc_rank = ranking.iter().position(|&f| f == Feature::Soc).unwrap() + 1;
    let cols: Vec<String> = report
        .entries
        .iter()
        .map(|e| format!("{}={:.4}", e.feature.map(Feature::name).unwrap_or("all"), e.cv_mape))
        .collect();
    outcome(
        data.len() >= 300 && all < best_single && soc_rank <= 2,
        format!("{} rows; cv MAPE {}; SoC rank {soc_rank}", data.len(), cols.join(" ")),
    )
}

// 7 -------------------------------------------------------------------------

fn model_ordering() -> Outcome {
    let maps: Vec<(&str, Arc<GridMap>)> = vec![
        ("random16", Arc::new(random_map(16, 16, 0.1, 11))),
        ("rooms", Arc::new(room_map(4, 3, 12))),
    ];
    let models = [Model::Standard, Model::Rotation, Model::Kinodynamic];
    let mut aet: [Vec<f64>; 3] = Default::default();
    for (_, map) in &maps {
        for s in 0..16u64 {
            let inst = random_instance(map.clone(), 20, 200 + s).unwrap();
            let params = params_for(&inst);
            let plans: Vec<Option<Plan>> = models
                .iter()
                .map(|&m| {
                    let cfg = PlannerConfig::new(m).with_iterations(10).with_seed(s);
                    run_planner(PlannerKind::PpRestart, &inst, &cfg, &params)
                        .ok()
                        .and_then(|o| o.best().cloned())
                })
                .collect();
            if plans.iter().any(Option::is_none) {
                continue;
            }
            for (i, p) in plans.iter().enumerate() {
                let exec = ExecConfig {
                    seed: s,
                    ..ExecConfig::default()
                };
                aet[i].push(execute_plan(p.as_ref().unwrap(), &inst, &params, &exec).unwrap().trace.aet);
            }
        }
    }
    let n = aet[0].len();
    let (st, rot, kin) = (mean(&aet[0]), mean(&aet[1]), mean(&aet[2]));
    let margin = 1.0 - rot / st;
    outcome(
        n >= 20 && kin < rot && rot < st && margin >= 0.10,
        format!("{n} instances; mean AET standard {st:.2} s, rotation {rot:.2} s, kinodynamic {kin:.2} s; rotation gain {:.1}%", 100.0 * margin),
    )
}

// 8 -------------------------------------------------------------------------

fn k_robust_tradeoff() -> Outcome {
    let map = Arc::new(random_map(12, 12, 0.15, 21));
    let plan_with = |inst: &Instance, k: u32, s: u64| {
        let cfg = PlannerConfig::new(Model::Rotation).with_k(k).with_iterations(10).with_seed(s);
        run_planner(PlannerKind::PpRestart, inst, &cfg, &params_for(inst))
            .ok()
            .and_then(|o| o.best().cloned())
    };
    let (mut a0, mut a1) = (Vec::new(), Vec::new());
    for s in 0..10u64 {
        let inst = random_instance(map.clone(), 4, 300 + s).unwrap();
        let (Some(p0), Some(p1)) = (plan_with(&inst, 0, s), plan_with(&inst, 1, s)) else {
            continue;
        };
        let params = params_for(&inst);
        let exec = ExecConfig {
            seed: s,
            ..ExecConfig::default()
        };
        a0.push(execute_plan(&p0, &inst, &params, &exec).unwrap().trace.aet);
        a1.push(execute_plan(&p1, &inst, &params, &exec).unwrap().trace.aet);
    }
    let (m0, m1) = (mean(&a0), mean(&a1));
    let mut table = Vec::new();
    let mut largest = None;
    for n in [20usize, 30, 40, 50] {
        let (mut s0, mut s2) = (0, 0);
        for s in 0..10u64 {
            let inst = random_instance(map.clone(), n, 400 + s).unwrap();
            s0 += plan_with(&inst, 0, s).is_some() as usize;
            s2 += plan_with(&inst, 2, s).is_some() as usize;
        }
        table.push(format!("n={n}: k0 {s0}/10 k2 {s2}/10"));
        if s0 > 0 {
            largest = Some((n, s0, s2));
        }
    }
    let success_ok = largest.is_some_and(|(_, s0, s2)| s2 <= s0);
    outcome(
        !a0.is_empty() && m1 <= m0 * 1.1 && success_ok,
        format!(
            "n=4 ({} inst): AET k0 {m0:.2} s, k1 {m1:.2} s; {}; largest solvable n {:?}",
            a0.len(),
            table.join(", "),
            largest.map(|l| l.0)
        ),
    )
}

// 9 -------------------------------------------------------------------------

const DETERMINISM_SPEC: &str = r#"
seed = 5
scenarios = 2

[[maps]]
name = "random10"
kind = "random"
height = 10
width = 10
robots = [5, 8]

[[runs]]
planner = "lns"
model = "rotation"
execute = "all"

[[runs]]
planner = "pp-restart"
model = "kinodynamic"

[[runs]]
planner = "pbs"
model = "standard"
k = 1

[planner]
iterations = 30
neighborhood = 3
"#;

const ARTIFACTS: [&str; 6] = ["dataset.csv", "success.csv", "cells.csv", "scatter.csv", "correlation.csv", "ablation.csv"];

fn read_artifacts(dir: &Path) -> Vec<Option<Vec<u8>>> {
    ARTIFACTS.iter().map(|a| std::fs::read(dir.join(a)).ok()).collect()
}

fn determinism() -> Outcome {
    let mut spec = ExperimentSpec::from_toml(DETERMINISM_SPEC).unwrap();
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    spec.workers = 4;
    run_experiment(&spec, Path::new("."), d1.path()).unwrap();
    spec.workers = 1;
    run_experiment(&spec, Path::new("."), d2.path()).unwrap();
    let first = read_artifacts(d1.path());
    let same_parallel = first == read_artifacts(d2.path());

    // drop every other cell result and resume
    let mut cells: Vec<_> = std::fs::read_dir(d1.path().join("cells")).unwrap().map(|e| e.unwrap().path()).collect();
    cells.sort();
    for p in cells.iter().step_by(2) {
        std::fs::remove_file(p).unwrap();
    }
    let resumed = run_experiment(&spec, Path::new("."), d1.path()).unwrap();
    let same_resumed = first == read_artifacts(d1.path());

    // simulator summary and trace bytes
    let inst = grid_instance(8, 8, 0.1, 6, 9);
    let params = params_for(&inst);
    let plan = run_planner(PlannerKind::Pbs, &inst, &PlannerConfig::new(Model::Rotation), &params)
        .unwrap()
        .best()
        .cloned()
        .unwrap();
    let exec = ExecConfig {
        seed: 42,
        max_delay: 2.0,
        speed_noise: 0.3,
        ..ExecConfig::default()
    };
    let run = || {
        let t = execute_plan(&plan, &inst, &params, &exec).unwrap().trace;
        (t.summary(&params).to_json(), t.to_csv())
    };
    let same_summary = run() == run();
    let rows = String::from_utf8(first[0].clone().unwrap_or_default()).unwrap().lines().count().saturating_sub(1);
    outcome(
        same_parallel && same_resumed && same_summary && rows > 0,
        format!(
            "{rows} dataset rows; 4 vs 1 workers identical {same_parallel}; resumed ({} recomputed) identical {same_resumed}; summary/trace identical {same_summary}; plan cost {}",
            resumed.computed,
            plan_cost(&plan).unwrap()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("optimality oracle", optimality_oracle),
        ("validity", validity),
        ("execution safety", execution_safety),
        ("kinematics exactness", kinematics),
        ("SoC-AET correlation", soc_aet_correlation),
        ("feature ablation", feature_ablation),
        ("model ordering", model_ordering),
        ("k-robust trade-off", k_robust_tradeoff),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        failed += !o.pass as usize;
        println!(
            "criterion {id} {name}: {} ({:.1} s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
