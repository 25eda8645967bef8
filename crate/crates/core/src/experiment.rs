//! End-to-end pipeline (plan, dependency graph, simulate, featurize) and the
//! batch experiment runner behind the `experiment` subcommand.
//!
//! An experiment is a matrix of maps × robot counts × scenario seeds × planner
//! runs. Each matrix entry ("cell") is an independent job whose result is
//! stored under a file named by the hash of its full specification, so an
//! interrupted run resumes by skipping cells whose result files exist.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adg::{build_adg, count_features, Adg, AdgError};
use crate::analysis::{ablation_table, correlation, scatter_csv, AnalysisError, DataRow, Dataset, Feature, FeatureVector};
use crate::kinodynamics::{kinodynamic_pp, kinodynamic_pp_restart, KinodynamicParams};
use crate::plan::{plan_cost, Model, Plan};
use crate::planners::{
    cbs_plan, lns_improve, pbs_plan, pp_restart_anytime, prioritized_plan, PlanSeries, PlannerConfig, PlannerError,
};
use crate::simulator::{simulate, ExecConfig, ExecutionTrace, SimError};
use crate::validate::{validate, ValidationError, ValidationReport};
use crate::world::{load_map, random_instance, random_map, room_map, GridMap, Instance, WorldError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("unsupported pair: planner {planner} cannot plan under the {model} model")]
    UnsupportedPair { planner: PlannerKind, model: &'static str },
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error("refusing to execute an invalid plan ({} violation(s))", .0.violations.len())]
    Refused(ValidationReport),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Adg(#[from] AdgError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlannerKind {
    #[serde(rename = "pp")]
    Pp,
    #[serde(rename = "pp-restart")]
    PpRestart,
    #[serde(rename = "pbs")]
    Pbs,
    #[serde(rename = "cbs")]
    Cbs,
    #[serde(rename = "lns")]
    Lns,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 5] = [
        PlannerKind::Pp,
        PlannerKind::PpRestart,
        PlannerKind::Pbs,
        PlannerKind::Cbs,
        PlannerKind::Lns,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Pp => "pp",
            PlannerKind::PpRestart => "pp-restart",
            PlannerKind::Pbs => "pbs",
            PlannerKind::Cbs => "cbs",
            PlannerKind::Lns => "lns",
        }
    }

    /// Only the prioritized planners have a kinodynamic variant.
    pub fn supports(self, model: Model) -> bool {
        model.is_discrete() || matches!(self, PlannerKind::Pp | PlannerKind::PpRestart)
    }

    pub fn is_anytime(self) -> bool {
        matches!(self, PlannerKind::PpRestart | PlannerKind::Lns)
    }
}

impl std::fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown planner {s:?} (expected pp, pp-restart, pbs, cbs or lns)"))
    }
}

/// What a planner returned: one plan, or a series of improving plans.
#[derive(Debug, Clone)]
pub enum PlanOutput {
    Single(Plan),
    Series(PlanSeries),
}

impl PlanOutput {
    pub fn best(&self) -> Option<&Plan> {
        match self {
            PlanOutput::Single(p) => Some(p),
            PlanOutput::Series(s) => s.best().map(|e| &e.plan),
        }
    }

    pub fn plans(&self) -> Vec<&Plan> {
        match self {
            PlanOutput::Single(p) => vec![p],
            PlanOutput::Series(s) => s.entries.iter().map(|e| &e.plan).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            PlanOutput::Single(p) => p.to_json(),
            PlanOutput::Series(s) => serde_json::to_string_pretty(s).expect("series serializes"),
        }
    }
}

/// Restarts used to find the initial plan that LNS improves.
const LNS_INITIAL_RESTARTS: u64 = 10;

/// Runs one planner under `config.model`.
pub fn run_planner(
    planner: PlannerKind,
    instance: &Instance,
    config: &PlannerConfig,
    params: &KinodynamicParams,
) -> Result<PlanOutput, PipelineError> {
    if !planner.supports(config.model) {
        return Err(PipelineError::UnsupportedPair {
            planner,
            model: config.model.name(),
        });
    }
    let ids: Vec<usize> = instance.robots.iter().map(|r| r.id).collect();
    let kino = config.model == Model::Kinodynamic;
    Ok(match planner {
        PlannerKind::Pp if kino => PlanOutput::Single(kinodynamic_pp(instance, &ids, params, config)?),
        PlannerKind::Pp => PlanOutput::Single(prioritized_plan(instance, &ids, config)?),
        PlannerKind::PpRestart if kino => PlanOutput::Series(kinodynamic_pp_restart(instance, params, config)?),
        PlannerKind::PpRestart => PlanOutput::Series(pp_restart_anytime(instance, config)?),
        PlannerKind::Pbs => PlanOutput::Single(pbs_plan(instance, config)?),
        PlannerKind::Cbs => PlanOutput::Single(cbs_plan(instance, config)?),
        PlannerKind::Lns => {
            let init_cfg = PlannerConfig {
                iteration_limit: Some(LNS_INITIAL_RESTARTS),
                ..config.clone()
            };
            let init = pp_restart_anytime(instance, &init_cfg)?;
            let initial = &init.best().ok_or(PlannerError::NoSolution(LNS_INITIAL_RESTARTS))?.plan;
            PlanOutput::Series(lns_improve(instance, initial, config)?)
        }
    })
}

/// A plan carried through dependency-graph construction and simulation.
#[derive(Debug, Clone)]
pub struct Execution {
    pub adg: Adg,
    pub features: FeatureVector,
    pub trace: ExecutionTrace,
}

/// Validates, builds the dependency graph and simulates. Invalid plans are refused.
pub fn execute_plan(
    plan: &Plan,
    instance: &Instance,
    params: &KinodynamicParams,
    cfg: &ExecConfig,
) -> Result<Execution, PipelineError> {
    let report = validate(plan, instance, 0)?;
    if !report.is_valid() {
        return Err(PipelineError::Refused(report));
    }
    let adg = build_adg(plan, instance)?;
    let features = count_features(&adg, plan);
    let trace = simulate(&adg, params, cfg)?;
    Ok(Execution { adg, features, trace })
}

// ---------------------------------------------------------------------------
// experiment spec

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapSource {
    Random {
        height: usize,
        width: usize,
        #[serde(default = "default_obstacles")]
        obstacles: f64,
        #[serde(default)]
        seed: u64,
    },
    Room {
        rooms: usize,
        room_size: usize,
        #[serde(default)]
        seed: u64,
    },
    Empty {
        height: usize,
        width: usize,
    },
    /// MovingAI `.map` file, relative to the spec file.
    File { path: PathBuf },
}

fn default_obstacles() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub name: String,
    #[serde(flatten)]
    pub source: MapSource,
    /// Robot counts swept on this map.
    pub robots: Vec<usize>,
}

/// Which plans of an anytime planner's series are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecuteWhich {
    #[default]
    Best,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub planner: PlannerKind,
    pub model: Model,
    #[serde(default)]
    pub k: u32,
    #[serde(default)]
    pub execute: ExecuteWhich,
}

impl RunSpec {
    pub fn label(&self) -> String {
        format!("{}-{}-k{}", self.planner, self.model.name(), self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerSettings {
    /// Wall-clock safety net per planner call, seconds.
    pub time_limit: f64,
    /// Restarts, LNS rounds or search nodes; this is what bounds a run
    /// reproducibly.
    pub iterations: u64,
    pub neighborhood: usize,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        Self {
            time_limit: 60.0,
            iterations: 100,
            neighborhood: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub seed: u64,
    /// Number of scenarios (random start/goal assignments) per map and robot count.
    pub scenarios: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub maps: Vec<MapSpec>,
    pub runs: Vec<RunSpec>,
    #[serde(default)]
    pub planner: PlannerSettings,
    #[serde(default)]
    pub exec: ExecConfig,
    #[serde(default)]
    pub kinodynamics: KinodynamicParams,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn default_folds() -> usize {
    5
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let spec: Self = toml::from_str(text)?;
        spec.check()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf), ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_toml(&text)?, base))
    }

    pub fn check(&self) -> Result<(), ExperimentError> {
        if self.maps.is_empty() || self.runs.is_empty() || self.scenarios == 0 {
            return Err(ExperimentError::Spec("need at least one map, run and scenario".into()));
        }
        if let Some(r) = self.runs.iter().find(|r| !r.planner.supports(r.model)) {
            return Err(ExperimentError::Spec(format!(
                "unsupported pair: planner {} with model {}",
                r.planner,
                r.model.name()
            )));
        }
        if let Some(m) = self.maps.iter().find(|m| m.robots.is_empty()) {
            return Err(ExperimentError::Spec(format!("map {} lists no robot counts", m.name)));
        }
        if !self.kinodynamics.is_valid() {
            return Err(ExperimentError::Spec("invalid kinodynamic parameters".into()));
        }
        self.exec.check().map_err(|e| ExperimentError::Spec(e.to_string()))
    }

    fn build_map(&self, m: &MapSpec, base: &Path) -> Result<GridMap, ExperimentError> {
        Ok(match &m.source {
            MapSource::Random {
                height,
                width,
                obstacles,
                seed,
            } => random_map(*height, *width, *obstacles, *seed),
            MapSource::Room { rooms, room_size, seed } => room_map(*rooms, *room_size, *seed),
            MapSource::Empty { height, width } => GridMap::empty(*height, *width),
            MapSource::File { path } => load_map(base.join(path))?,
        })
    }
}

/// Full specification of one job; its hash names the result file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSpec {
    pub map: String,
    pub map_text: String,
    pub robots: usize,
    pub scenario: usize,
    pub instance_seed: u64,
    pub run: RunSpec,
    pub planner: PlannerSettings,
    pub exec: ExecConfig,
    pub kinodynamics: KinodynamicParams,
}

impl CellSpec {
    pub fn key(&self) -> String {
        let json = serde_json::to_string(self).expect("cell spec serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }

    pub fn instance_id(&self) -> String {
        format!("{}-n{}-s{}", self.map, self.robots, self.scenario)
    }

    fn planner_config(&self) -> PlannerConfig {
        PlannerConfig {
            model: self.run.model,
            k: self.run.k,
            time_limit: self.planner.time_limit,
            iteration_limit: Some(self.planner.iterations),
            seed: self.instance_seed,
            horizon_cap: None,
            neighborhood: self.planner.neighborhood,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub key: String,
    pub map: String,
    pub robots: usize,
    pub scenario: usize,
    pub run: String,
    pub solved: bool,
    pub error: Option<String>,
    /// Cost of the best plan.
    pub soc: Option<u64>,
    /// AET of the best plan.
    pub aet: Option<f64>,
    pub rows: Vec<DataRow>,
}

fn run_cell(spec: &CellSpec, map: Arc<GridMap>) -> CellResult {
    let mut result = CellResult {
        key: spec.key(),
        map: spec.map.clone(),
        robots: spec.robots,
        scenario: spec.scenario,
        run: spec.run.label(),
        solved: false,
        error: None,
        soc: None,
        aet: None,
        rows: Vec::new(),
    };
    let outcome = (|| -> Result<(), String> {
        let instance = random_instance(map, spec.robots, spec.instance_seed).map_err(|e| e.to_string())?;
        let params = KinodynamicParams {
            cell_size: instance.map.cell_size(),
            ..spec.kinodynamics
        };
        let out = run_planner(spec.run.planner, &instance, &spec.planner_config(), &params).map_err(|e| e.to_string())?;
        let plans = out.plans();
        let best = plans.len() - 1;
        result.solved = true;
        let picked: Vec<usize> = match spec.run.execute {
            ExecuteWhich::All => (0..plans.len()).collect(),
            ExecuteWhich::Best => vec![best],
        };
        for i in picked {
            let exec = execute_plan(plans[i], &instance, &params, &spec.exec).map_err(|e| e.to_string())?;
            if i == best {
                result.soc = plan_cost(plans[i]).ok();
                result.aet = Some(exec.trace.aet);
            }
            result.rows.push(DataRow::new(
                exec.features,
                exec.trace.aet,
                spec.instance_id(),
                format!("{}-{i}", spec.run.label()),
            ));
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        result.error = Some(e);
        result.rows.clear();
        result.soc = None;
        result.aet = None;
    }
    result
}

/// Summary of a finished experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub cells: Vec<CellResult>,
    pub dataset: Dataset,
    pub computed: usize,
    pub reused: usize,
}

fn write_atomic(path: &Path, text: &str) -> Result<(), ExperimentError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))
}

/// Expands the matrix in spec order (map, robot count, scenario, run).
pub fn expand_cells(spec: &ExperimentSpec, base: &Path) -> Result<Vec<(CellSpec, Arc<GridMap>)>, ExperimentError> {
    let mut cells = Vec::new();
    for m in &spec.maps {
        let map = Arc::new(spec.build_map(m, base)?);
        let map_text = map.to_movingai();
        for &n in &m.robots {
            for s in 0..spec.scenarios {
                for run in &spec.runs {
                    cells.push((
                        CellSpec {
                            map: m.name.clone(),
                            map_text: map_text.clone(),
                            robots: n,
                            scenario: s,
                            instance_seed: spec.seed.wrapping_mul(1_000_003).wrapping_add(s as u64),
                            run: run.clone(),
                            planner: spec.planner.clone(),
                            exec: ExecConfig {
                                seed: spec.exec.seed.wrapping_add(s as u64),
                                ..spec.exec
                            },
                            kinodynamics: spec.kinodynamics,
                        },
                        map.clone(),
                    ));
                }
            }
        }
    }
    Ok(cells)
}

/// Runs every cell not already on disk, then writes the merged artifacts.
pub fn run_experiment(spec: &ExperimentSpec, base: &Path, out_dir: &Path) -> Result<ExperimentOutcome, ExperimentError> {
    spec.check()?;
    let cell_dir = out_dir.join("cells");
    std::fs::create_dir_all(&cell_dir).map_err(io_err(&cell_dir))?;
    let cells = expand_cells(spec, base)?;

    let mut results: Vec<Option<CellResult>> = Vec::with_capacity(cells.len());
    let mut todo = Vec::new();
    for (i, (cell, _)) in cells.iter().enumerate() {
        let path = cell_dir.join(format!("{}.json", cell.key()));
        let cached = std::fs::read_to_string(&path)
            .ok()
            .and_then(|t| serde_json::from_str::<CellResult>(&t).ok());
        if cached.is_none() {
            todo.push(i);
        }
        results.push(cached);
    }
    let reused = cells.len() - todo.len();
    log::info!("{} cells, {} cached, {} to run", cells.len(), reused, todo.len());

    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::new());
    let failure: Mutex<Option<ExperimentError>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..spec.workers.clamp(1, todo.len().max(1)) {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&i) = todo.get(j) else { break };
                let (cell, map) = &cells[i];
                let r = run_cell(cell, map.clone());
                if let Some(e) = &r.error {
                    log::warn!("cell {} ({} {}): {e}", r.key, cell.instance_id(), r.run);
                }
                let path = cell_dir.join(format!("{}.json", r.key));
                let json = serde_json::to_string_pretty(&r).expect("cell result serializes");
                if let Err(e) = write_atomic(&path, &json) {
                    failure.lock().expect("lock").get_or_insert(e);
                }
                done.lock().expect("lock").push((i, r));
            });
        }
    });
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    for (i, r) in done.into_inner().expect("lock") {
        results[i] = Some(r);
    }
    let cells: Vec<CellResult> = results.into_iter().map(|r| r.expect("every cell ran")).collect();

    let dataset = Dataset::from_rows(cells.iter().flat_map(|c| c.rows.iter().cloned()))?;
    write_artifacts(spec, out_dir, &cells, &dataset)?;
    Ok(ExperimentOutcome {
        cells,
        dataset,
        computed: todo.len(),
        reused,
    })
}

fn write_artifacts(
    spec: &ExperimentSpec,
    out_dir: &Path,
    cells: &[CellResult],
    dataset: &Dataset,
) -> Result<(), ExperimentError> {
    let write = |name: &str, text: &str| write_atomic(&out_dir.join(name), text);
    write("dataset.csv", &dataset.to_csv())?;
    write("success.csv", &success_csv(cells))?;
    write("cells.csv", &cells_csv(cells))?;
    write("scatter.csv", &scatter_csv(dataset, Feature::Soc))?;
    write("correlation.csv", &correlation_csv(dataset))?;
    match ablation_table(dataset, spec.folds, spec.seed) {
        Ok(report) => write("ablation.csv", &report.to_csv())?,
        Err(e) => log::warn!("no ablation report: {e}"),
    }
    Ok(())
}

/// Per (map, run, robot count): attempted and solved cells.
pub fn success_csv(cells: &[CellResult]) -> String {
    let mut groups: BTreeMap<(&str, &str, usize), (usize, usize)> = BTreeMap::new();
    for c in cells {
        let g = groups.entry((&c.map, &c.run, c.robots)).or_default();
        g.0 += 1;
        g.1 += c.solved as usize;
    }
    let mut out = String::from("map,run,robots,attempted,solved,rate\n");
    for ((map, run, n), (a, s)) in groups {
        let _ = writeln!(out, "{map},{run},{n},{a},{s},{:.4}", s as f64 / a as f64);
    }
    out
}

/// One line per cell with the best plan's cost and AET.
pub fn cells_csv(cells: &[CellResult]) -> String {
    let mut out = String::from("map,robots,scenario,run,solved,soc,aet,error\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.map,
            c.robots,
            c.scenario,
            c.run,
            c.solved,
            c.soc.map(|s| s.to_string()).unwrap_or_default(),
            c.aet.map(|a| a.to_string()).unwrap_or_default(),
            c.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        );
    }
    out
}

/// Pearson r(SoC, AET) per instance and planner run, plus over all rows.
pub fn correlation_csv(dataset: &Dataset) -> String {
    let mut groups: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (i, r) in dataset.rows().iter().enumerate() {
        let run = r.plan.rsplit_once('-').map(|(a, _)| a).unwrap_or(&r.plan);
        groups.entry((r.instance.clone(), run.to_string())).or_default().push(i);
    }
    let mut out = String::from("instance,run,n,r,slope,intercept\n");
    let mut line = |inst: &str, run: &str, d: &Dataset| {
        if let Ok(c) = correlation(d, Feature::Soc) {
            let _ = writeln!(out, "{inst},{run},{},{:.6},{:.6},{:.6}", c.n, c.r, c.slope, c.intercept);
        }
    };
    for ((inst, run), idx) in &groups {
        line(inst, run, &dataset.subset(idx));
    }
    line("all", "all", dataset);
    out
}
