//! `mapfx`: plan, execute, validate, featurize and regress from the shell.
//!
//! Exit codes: 0 on success, 1 for usage or input errors (including invalid
//! plans), 2 when a planner fails to produce a plan.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use mapf_exec::adg::{build_adg, count_features};
use mapf_exec::analysis::{ablation_table, cross_validated_mape, fit_quadratic, mape, Dataset, Feature};
use mapf_exec::experiment::{execute_plan, run_experiment, ExperimentSpec, PipelineError, PlannerKind};
use mapf_exec::kinodynamics::KinodynamicParams;
use mapf_exec::plan::{Model, Plan};
use mapf_exec::planners::{PlanSeries, PlannerConfig};
use mapf_exec::simulator::ExecConfig;
use mapf_exec::validate::validate;
use mapf_exec::world::{load_map, load_scenario, random_instance, Instance};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Solver(_) => 2,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Planner(_) => CliError::Solver(e.to_string()),
            PipelineError::Refused(report) => CliError::Usage(format!(
                "refusing to execute an invalid plan:\n{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            )),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "mapfx", version, about = "Multi-robot planning and execution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan an instance and write Plan JSON (or a plan series for anytime planners).
    Plan(PlanArgs),
    /// Build the dependency graph, simulate, and write a trace and summary.
    Execute(ExecuteArgs),
    /// Check a plan for collisions and continuity errors.
    Validate(ValidateArgs),
    /// Print the regression features of a plan.
    Features(FeaturesArgs),
    /// Fit execution-time models on a dataset CSV.
    Regress(RegressArgs),
    /// Run an experiment matrix from a TOML spec.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance JSON (map path plus robots).
    #[arg(long, conflicts_with_all = ["map", "scen"])]
    instance: Option<PathBuf>,
    /// MovingAI .map file.
    #[arg(long)]
    map: Option<PathBuf>,
    /// MovingAI .scen file; the first `n` entries are used.
    #[arg(long, requires = "map")]
    scen: Option<PathBuf>,
    /// Number of robots.
    #[arg(short = 'n', long = "robots")]
    robots: Option<usize>,
    /// Seed for random starts and goals when no scenario is given.
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance, CliError> {
        if let Some(p) = &self.instance {
            let inst = Instance::load_json(p).map_err(usage)?;
            return Ok(match self.robots {
                Some(n) => inst.truncated(n),
                None => inst,
            });
        }
        let map_path = self
            .map
            .as_ref()
            .ok_or_else(|| usage("give either --instance or --map"))?;
        let map = Arc::new(load_map(map_path).map_err(usage)?);
        let n = self.robots.ok_or_else(|| usage("-n is required with --map"))?;
        let inst = match &self.scen {
            Some(s) => load_scenario(s, map, n),
            None => random_instance(map, n, self.instance_seed),
        }
        .map_err(usage)?;
        Ok(inst.with_map_path(map_path.display().to_string()))
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value = "pbs")]
    planner: PlannerKind,
    #[arg(long, default_value = "standard")]
    model: Model,
    /// Robustness window in timesteps (discrete models).
    #[arg(short = 'k', default_value_t = 0)]
    k: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock budget, seconds.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// Restarts, LNS rounds or search nodes.
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long, default_value_t = 4)]
    neighborhood: usize,
    /// Output file; stdout when absent.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlanFileArgs {
    /// Plan or plan-series JSON.
    #[arg(long)]
    plan: PathBuf,
    /// Series entry to use; the best (last) when absent.
    #[arg(long)]
    entry: Option<usize>,
}

impl PlanFileArgs {
    fn load(&self) -> Result<Plan, CliError> {
        let text = std::fs::read_to_string(&self.plan).map_err(|e| usage(format!("{}: {e}", self.plan.display())))?;
        if let Ok(plan) = Plan::from_json(&text) {
            return Ok(plan);
        }
        let series: PlanSeries =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: not a plan or plan series: {e}", self.plan.display())))?;
        let idx = self.entry.unwrap_or(series.len().saturating_sub(1));
        series
            .entries
            .into_iter()
            .nth(idx)
            .map(|e| e.plan)
            .ok_or_else(|| usage(format!("series has no entry {idx}")))
    }
}

#[derive(Args)]
struct ExecuteArgs {
    #[command(flatten)]
    plan: PlanFileArgs,
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Upper bound of the uniform per-action start delay, seconds.
    #[arg(long, default_value_t = 0.5)]
    delay: f64,
    /// Per-action speed factor is drawn from [1 - noise, 1].
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    /// Trace CSV output.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Summary JSON output; stdout when absent.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    plan: PlanFileArgs,
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(short = 'k', default_value_t = 0)]
    k: u32,
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    plan: PlanFileArgs,
    #[command(flatten)]
    instance: InstanceArgs,
}

#[derive(Args)]
struct RegressArgs {
    /// Dataset CSV.
    #[arg(long)]
    dataset: PathBuf,
    /// Comma-separated feature subset; prints the ablation table when absent.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<Feature>>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment spec (TOML).
    spec: PathBuf,
    /// Output directory; overrides the spec's `output`.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn params_for(inst: &Instance, plan: Option<&Plan>) -> KinodynamicParams {
    let base = plan.and_then(|p| p.kinodynamics).unwrap_or_default();
    KinodynamicParams {
        cell_size: inst.map.cell_size(),
        ..base
    }
}

fn cmd_plan(a: &PlanArgs) -> Result<(), CliError> {
    if !a.planner.supports(a.model) {
        return Err(usage(format!(
            "unsupported pair: planner {} cannot plan under the {} model",
            a.planner,
            a.model.name()
        )));
    }
    let inst = a.instance.load()?;
    let config = PlannerConfig {
        model: a.model,
        k: a.k,
        time_limit: a.time_limit,
        iteration_limit: a.iterations,
        seed: a.seed,
        horizon_cap: None,
        neighborhood: a.neighborhood,
    };
    let out = mapf_exec::experiment::run_planner(a.planner, &inst, &config, &params_for(&inst, None))?;
    emit(a.out.as_deref(), &out.to_json())
}

fn cmd_execute(a: &ExecuteArgs) -> Result<(), CliError> {
    let plan = a.plan.load()?;
    let inst = a.instance.load()?;
    let params = params_for(&inst, Some(&plan));
    let cfg = ExecConfig {
        dt: a.dt,
        max_delay: a.delay,
        speed_noise: a.noise,
        seed: a.seed,
    };
    cfg.check().map_err(usage)?;
    let exec = execute_plan(&plan, &inst, &params, &cfg)?;
    if let Some(p) = &a.trace {
        emit(Some(p), &exec.trace.to_csv())?;
    }
    emit(a.summary.as_deref(), &exec.trace.summary(&params).to_json())
}

fn cmd_validate(a: &ValidateArgs) -> Result<(), CliError> {
    let plan = a.plan.load()?;
    let inst = a.instance.load()?;
    let report = validate(&plan, &inst, a.k).map_err(usage)?;
    emit(None, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(usage(format!("plan has {} violation(s)", report.violations.len())))
    }
}

fn cmd_features(a: &FeaturesArgs) -> Result<(), CliError> {
    let plan = a.plan.load()?;
    let inst = a.instance.load()?;
    let adg = build_adg(&plan, &inst).map_err(usage)?;
    let f = count_features(&adg, &plan);
    emit(None, &serde_json::to_string_pretty(&f).expect("features serialize"))
}

fn cmd_regress(a: &RegressArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.dataset).map_err(|e| usage(format!("{}: {e}", a.dataset.display())))?;
    let data = Dataset::from_csv(&text).map_err(usage)?;
    let out = match &a.features {
        None => ablation_table(&data, a.folds, a.seed).map_err(usage)?.to_csv(),
        Some(subset) => {
            let model = fit_quadratic(&data, subset).map_err(usage)?;
            let train = mape(&model, &data).map_err(usage)?;
            let cv = cross_validated_mape(&data, subset, a.folds, a.seed).map_err(usage)?;
            serde_json::to_string_pretty(&serde_json::json!({
                "model": model,
                "train_mape": train,
                "cv_mape": cv,
            }))
            .expect("model serializes")
        }
    };
    emit(a.out.as_deref(), &out)
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<(), CliError> {
    let (mut spec, base) = ExperimentSpec::load(&a.spec).map_err(usage)?;
    if let Some(w) = a.workers {
        spec.workers = w;
    }
    let out = a
        .out
        .clone()
        .or_else(|| spec.output.as_ref().map(|o| base.join(o)))
        .ok_or_else(|| usage("no output directory: pass --out or set `output` in the spec"))?;
    let outcome = run_experiment(&spec, &base, &out).map_err(usage)?;
    let solved = outcome.cells.iter().filter(|c| c.solved).count();
    log::info!(
        "{} cells ({} run, {} reused), {} solved, {} dataset rows -> {}",
        outcome.cells.len(),
        outcome.computed,
        outcome.reused,
        solved,
        outcome.dataset.len(),
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Execute(a) => cmd_execute(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Features(a) => cmd_features(a),
        Command::Regress(a) => cmd_regress(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
