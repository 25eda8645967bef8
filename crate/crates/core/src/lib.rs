//! Planning-to-execution toolkit for multi-agent path finding.
//!
//! Plans are produced under three model fidelities (standard, rotation,
//! kinodynamic), converted into an action dependency graph, executed in a
//! kinematic differential-drive simulator, and analyzed for how plan cost
//! and model accuracy drive the realized execution time.

pub mod kinodynamics;
pub mod plan;
pub mod planners;
pub mod validate;
pub mod world;
pub mod adg;
pub mod analysis;
pub mod simulator;
pub mod experiment;

pub use adg::{build_adg, Adg};
pub use experiment::{execute_plan, run_experiment, run_planner, ExperimentSpec, PipelineError, PlannerKind};
pub use kinodynamics::KinodynamicParams;
pub use plan::{Model, Plan};
pub use planners::PlannerConfig;
pub use simulator::{simulate, ExecConfig, ExecutionTrace};
pub use world::{GridMap, Instance};
