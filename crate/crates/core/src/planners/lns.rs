//! Anytime plan improvement by destroy-and-replan over random robot subsets.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::astar::HeuristicCache;
use super::pp::plan_sequence;
use super::{
    paths_from_plan, plan_from_paths, soc_of, Budget, PlanSeries, PlannerConfig, PlannerError,
    ReservationTable,
};
use crate::plan::Plan;
use crate::validate::validate;
use crate::world::Instance;

/// Improves `initial` until the budget runs out. The series starts with the
/// initial plan and gains an entry for every strict decrease of the sum of costs.
pub fn lns_improve(
    instance: &Instance,
    initial: &Plan,
    config: &PlannerConfig,
) -> Result<PlanSeries, PlannerError> {
    config.check_discrete()?;
    if initial.model != config.model {
        return Err(PlannerError::InvalidInitial(format!(
            "plan model {} differs from configured model {}",
            initial.model.name(),
            config.model.name()
        )));
    }
    let report = validate(initial, instance, config.k)
        .map_err(|e| PlannerError::InvalidInitial(e.to_string()))?;
    if let Some(v) = report.violations.first() {
        return Err(PlannerError::InvalidInitial(format!(
            "{} violation(s), first: {v:?}",
            report.violations.len()
        )));
    }
    let mut paths = paths_from_plan(initial, instance)?;
    let mut soc = soc_of(&paths);
    let mut budget = Budget::new(config);
    let mut series = PlanSeries::default();
    series.push(&budget, soc, plan_from_paths(config.model, instance, &paths));

    let n = instance.num_robots();
    let m = config.neighborhood.clamp(1, n.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cache = HeuristicCache::new(instance.map.clone(), config.model);
    while n > 0 && budget.tick() {
        let mut chosen = index::sample(&mut rng, n, m).into_vec();
        chosen.sort_unstable();
        chosen.shuffle(&mut rng);
        let mut table = ReservationTable::new(&instance.map);
        for (i, path) in paths.iter().enumerate() {
            if !chosen.contains(&i) {
                table.add_path(instance.robots[i].id, path);
            }
        }
        let Ok(replanned) = plan_sequence(instance, &chosen, &mut table, config, &mut cache) else {
            continue;
        };
        let mut candidate = paths.clone();
        for (i, path) in replanned {
            candidate[i] = path;
        }
        let cand_soc = soc_of(&candidate);
        if cand_soc < soc {
            paths = candidate;
            soc = cand_soc;
            series.push(&budget, soc, plan_from_paths(config.model, instance, &paths));
        }
    }
    Ok(series)
}
