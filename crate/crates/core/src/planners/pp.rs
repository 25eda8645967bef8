//! Prioritized planning and its random-restart anytime variant.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::astar::{search, HeuristicCache};
use super::{
    plan_from_paths, soc_of, Budget, Path, PlanSeries, PlannerConfig, PlannerError,
    ReservationTable,
};
use crate::plan::Plan;
use crate::world::Instance;

/// Plans robots (by index) one after another, each avoiding everything in
/// `table`; successful paths are added to the table.
pub(crate) fn plan_sequence(
    instance: &Instance,
    order: &[usize],
    table: &mut ReservationTable,
    config: &PlannerConfig,
    cache: &mut HeuristicCache,
) -> Result<Vec<(usize, Path)>, PlannerError> {
    let mut out = Vec::with_capacity(order.len());
    for &idx in order {
        let task = &instance.robots[idx];
        let path = search(instance, task, &[], Some(table), config, cache)?;
        table.add_path(task.id, &path);
        out.push((idx, path));
    }
    Ok(out)
}

fn order_to_indices(instance: &Instance, order: &[usize]) -> Result<Vec<usize>, PlannerError> {
    let mut idx: Vec<usize> = order
        .iter()
        .map(|id| {
            instance
                .robots
                .iter()
                .position(|r| r.id == *id)
                .ok_or(PlannerError::UnknownRobot(*id))
        })
        .collect::<Result<_, _>>()?;
    let out = idx.clone();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() != instance.num_robots() || out.len() != idx.len() {
        return Err(PlannerError::BadPriorityOrder);
    }
    Ok(out)
}

fn plan_order(
    instance: &Instance,
    order: &[usize],
    config: &PlannerConfig,
    cache: &mut HeuristicCache,
) -> Result<Vec<Path>, PlannerError> {
    let mut table = ReservationTable::new(&instance.map);
    let mut paths = vec![Vec::new(); instance.num_robots()];
    for (idx, path) in plan_sequence(instance, order, &mut table, config, cache)? {
        paths[idx] = path;
    }
    Ok(paths)
}

/// Plans robots in the given priority order (robot ids, highest first).
pub fn prioritized_plan(
    instance: &Instance,
    priority_order: &[usize],
    config: &PlannerConfig,
) -> Result<Plan, PlannerError> {
    config.check_discrete()?;
    let order = order_to_indices(instance, priority_order)?;
    let mut cache = HeuristicCache::new(instance.map.clone(), config.model);
    let paths = plan_order(instance, &order, config, &mut cache)?;
    Ok(plan_from_paths(config.model, instance, &paths))
}

/// Prioritized planning with seeded random priority orders; records every
/// strict improvement of the sum of costs.
pub fn pp_restart_anytime(
    instance: &Instance,
    config: &PlannerConfig,
) -> Result<PlanSeries, PlannerError> {
    config.check_discrete()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cache = HeuristicCache::new(instance.map.clone(), config.model);
    let mut budget = Budget::new(config);
    let mut series = PlanSeries::default();
    let mut order: Vec<usize> = (0..instance.num_robots()).collect();
    while budget.tick() {
        order.shuffle(&mut rng);
        match plan_order(instance, &order, config, &mut cache) {
            Ok(paths) => {
                let soc = soc_of(&paths);
                if series.best().is_none_or(|b| soc < b.soc) {
                    series.push(&budget, soc, plan_from_paths(config.model, instance, &paths));
                }
            }
            Err(_) => {}
        }
    }
    if series.is_empty() {
        return Err(PlannerError::NoSolution(budget.used()));
    }
    Ok(series)
}
