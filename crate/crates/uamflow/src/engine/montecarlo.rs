//! Repeated independent episodes with derived seeds.

use super::{run_episode, EngineConfig, EngineError, EpisodeLog, StrategicMode, TacticalMode};
use crate::airspace::ScenarioConfig;
use rayon::prelude::*;

/// Runs `runs` independent episodes with seeds `base_seed..base_seed+runs`,
/// each with freshly generated demand. Episodes are distributed over
/// `workers` threads (`None`: whatever rayon defaults to); the returned
/// vector is ordered by run index, so results do not depend on the worker
/// count.
pub fn monte_carlo(
    scenario: &ScenarioConfig,
    strategic: StrategicMode,
    tactical: &TacticalMode,
    runs: u64,
    base_seed: u64,
    cfg: &EngineConfig,
    workers: Option<usize>,
) -> Result<Vec<EpisodeLog>, EngineError> {
    let run_all = || {
        (0..runs)
            .into_par_iter()
            .map(|i| run_episode(scenario, strategic, tactical, base_seed + i, cfg))
            .collect::<Result<Vec<_>, _>>()
    };
    match workers {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| EngineError::InvalidConfig(format!("worker pool: {e}")))?;
            pool.install(run_all)
        }
        _ => run_all(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_run_equals_run_episode() {
        let scenario = ScenarioConfig::bundled_default();
        let cfg = EngineConfig::default();
        let mc = monte_carlo(
            &scenario,
            StrategicMode::None,
            &TacticalMode::None,
            1,
            77,
            &cfg,
            None,
        )
        .unwrap();
        let single = run_episode(&scenario, StrategicMode::None, &TacticalMode::None, 77, &cfg)
            .unwrap();
        assert_eq!(mc.len(), 1);
        assert_eq!(mc[0], single);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let scenario = ScenarioConfig::bundled_default();
        let cfg = EngineConfig::default();
        let one = monte_carlo(
            &scenario,
            StrategicMode::None,
            &TacticalMode::None,
            4,
            5,
            &cfg,
            Some(1),
        )
        .unwrap();
        let four = monte_carlo(
            &scenario,
            StrategicMode::None,
            &TacticalMode::None,
            4,
            5,
            &cfg,
            Some(4),
        )
        .unwrap();
        assert_eq!(one, four);
    }
}
