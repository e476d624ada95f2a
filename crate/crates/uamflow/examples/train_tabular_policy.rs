//! Train the shared tabular policy on strategically preconditioned
//! schedules, then fly it greedily and compare against the rule-based
//! baseline on the same seeds. Writes the learning curve and the policy
//! artifact under out/example_train/.
//!
//!     cargo run --release --example train_tabular_policy

use std::sync::Arc;
use uamflow::airspace::ScenarioConfig;
use uamflow::engine::{run_episode, EventKind, StrategicMode, TacticalMode};
use uamflow::tactical::{
    build_preconditioned_pool, train_policy, DetectionMode, RulePolicyParams, TrainConfig,
};

fn main() -> anyhow::Result<()> {
    let scenario = ScenarioConfig::bundled_default().with_capacity(6);
    let pool = build_preconditioned_pool(&scenario, 10, 1)?;
    let cfg = TrainConfig {
        episodes: 400,
        ..Default::default()
    };

    println!("training on {} preconditioned schedules...", pool.len());
    let outcome = train_policy(&pool, DetectionMode::Forward, &scenario, &cfg, 7, None)?;
    let curve = &outcome.curve;
    for chunk in curve.chunks(100) {
        let mean = chunk.iter().map(|e| e.total).sum::<f64>() / chunk.len() as f64;
        let safety = chunk.iter().map(|e| e.safety).sum::<f64>() / chunk.len() as f64;
        println!(
            "episodes {:>4}..{:<4} mean reward {mean:>9.3} (safety component {safety:>8.3})",
            chunk.first().unwrap().episode,
            chunk.last().unwrap().episode
        );
    }

    std::fs::create_dir_all("out/example_train")?;
    outcome.policy.save("out/example_train/policy.json")?;
    println!(
        "\npolicy saved to out/example_train/policy.json ({} states visited)",
        outcome.policy.len()
    );

    let policy = TacticalMode::Policy(Arc::new(outcome.policy));
    let rule = TacticalMode::RuleBased(RulePolicyParams::for_thresholds(&scenario.thresholds));
    println!("\ngreedy fly-off on five fresh seeds (strategic exact plan):");
    println!(
        "{:>6} {:>16} {:>16} {:>16} {:>16}",
        "seed", "policy NMAC", "rule NMAC", "policy airborne", "rule airborne"
    );
    for seed in 100..105 {
        let a = run_episode(
            &scenario,
            StrategicMode::ExactPlan,
            &policy,
            seed,
            &cfg.engine,
        )?;
        let b = run_episode(&scenario, StrategicMode::ExactPlan, &rule, seed, &cfg.engine)?;
        println!(
            "{:>6} {:>16} {:>16} {:>16.0} {:>16.0}",
            seed,
            a.count_events(EventKind::Nmac),
            b.count_events(EventKind::Nmac),
            a.total_airborne_delay(),
            b.total_airborne_delay(),
        );
    }
    Ok(())
}
