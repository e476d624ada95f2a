//! Scratch: verify pinned configuration at acceptance scale.
use std::sync::Arc;
use uamflow::airspace::ScenarioConfig;
use uamflow::engine::{monte_carlo, EngineConfig, StrategicMode, TacticalMode};
use uamflow::metrics::{aggregate, capacity_sweep, Aggregation, RiskModelParams, RunStats};
use uamflow::tactical::{build_preconditioned_pool, train_policy, DetectionMode, RulePolicyParams, TrainConfig};

fn stats_of(logs: &[uamflow::engine::EpisodeLog]) -> Vec<RunStats> {
    logs.iter().enumerate().map(|(i, l)| RunStats::from_log(i as u64, l)).collect()
}

#[test]
#[ignore]
fn verify_pinned() {
    let engine = EngineConfig::default();
    let risk = RiskModelParams::default();
    let scenario = ScenarioConfig::bundled_default();
    let rule = RulePolicyParams::for_thresholds(&scenario.thresholds);
    println!("rule defaults: d_ls {} d_hs {} {:?}", rule.d_ls, rule.d_hs, rule.hold_band);

    let nodcb = scenario.with_capacity(100_000);
    let base_logs = monte_carlo(&nodcb, StrategicMode::Heuristic, &TacticalMode::None, 20, 9000, &engine, None).unwrap();
    let base = aggregate(&stats_of(&base_logs), &risk, Aggregation::PerRun);
    let rl = monte_carlo(&nodcb, StrategicMode::Heuristic, &TacticalMode::RuleBased(rule), 20, 9000, &engine, None).unwrap();
    let rep = aggregate(&stats_of(&rl), &risk, Aggregation::PerRun);
    println!("8a: baseline {:.2}, rule {:.2}, rr {:.2}",
        base.est_mac_per_100k_fh.mean, rep.est_mac_per_100k_fh.mean,
        rep.est_mac_per_100k_fh.mean / base.est_mac_per_100k_fh.mean);

    let t0 = std::time::Instant::now();
    let sweep = capacity_sweep(&scenario, &TacticalMode::RuleBased(rule), &[1,2,3,4,5,6,7,8], 20, 7000, &engine, &risk, None).unwrap();
    println!("rule sweep ({:?}): maxC {:?}", t0.elapsed(), sweep.max_compliant_capacity);
    print!("{}", sweep.to_text());

    let t0 = std::time::Instant::now();
    let train_scenario = scenario.with_capacity(8);
    let pool = build_preconditioned_pool(&train_scenario, 20, 77).unwrap();
    let cfg = TrainConfig::for_episodes(4000);
    let out = train_policy(&pool, DetectionMode::Forward, &train_scenario, &cfg, 7, None).unwrap();
    println!("trained in {:?}; {} states; last-200 reward {:.3}", t0.elapsed(), out.policy.len(),
        out.curve.iter().rev().take(200).map(|e| e.total).sum::<f64>() / 200.0);
    let policy = TacticalMode::Policy(Arc::new(out.policy));
    let t0 = std::time::Instant::now();
    let sweep = capacity_sweep(&scenario, &policy, &[1,2,3,4,5,6,7,8], 20, 7000, &engine, &risk, None).unwrap();
    println!("policy sweep ({:?}): maxC {:?}", t0.elapsed(), sweep.max_compliant_capacity);
    print!("{}", sweep.to_text());
}
