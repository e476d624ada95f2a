//! Scratch: detection-mode learning-speed ordering probe.
use uamflow::airspace::ScenarioConfig;
use uamflow::tactical::{build_preconditioned_pool, train_policy, DetectionMode, TrainConfig};

fn merge_scenario() -> ScenarioConfig {
    let mut scenario = ScenarioConfig::bundled_default();
    scenario.routes.truncate(2);
    scenario.demand.flights_per_route = 4;
    scenario.with_capacity(6)
}

fn episodes_to_threshold(curve: &[uamflow::tactical::EpisodeReward], threshold: f64, window: usize) -> Option<usize> {
    let totals: Vec<f64> = curve.iter().map(|e| e.total).collect();
    totals
        .windows(window)
        .position(|w| w.iter().sum::<f64>() / window as f64 >= threshold)
        .map(|i| i + window)
}

#[test]
#[ignore]
fn c6_probe() {
    let scenario = merge_scenario();
    let pool = build_preconditioned_pool(&scenario, 10, 55).unwrap();
    for mode in [DetectionMode::Forward, DetectionMode::All] {
        print!("{mode:?}:");
        for seed in 0..10u64 {
            let cfg = TrainConfig::for_episodes(500);
            let out = train_policy(&pool, mode, &scenario, &cfg, seed, None).unwrap();
            let smooth: Vec<f64> = out.curve.windows(25).map(|w| w.iter().map(|e| e.total).sum::<f64>() / 25.0).collect();
            let best = smooth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let hit = |th: f64| episodes_to_threshold(&out.curve, th, 25).map(|e| e.to_string()).unwrap_or("-".into());
            print!(" s{seed}[b{best:.2} t-1:{} t-.7:{} t-.5:{}]", hit(-1.0), hit(-0.7), hit(-0.5));
        }
        println!();
    }
}
