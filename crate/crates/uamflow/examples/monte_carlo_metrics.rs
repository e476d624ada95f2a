//! Monte Carlo safety analysis: repeated seeded episodes per configuration,
//! aggregated into event rates, the estimated-collision chain and risk
//! ratios against the unmitigated baseline.
//!
//!     cargo run --release --example monte_carlo_metrics

use uamflow::airspace::ScenarioConfig;
use uamflow::engine::{monte_carlo, EngineConfig, StrategicMode, TacticalMode};
use uamflow::metrics::{
    aggregate, calibrate_p_mac_given_nmac, comparison_table, Aggregation, RiskModelParams,
    RunStats,
};
use uamflow::tactical::RulePolicyParams;

fn main() -> anyhow::Result<()> {
    let scenario = ScenarioConfig::bundled_default();
    let engine = EngineConfig::default();
    let params = RiskModelParams::default();
    let runs = 20;
    let rule = RulePolicyParams::for_thresholds(&scenario.thresholds);

    let settings = [
        ("no intervention", StrategicMode::None, TacticalMode::None),
        ("rule-based", StrategicMode::None, TacticalMode::RuleBased(rule)),
        ("strategic C=1", StrategicMode::ExactPlan, TacticalMode::None),
        (
            "rule + strategic C=4",
            StrategicMode::ExactPlan,
            TacticalMode::RuleBased(rule),
        ),
    ];

    let mut reports = Vec::new();
    for (label, strategic, tactical) in settings {
        let cfg = match label {
            "strategic C=1" => scenario.with_capacity(1),
            "rule + strategic C=4" => scenario.with_capacity(4),
            _ => scenario.clone(),
        };
        let logs = monte_carlo(&cfg, strategic, &tactical, runs, 1000, &engine, None)?;
        let stats: Vec<RunStats> = logs
            .iter()
            .enumerate()
            .map(|(i, l)| RunStats::from_log(i as u64, l))
            .collect();
        if label == "no intervention" {
            match calibrate_p_mac_given_nmac(&logs) {
                Some(c) => println!(
                    "calibrated P(MAC|NMAC) from the baseline: {:.4} ({} MAC / {} NMAC), 95% CI [{:.4}, {:.4}]",
                    c.p, c.mac_events, c.nmac_events, c.ci_low, c.ci_high
                ),
                None => println!("baseline produced no NMACs; P(MAC|NMAC) undefined"),
            }
        }
        reports.push((label.to_string(), aggregate(&stats, &params, Aggregation::PerRun)));
    }

    let baseline = reports[0].1.clone();
    for (_, report) in reports.iter_mut() {
        *report = report.clone().with_baseline(&baseline);
    }
    let rows: Vec<(String, &uamflow::metrics::MetricsReport)> =
        reports.iter().map(|(l, r)| (l.clone(), r)).collect();
    println!("\n{} runs per setting, high demand:\n", runs);
    print!("{}", comparison_table(&rows));
    Ok(())
}
