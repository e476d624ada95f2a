//! Sweep the resource capacity under the rule-based tactical layer and flag
//! each point against the target level of safety. Higher capacity means
//! less ground delay but more traffic pressure on the tactical layer.
//!
//!     cargo run --release --example capacity_sweep

use uamflow::airspace::ScenarioConfig;
use uamflow::engine::{EngineConfig, TacticalMode};
use uamflow::metrics::{capacity_sweep, RiskModelParams};
use uamflow::tactical::RulePolicyParams;

fn main() -> anyhow::Result<()> {
    let scenario = ScenarioConfig::bundled_default();
    let rule = TacticalMode::RuleBased(RulePolicyParams::for_thresholds(&scenario.thresholds));

    println!("rule-based tactical layer, capacities 1..6, 10 runs each:\n");
    let table = capacity_sweep(
        &scenario,
        &rule,
        &[1, 2, 3, 4, 5, 6],
        10,
        500,
        &EngineConfig::default(),
        &RiskModelParams::default(),
        None,
    )?;
    print!("{}", table.to_text());

    println!("\nground delay falls as capacity rises:");
    for row in &table.rows {
        println!(
            "  C={}: mean ground delay {:>7.1} s/flight",
            row.capacity, row.report.mean_ground_delay_s.mean
        );
    }
    Ok(())
}
