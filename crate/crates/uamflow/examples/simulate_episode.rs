//! One full episode with strategic preconditioning and the rule-based
//! tactical layer: departures get ground delays from the exact solve, then
//! followers manage their spacing with speed advisories in the air.
//!
//!     cargo run --release --example simulate_episode

use uamflow::airspace::ScenarioConfig;
use uamflow::engine::{run_episode, EngineConfig, EventKind, StrategicMode, TacticalMode};
use uamflow::tactical::RulePolicyParams;

fn main() -> anyhow::Result<()> {
    let scenario = ScenarioConfig::bundled_default().with_capacity(4);
    let params = RulePolicyParams::for_thresholds(&scenario.thresholds);
    let cfg = EngineConfig {
        record_speeds: true,
        ..EngineConfig::default()
    };

    for (label, strategic, tactical) in [
        ("no intervention", StrategicMode::None, TacticalMode::None),
        (
            "rule-based only",
            StrategicMode::None,
            TacticalMode::RuleBased(params),
        ),
        (
            "strategic + rule-based",
            StrategicMode::ExactPlan,
            TacticalMode::RuleBased(params),
        ),
    ] {
        let log = run_episode(&scenario, strategic, &tactical, 7, &cfg)?;
        let landed = log
            .flights
            .iter()
            .filter(|f| f.actual_time.is_some())
            .count();
        println!("{label}:");
        println!(
            "  {} flights ({landed} finished), {:.2} flight hours",
            log.flights.len(),
            log.flight_hours
        );
        println!(
            "  events: {} LoWC, {} NMAC, {} MAC",
            log.count_events(EventKind::LoWC),
            log.count_events(EventKind::Nmac),
            log.count_events(EventKind::Mac),
        );
        println!(
            "  delays: {:.0} s ground, {:.0} s airborne, {} alerts",
            log.total_ground_delay(),
            log.total_airborne_delay(),
            log.total_alerts()
        );
        if let Some(trace) = &log.speed_trace {
            let slowest = trace.iter().map(|s| s.speed).fold(f64::INFINITY, f64::min);
            let fastest = trace.iter().map(|s| s.speed).fold(0.0, f64::max);
            println!("  speeds observed: {slowest:.1} .. {fastest:.1} m/s");
        }
        println!();
    }
    Ok(())
}
