//! Strategic ground delays on the bundled single-resource instance: three
//! flights, ten seconds apart, through a fix that takes one arrival per
//! 200 s window. The optimizer, the enumeration oracle and the online
//! heuristic are compared side by side.
//!
//!     cargo run --release --example dcb_exact

use uamflow::airspace::{FlightPlan, ScenarioConfig};
use uamflow::dcb::{brute_force_oracle, solve_exact, solve_heuristic, validate_solution, DcbConfig};

fn main() -> anyhow::Result<()> {
    let scenario = ScenarioConfig::bundled_single_resource();
    let network = scenario.network()?;
    let cfg = DcbConfig::from_network(&network, &scenario.dcb)?;

    let plans = vec![
        FlightPlan::new("F1", "RW", 0.0),
        FlightPlan::new("F2", "RW", 10.0),
        FlightPlan::new("F3", "RW", 20.0),
    ];

    let exact = solve_exact(&plans, &network, &cfg)?;
    let oracle = brute_force_oracle(&plans, &network, &cfg)?;
    let heuristic = solve_heuristic(&plans, &network, &cfg, 1.0)?;

    println!("transit to the fix: 100 s, window 200 s, capacity 1, origin separation 30 s\n");
    println!(
        "{:>8} {:>10} {:>14} {:>14} {:>14}",
        "flight", "scheduled", "exact", "oracle", "heuristic"
    );
    for p in &plans {
        println!(
            "{:>8} {:>10.0} {:>14.0} {:>14.0} {:>14.0}",
            p.flight_id,
            p.scheduled_departure,
            exact.required_departures[&p.flight_id],
            oracle.required_departures[&p.flight_id],
            heuristic.required_departures[&p.flight_id],
        );
    }
    println!(
        "{:>8} {:>10} {:>14.0} {:>14.0} {:>14.0}",
        "delay", "", exact.total_delay, oracle.total_delay, heuristic.total_delay
    );

    assert_eq!(exact.total_delay, oracle.total_delay);
    assert!(heuristic.total_delay >= exact.total_delay);
    println!("\nexact matches the oracle; the online heuristic never beats it");

    let report = validate_solution(&exact, &plans, &network, &cfg)?;
    println!("constraint recheck: {report}");

    for ((resource, flight), window) in &exact.assignment.entries {
        println!("  {flight} crosses {resource} in window {window}");
    }
    Ok(())
}
